#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ibfit/distributions.hpp"
#include "ibfit/error.hpp"
#include "ibfit/fit.hpp"
#include "ibfit/special.hpp"
#include "ibfit/tail_selection.hpp"

namespace ibfit {

inline constexpr double kDefaultLevel = 0.01;

enum class Regime { Tail, FullRange };

constexpr const char* to_string(Regime r) noexcept {
  return r == Regime::Tail ? "tail" : "full_range";
}

struct PairComparison {
  DistributionKind first;
  DistributionKind second;
  double r_norm = 0.0;   // > 0 when the data favour `first`
  double sigma12 = 0.0;
  double p_value = 1.0;
};

struct RankingReport {
  Regime regime = Regime::Tail;
  double x_min = 0.0;
  std::size_t n_tail = 0;
  std::array<std::optional<FitResult>, kNumKinds> fits;
  std::array<std::string, kNumKinds> fit_errors;  // why a kind was excluded
  std::vector<PairComparison> pairs;
  std::array<std::optional<double>, kNumKinds> g_scores;
  std::optional<DistributionKind> best;
  std::vector<DistributionKind> alternates;
  bool flagged = false;       // some kind was excluded from ranking
  bool inconclusive = false;  // no verdict could be reached

  bool ranked(DistributionKind k) const { return g_scores[index_of(k)].has_value(); }
  const PairComparison* pair(DistributionKind a, DistributionKind b) const {
    for (const auto& p : pairs)
      if ((p.first == a && p.second == b) || (p.first == b && p.second == a)) return &p;
    return nullptr;
  }
};

struct RankingOptions {
  double level = kDefaultLevel;
  std::size_t min_tail = kDefaultMinTail;
  SimplexOptions simplex = {};
};

// Probability that a standard normal exceeds |r| in magnitude.
inline double p_value(double r_norm) { return two_sided_normal_p(r_norm); }

// Normalized loglikelihood ratio from per-point log densities.
inline PairComparison compare_log_densities(DistributionKind first, DistributionKind second,
                                            std::span<const double> l1,
                                            std::span<const double> l2) {
  if (l1.size() != l2.size() || l1.empty())
    throw DomainError("log-density sequences must be non-empty and of equal length");
  PairComparison out{first, second, 0.0, 0.0, 1.0};
  if (std::equal(l1.begin(), l1.end(), l2.begin())) return out;

  const double n = static_cast<double>(l1.size());
  double mean = 0.0;
  for (std::size_t i = 0; i < l1.size(); ++i) mean += l1[i] - l2[i];
  mean /= n;
  double var = 0.0;
  for (std::size_t i = 0; i < l1.size(); ++i) {
    const double d = (l1[i] - l2[i]) - mean;
    var += d * d;
  }
  var /= n;
  if (!(var > 0.0))
    throw DegenerateError(std::string("log densities of ") + std::string(short_name(first)) +
                          " and " + std::string(short_name(second)) +
                          " differ by a constant; the ratio is undefined");
  out.sigma12 = std::sqrt(var);
  // sum d / (sigma sqrt n) == sqrt(n) * mean / sigma
  out.r_norm = std::sqrt(n) * mean / out.sigma12;
  out.p_value = p_value(out.r_norm);
  return out;
}

// Compares two fits made at the same cut-off on the same tail samples.
inline PairComparison compare_pair(const FitResult& fit1, const FitResult& fit2,
                                   std::span<const double> tail) {
  if (fit1.spec.x_min != fit2.spec.x_min)
    throw DomainError("compared fits must share x_min");
  const auto l1 = log_densities(fit1.spec, tail);
  const auto l2 = log_densities(fit2.spec, tail);
  return compare_log_densities(fit1.kind(), fit2.kind(), l1, l2);
}

// Fits all five kinds at x_min, compares every pair, and ranks by the sum of
// each kind's normalized ratios against its rivals. Kinds whose fit fails or
// does not converge are left out and the report is flagged; fewer than two
// ranked kinds makes the report inconclusive.
inline RankingReport rank_candidates(const SortedSample& samples, double x_min,
                                     const RankingOptions& opts = {},
                                     Regime regime = Regime::Tail) {
  if (!(opts.level > 0.0 && opts.level < 1.0)) throw ParameterError("level must lie in (0, 1)");
  RankingReport report;
  report.regime = regime;
  report.x_min = x_min;
  const auto tail = samples.tail(x_min);
  report.n_tail = tail.size();
  if (tail.size() < std::max<std::size_t>(opts.min_tail, 2)) {
    report.inconclusive = true;
    return report;
  }

  std::vector<DistributionKind> usable;
  std::array<std::vector<double>, kNumKinds> logd;
  for (auto k : kAllKinds) {
    const auto i = index_of(k);
    try {
      report.fits[i] = fit_mle(k, samples, x_min, opts.simplex);
      if (report.fits[i]->converged) {
        logd[i] = log_densities(report.fits[i]->spec, tail);
        usable.push_back(k);
      } else {
        report.fit_errors[i] = "did not converge";
      }
    } catch (const Error& e) {
      report.fit_errors[i] = e.what();
    }
  }
  report.flagged = usable.size() < kNumKinds;
  if (usable.size() < 2) {
    report.inconclusive = true;
    return report;
  }

  for (std::size_t a = 0; a < usable.size(); ++a) {
    for (std::size_t b = a + 1; b < usable.size(); ++b) {
      try {
        report.pairs.push_back(compare_log_densities(usable[a], usable[b],
                                                     logd[index_of(usable[a])],
                                                     logd[index_of(usable[b])]));
      } catch (const DegenerateError& e) {
        report.inconclusive = true;
        report.flagged = true;
        report.pairs.clear();
        return report;
      }
    }
  }

  for (auto k : usable) report.g_scores[index_of(k)] = 0.0;
  for (const auto& p : report.pairs) {
    *report.g_scores[index_of(p.first)] += p.r_norm;
    *report.g_scores[index_of(p.second)] -= p.r_norm;
  }
  // Ties resolve to the earlier kind in column order.
  DistributionKind best = usable.front();
  for (auto k : usable)
    if (*report.g_scores[index_of(k)] > *report.g_scores[index_of(best)]) best = k;
  report.best = best;
  for (auto k : usable) {
    if (k == best) continue;
    if (report.pair(best, k)->p_value >= opts.level) report.alternates.push_back(k);
  }
  return report;
}

// The whole sample is the tail: x_min is the smallest observation.
inline RankingReport fit_full_range(const SortedSample& samples,
                                    const RankingOptions& opts = {}) {
  if (samples.empty()) {
    RankingReport r;
    r.regime = Regime::FullRange;
    r.inconclusive = true;
    return r;
  }
  return rank_candidates(samples, samples.min(), opts, Regime::FullRange);
}

}  // namespace ibfit
