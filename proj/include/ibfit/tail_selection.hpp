#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "ibfit/distributions.hpp"
#include "ibfit/error.hpp"

namespace ibfit {

struct TailSelection {
  double x_min_hat = 0.0;
  double alpha_hat = 0.0;
  double z = 0.0;  // KS distance at the selected cut-off
  std::size_t n_tail = 0;
  double tail_fraction = 0.0;
};

inline constexpr std::size_t kDefaultMinTail = 10;

// Largest absolute gap between the empirical CDF of `samples` (sorted,
// all >= spec.x_min) and the model CDF, taken on both sides of every jump.
inline double ks_statistic(const DistributionSpec& spec, std::span<const double> samples) {
  if (samples.empty()) throw DomainError("KS statistic of an empty tail");
  const Density d(spec);
  const double n = static_cast<double>(samples.size());
  double z = 0.0;
  std::size_t i = 0;
  while (i < samples.size()) {
    std::size_t j = i + 1;
    while (j < samples.size() && samples[j] == samples[i]) ++j;
    const double p = d.cdf(samples[i]);
    z = std::max({z, std::abs(j / n - p), std::abs(p - i / n)});
    i = j;
  }
  return z;
}

namespace detail {

// KS distance of the power-law fit with cut-off at index `start`. Gives up
// and returns +inf as soon as the running maximum exceeds `bound`.
inline double power_law_ks(std::span<const double> values, std::span<const double> logs,
                           std::size_t start, double alpha, double bound) {
  const double n = static_cast<double>(values.size() - start);
  const double log_x0 = logs[start];
  const double slope = 1.0 - alpha;
  double z = 0.0;
  std::size_t i = start;
  while (i < values.size()) {
    std::size_t j = i + 1;
    while (j < values.size() && values[j] == values[i]) ++j;
    const double p = -std::expm1(slope * (logs[i] - log_x0));
    z = std::max({z, std::abs((j - start) / n - p), std::abs(p - (i - start) / n)});
    if (z > bound) return std::numeric_limits<double>::infinity();
    i = j;
  }
  return z;
}

}  // namespace detail

// Scans every distinct sample value leaving at least `min_tail` points at or
// above it, fits the power-law exponent there, and keeps the cut-off with the
// smallest KS distance (ties go to the smaller cut-off). Throws
// InconclusiveError when no candidate qualifies.
inline TailSelection select_xmin(const SortedSample& samples,
                                 std::size_t min_tail = kDefaultMinTail) {
  const std::span<const double> x = samples.values();
  const std::size_t total = x.size();
  if (min_tail < 1) min_tail = 1;
  if (total < min_tail)
    throw InconclusiveError("only " + std::to_string(total) + " samples, need " +
                            std::to_string(min_tail));

  std::vector<double> logs(total);
  for (std::size_t i = 0; i < total; ++i) logs[i] = std::log(x[i]);
  std::vector<long double> suffix(total + 1, 0.0L);
  for (std::size_t i = total; i-- > 0;) suffix[i] = suffix[i + 1] + logs[i];

  struct Candidate {
    std::size_t start;
    double alpha;
  };
  std::vector<Candidate> candidates;
  for (std::size_t j = 0; j + min_tail <= total; ++j) {
    if (j > 0 && x[j] == x[j - 1]) continue;
    const long double n = static_cast<long double>(total - j);
    const long double sum = suffix[j] - n * static_cast<long double>(logs[j]);
    if (!(sum > 0.0L)) continue;
    candidates.push_back({j, static_cast<double>(1.0L + n / sum)});
  }
  if (candidates.empty())
    throw InconclusiveError("no cut-off leaves " + std::to_string(min_tail) +
                            " non-degenerate tail points");

  double best_z = std::numeric_limits<double>::infinity();
  std::size_t best = candidates.size();
  auto consider = [&](std::size_t c) {
    const double z = detail::power_law_ks(x, logs, candidates[c].start, candidates[c].alpha, best_z);
    if (z < best_z || (z == best_z && c < best)) {
      best_z = z;
      best = c;
    }
  };
  // A coarse pass gives a tight bound early; the full pass is then exact
  // because candidates are only abandoned once they provably exceed it.
  const std::size_t stride = std::max<std::size_t>(1, candidates.size() / 32);
  for (std::size_t c = 0; c < candidates.size(); c += stride) consider(c);
  for (std::size_t c = 0; c < candidates.size(); ++c) consider(c);

  const auto& win = candidates[best];
  TailSelection sel;
  sel.x_min_hat = x[win.start];
  sel.alpha_hat = win.alpha;
  sel.z = best_z;
  sel.n_tail = total - win.start;
  sel.tail_fraction = static_cast<double>(sel.n_tail) / static_cast<double>(total);
  return sel;
}

inline double tail_fraction(const TailSelection& selection, std::size_t total) {
  if (total < selection.n_tail || selection.n_tail == 0)
    throw DomainError("tail count must lie in [1, N]");
  return static_cast<double>(selection.n_tail) / static_cast<double>(total);
}

}  // namespace ibfit
