#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include "ibfit/distributions.hpp"
#include "ibfit/error.hpp"
#include "ibfit/optimize.hpp"

namespace ibfit {

// A fitted family. `spec.x_min` is the cut-off the fit was made at and
// `n_tail` the number of samples >= x_min that entered the likelihood.
struct FitResult {
  DistributionSpec spec;
  double loglik = 0.0;
  std::size_t n_tail = 0;
  bool converged = false;
  int evaluations = 0;

  DistributionKind kind() const noexcept { return spec.kind(); }
};

namespace detail {

// Sufficient statistics of a tail for the likelihoods below.
struct TailStats {
  std::span<const double> values;
  std::vector<double> logs;
  std::size_t n = 0;
  double x_min = 0.0;
  double sum_x = 0.0;
  double sum_log = 0.0;
  double mean_log = 0.0;
  double centered_log_ss = 0.0;  // sum (ln x - mean_log)^2
  bool constant = false;

  TailStats(const SortedSample& s, double x_min_) : values(s.tail(x_min_)), x_min(x_min_) {
    n = values.size();
    logs.reserve(n);
    for (double x : values) {
      logs.push_back(std::log(x));
      sum_x += x;
      sum_log += logs.back();
    }
    if (n == 0) return;
    mean_log = sum_log / n;
    for (double l : logs) centered_log_ss += (l - mean_log) * (l - mean_log);
    constant = values.front() == values.back();
  }
};

inline FitResult power_law_from_stats(const TailStats& t) {
  if (t.n == 0) throw DomainError("no samples at or above x_min");
  const double log_x0 = std::log(t.x_min);
  double sum_ratio = 0.0;
  for (double l : t.logs) sum_ratio += l - log_x0;
  if (!(sum_ratio > 0.0))
    throw DegenerateError("power law: every tail sample equals x_min");
  const double alpha = 1.0 + static_cast<double>(t.n) / sum_ratio;
  FitResult r{DistributionSpec::power_law(alpha, t.x_min), 0.0, t.n, true, 0};
  r.loglik = loglikelihood(r.spec, t.values);
  return r;
}

inline FitResult finish(DistributionSpec spec, const TailStats& t, const SimplexResult& opt) {
  FitResult r{spec, 0.0, t.n, opt.converged, opt.evaluations};
  r.loglik = loglikelihood(spec, t.values);
  if (!std::isfinite(r.loglik)) r.converged = false;
  return r;
}

inline FitResult fit_exponential(const TailStats& t) {
  const double excess = t.sum_x / t.n - t.x_min;
  if (!(excess > 0.0)) throw DegenerateError("exponential: every tail sample equals x_min");
  FitResult r{DistributionSpec::exponential(1.0 / excess, t.x_min), 0.0, t.n, true, 0};
  r.loglik = loglikelihood(r.spec, t.values);
  return r;
}

inline FitResult fit_log_normal(const TailStats& t, const SimplexOptions& opts) {
  if (t.constant || !(t.centered_log_ss > 0.0))
    throw DegenerateError("log-normal: zero variance in the tail");
  const double n = static_cast<double>(t.n);
  const double sd0 = std::sqrt(t.centered_log_ss / n);
  const double log_x0 = std::log(t.x_min);
  auto negll = [&](const std::vector<double>& p) {
    const double mu = p[0];
    const double sigma = std::exp(p[1]);
    const double z0 = (log_x0 - mu) / sigma;
    const double log_c =
        -std::log(sigma * std::sqrt(2.0 * std::numbers::pi)) - log_normal_upper_tail(z0);
    const double ss = t.centered_log_ss + n * (t.mean_log - mu) * (t.mean_log - mu);
    return -(n * log_c - t.sum_log - ss / (2.0 * sigma * sigma));
  };
  const auto opt =
      minimize_simplex(negll, {t.mean_log, std::log(sd0)}, {0.5 * sd0, 0.2}, opts);
  return finish(DistributionSpec::log_normal(opt.x[0], std::exp(opt.x[1]), t.x_min), t, opt);
}

inline FitResult fit_stretched_exponential(const TailStats& t, const SimplexOptions& opts) {
  if (t.constant || !(t.centered_log_ss > 0.0))
    throw DegenerateError("stretched exponential: zero variance in the tail");
  const double n = static_cast<double>(t.n);
  const double lambda0 = 1.0 / (t.sum_x / n - t.x_min);
  const double log_x0 = std::log(t.x_min);
  auto negll = [&](const std::vector<double>& p) {
    const double log_lambda = p[0];
    const double beta = std::exp(p[1]);
    double sum_pow = 0.0;
    for (double l : t.logs) sum_pow += std::exp(beta * (log_lambda + l));
    const double head = std::exp(beta * (log_lambda + log_x0));
    return -(n * (p[1] + beta * log_lambda + head) + (beta - 1.0) * t.sum_log - sum_pow);
  };
  // Starts at beta = 1, the exponential MLE, so the result never falls
  // below the nested exponential fit.
  const auto opt = minimize_simplex(negll, {std::log(lambda0), 0.0}, {0.5, 0.2}, opts);
  return finish(
      DistributionSpec::stretched_exponential(std::exp(opt.x[0]), std::exp(opt.x[1]), t.x_min), t,
      opt);
}

inline FitResult fit_truncated_power_law(const TailStats& t, const SimplexOptions& opts) {
  if (t.constant) throw DegenerateError("truncated power law: every tail sample equals x_min");
  const double n = static_cast<double>(t.n);
  const FitResult pl = power_law_from_stats(t);
  const double alpha0 = pl.spec.values()[0];
  const double lambda0 = 1.0 / t.values.back();
  // lambda = lambda0 * s^2 keeps lambda >= 0 with the boundary reachable.
  auto negll = [&](const std::vector<double>& p) {
    const double alpha = p[0];
    const double lambda = lambda0 * p[1] * p[1];
    if (lambda == 0.0 && !(alpha > 1.0)) return std::numeric_limits<double>::infinity();
    return n * detail::log_tpl_integral(alpha, lambda, t.x_min) + alpha * t.sum_log +
           lambda * t.sum_x;
  };
  const auto opt = minimize_simplex(negll, {alpha0, 1.0}, {0.1, 0.5}, opts);
  const double lambda = lambda0 * opt.x[1] * opt.x[1];
  FitResult r = finish(DistributionSpec::truncated_power_law(opt.x[0], lambda, t.x_min), t, opt);
  // The power law is the lambda = 0 member; if the interior search did not
  // beat it, report the boundary optimum exactly.
  if (!(r.loglik > pl.loglik)) {
    r.spec = DistributionSpec::truncated_power_law(alpha0, 0.0, t.x_min);
    r.loglik = loglikelihood(r.spec, t.values);
    r.converged = true;
  }
  return r;
}

}  // namespace detail

// Closed-form power-law exponent: alpha = 1 + n / sum ln(x_i / x_min) over
// the samples >= x_min.
inline FitResult fit_power_law(const SortedSample& samples, double x_min) {
  if (!(x_min > 0.0)) throw ParameterError("x_min must be positive");
  return detail::power_law_from_stats(detail::TailStats(samples, x_min));
}

// Maximum-likelihood fit of `kind` to the samples >= x_min. PL and Exp use
// closed forms; the two-parameter families use simplex descent from a
// moment-based start. `converged` is false if the evaluation cap was hit.
inline FitResult fit_mle(DistributionKind kind, const SortedSample& samples, double x_min,
                         const SimplexOptions& opts = {}) {
  if (!(x_min > 0.0)) throw ParameterError("x_min must be positive");
  const detail::TailStats t(samples, x_min);
  if (t.n < 2) throw DomainError("at least two samples at or above x_min are required");
  switch (kind) {
    case DistributionKind::PowerLaw: return detail::power_law_from_stats(t);
    case DistributionKind::TruncatedPowerLaw: return detail::fit_truncated_power_law(t, opts);
    case DistributionKind::Exponential: return detail::fit_exponential(t);
    case DistributionKind::StretchedExponential: return detail::fit_stretched_exponential(t, opts);
    case DistributionKind::LogNormal: return detail::fit_log_normal(t, opts);
  }
  throw ParameterError("unknown distribution kind");
}

}  // namespace ibfit
