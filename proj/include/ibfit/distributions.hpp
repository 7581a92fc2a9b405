#pragma once

#include <algorithm>
#include <cctype>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>
#include <vector>

#include "ibfit/error.hpp"
#include "ibfit/quadrature.hpp"
#include "ibfit/random.hpp"
#include "ibfit/special.hpp"

namespace ibfit {

// The five candidate families. The enumerator order is the column order of
// every report.
enum class DistributionKind : std::uint8_t {
  PowerLaw,
  TruncatedPowerLaw,
  Exponential,
  StretchedExponential,
  LogNormal,
};

inline constexpr std::size_t kNumKinds = 5;
inline constexpr std::array<DistributionKind, kNumKinds> kAllKinds = {
    DistributionKind::PowerLaw, DistributionKind::TruncatedPowerLaw,
    DistributionKind::Exponential, DistributionKind::StretchedExponential,
    DistributionKind::LogNormal};

constexpr std::size_t index_of(DistributionKind k) noexcept {
  return static_cast<std::size_t>(k);
}

constexpr std::string_view short_name(DistributionKind k) noexcept {
  constexpr std::array<std::string_view, kNumKinds> names = {"PL", "TPL", "Exp", "SExp", "LN"};
  return names[index_of(k)];
}

inline std::optional<DistributionKind> parse_kind(std::string_view s) {
  std::string lower(s);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "pl" || lower == "powerlaw" || lower == "power_law") return DistributionKind::PowerLaw;
  if (lower == "tpl" || lower == "truncatedpowerlaw" || lower == "truncated_power_law")
    return DistributionKind::TruncatedPowerLaw;
  if (lower == "exp" || lower == "exponential") return DistributionKind::Exponential;
  if (lower == "sexp" || lower == "stretchedexponential" || lower == "stretched_exponential")
    return DistributionKind::StretchedExponential;
  if (lower == "ln" || lower == "lognormal" || lower == "log_normal") return DistributionKind::LogNormal;
  return std::nullopt;
}

struct PowerLawParams {
  double alpha;
};
struct TruncatedPowerLawParams {
  double alpha;
  double lambda;
};
struct ExponentialParams {
  double lambda;
};
struct StretchedExponentialParams {
  double lambda;
  double beta;
};
struct LogNormalParams {
  double mu;
  double sigma;
};

// Alternative order matches DistributionKind.
using DistributionParams =
    std::variant<PowerLawParams, TruncatedPowerLawParams, ExponentialParams,
                 StretchedExponentialParams, LogNormalParams>;

// A candidate family with its parameters, supported on [x_min, inf). The
// normalization constant is always derived from the parameters.
struct DistributionSpec {
  DistributionParams params;
  double x_min;

  DistributionKind kind() const noexcept {
    return static_cast<DistributionKind>(params.index());
  }

  static DistributionSpec power_law(double alpha, double x_min) {
    return {PowerLawParams{alpha}, x_min};
  }
  static DistributionSpec truncated_power_law(double alpha, double lambda, double x_min) {
    return {TruncatedPowerLawParams{alpha, lambda}, x_min};
  }
  static DistributionSpec exponential(double lambda, double x_min) {
    return {ExponentialParams{lambda}, x_min};
  }
  static DistributionSpec stretched_exponential(double lambda, double beta, double x_min) {
    return {StretchedExponentialParams{lambda, beta}, x_min};
  }
  static DistributionSpec log_normal(double mu, double sigma, double x_min) {
    return {LogNormalParams{mu, sigma}, x_min};
  }

  bool operator==(const DistributionSpec& o) const {
    return x_min == o.x_min && kind() == o.kind() && values() == o.values();
  }

  // Parameter values in the order given by parameter_names().
  std::vector<double> values() const {
    return std::visit(
        [](const auto& p) -> std::vector<double> {
          using P = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<P, PowerLawParams>) return {p.alpha};
          else if constexpr (std::is_same_v<P, TruncatedPowerLawParams>) return {p.alpha, p.lambda};
          else if constexpr (std::is_same_v<P, ExponentialParams>) return {p.lambda};
          else if constexpr (std::is_same_v<P, StretchedExponentialParams>) return {p.lambda, p.beta};
          else return {p.mu, p.sigma};
        },
        params);
  }
};

inline std::vector<std::string_view> parameter_names(DistributionKind k) {
  switch (k) {
    case DistributionKind::PowerLaw: return {"alpha"};
    case DistributionKind::TruncatedPowerLaw: return {"alpha", "lambda"};
    case DistributionKind::Exponential: return {"lambda"};
    case DistributionKind::StretchedExponential: return {"lambda", "beta"};
    case DistributionKind::LogNormal: return {"mu", "sigma"};
  }
  return {};
}

// Builds a spec from a kind and parameter values in parameter_names() order.
inline DistributionSpec make_spec(DistributionKind k, std::span<const double> v, double x_min) {
  const auto need = parameter_names(k).size();
  if (v.size() != need)
    throw ParameterError(std::string(short_name(k)) + " takes " + std::to_string(need) +
                         " parameter(s)");
  switch (k) {
    case DistributionKind::PowerLaw: return DistributionSpec::power_law(v[0], x_min);
    case DistributionKind::TruncatedPowerLaw:
      return DistributionSpec::truncated_power_law(v[0], v[1], x_min);
    case DistributionKind::Exponential: return DistributionSpec::exponential(v[0], x_min);
    case DistributionKind::StretchedExponential:
      return DistributionSpec::stretched_exponential(v[0], v[1], x_min);
    case DistributionKind::LogNormal: return DistributionSpec::log_normal(v[0], v[1], x_min);
  }
  throw ParameterError("unknown distribution kind");
}

// Throws ParameterError if the spec violates its family's invariants.
// TPL admits lambda = 0 (the power-law limit) provided alpha > 1.
inline void validate(const DistributionSpec& spec) {
  auto fail = [&](const char* what) {
    throw ParameterError(std::string(short_name(spec.kind())) + ": " + what);
  };
  if (!(spec.x_min > 0.0) || !std::isfinite(spec.x_min)) fail("x_min must be positive and finite");
  std::visit(
      [&](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, PowerLawParams>) {
          if (!(p.alpha > 1.0) || !std::isfinite(p.alpha)) fail("alpha must exceed 1");
        } else if constexpr (std::is_same_v<P, TruncatedPowerLawParams>) {
          if (!std::isfinite(p.alpha)) fail("alpha must be finite");
          if (!(p.lambda >= 0.0) || !std::isfinite(p.lambda)) fail("lambda must be non-negative");
          if (p.lambda == 0.0 && !(p.alpha > 1.0)) fail("alpha must exceed 1 when lambda is 0");
        } else if constexpr (std::is_same_v<P, ExponentialParams>) {
          if (!(p.lambda > 0.0) || !std::isfinite(p.lambda)) fail("lambda must be positive");
        } else if constexpr (std::is_same_v<P, StretchedExponentialParams>) {
          if (!(p.lambda > 0.0) || !std::isfinite(p.lambda)) fail("lambda must be positive");
          if (!(p.beta > 0.0) || !std::isfinite(p.beta)) fail("beta must be positive");
        } else {
          if (!std::isfinite(p.mu)) fail("mu must be finite");
          if (!(p.sigma > 0.0) || !std::isfinite(p.sigma)) fail("sigma must be positive");
        }
      },
      spec.params);
}

// Positive, finite observations in ascending order.
class SortedSample {
 public:
  SortedSample() = default;
  explicit SortedSample(std::vector<double> values) : values_(std::move(values)) {
    for (double v : values_)
      if (!(v > 0.0) || !std::isfinite(v))
        throw DomainError("samples must be positive and finite");
    std::sort(values_.begin(), values_.end());
  }

  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }
  double min() const { return values_.front(); }
  double max() const { return values_.back(); }
  double operator[](std::size_t i) const { return values_[i]; }
  std::span<const double> values() const noexcept { return values_; }

  // Index of the first value >= x.
  std::size_t lower_index(double x) const {
    return static_cast<std::size_t>(
        std::lower_bound(values_.begin(), values_.end(), x) - values_.begin());
  }
  // The samples >= x_min, still sorted.
  std::span<const double> tail(double x_min) const {
    return std::span<const double>(values_).subspan(lower_index(x_min));
  }

 private:
  std::vector<double> values_;
};

namespace detail {

// log of the integral of x^-alpha e^{-lambda x} over [a, inf) for lambda > 0.
// Substituting x = a e^t turns the integrand into exp(h(t)) with
// h(t) = (1 - alpha) t - lambda a (e^t - 1), which is concave; the integral is
// taken over the region where h is within 60 nats of its maximum.
inline double log_tpl_integral(double alpha, double lambda, double a) {
  if (lambda == 0.0) return (1.0 - alpha) * std::log(a) - std::log(alpha - 1.0);
  const double la = lambda * a;
  const double slope = 1.0 - alpha;
  auto h = [&](double t) { return slope * t - la * std::expm1(t); };
  const double t_peak = (slope > la) ? std::log(slope / la) : 0.0;
  const double h_peak = h(t_peak);
  constexpr double kDepth = 60.0;

  double upper = std::max(1.0, 2.0 * t_peak);
  while (h(upper) > h_peak - kDepth) upper *= 2.0;
  while (upper > t_peak + 1e-300 && h(t_peak + 0.5 * (upper - t_peak)) < h_peak - kDepth)
    upper = t_peak + 0.5 * (upper - t_peak);
  double lower = 0.0;
  if (t_peak > 0.0) {
    // h is increasing on [0, t_peak]; drop the negligible left shoulder.
    while (t_peak - lower > 1e-12 && h(lower + 0.5 * (t_peak - lower)) < h_peak - kDepth)
      lower += 0.5 * (t_peak - lower);
  }
  auto integrand = [&](double t) { return std::exp(h(t) - h_peak); };
  QuadratureResult q;
  if (t_peak > lower && t_peak < upper) {
    auto left = integrate(integrand, lower, t_peak, 1e-10, 1e-12);
    auto right = integrate(integrand, t_peak, upper, 1e-10, 1e-12);
    q.value = left.value + right.value;
  } else {
    q = integrate(integrand, lower, upper, 1e-10, 1e-12);
  }
  return slope * std::log(a) - la + h_peak + std::log(q.value);
}

}  // namespace detail

// Evaluates one spec many times. Construction validates the spec and
// computes the log normalization constant once.
class Density {
 public:
  explicit Density(const DistributionSpec& spec) : spec_(spec) {
    validate(spec);
    const double x0 = spec.x_min;
    std::visit(
        [&](const auto& p) {
          using P = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<P, PowerLawParams>) {
            log_c_ = std::log(p.alpha - 1.0) + (p.alpha - 1.0) * std::log(x0);
          } else if constexpr (std::is_same_v<P, TruncatedPowerLawParams>) {
            log_c_ = -detail::log_tpl_integral(p.alpha, p.lambda, x0);
          } else if constexpr (std::is_same_v<P, ExponentialParams>) {
            log_c_ = std::log(p.lambda);
          } else if constexpr (std::is_same_v<P, StretchedExponentialParams>) {
            log_c_ = std::log(p.beta) + p.beta * std::log(p.lambda) +
                     std::pow(p.lambda * x0, p.beta);
          } else {
            log_z0_ = detail_log_q(p, x0);
            log_c_ = -std::log(p.sigma * std::sqrt(2.0 * std::numbers::pi)) - log_z0_;
          }
        },
        spec.params);
  }

  const DistributionSpec& spec() const noexcept { return spec_; }
  double log_normalization() const noexcept { return log_c_; }

  double log_pdf(double x) const {
    check_domain(x);
    return log_pdf_unchecked(x);
  }

  double pdf(double x) const { return std::exp(log_pdf(x)); }

  // log of P(X >= x).
  double log_ccdf(double x) const {
    check_domain(x);
    const double x0 = spec_.x_min;
    return std::visit(
        [&](const auto& p) -> double {
          using P = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<P, PowerLawParams>) {
            return (1.0 - p.alpha) * std::log(x / x0);
          } else if constexpr (std::is_same_v<P, TruncatedPowerLawParams>) {
            if (x == x0) return 0.0;
            if (p.lambda == 0.0) return (1.0 - p.alpha) * std::log(x / x0);
            return detail::log_tpl_integral(p.alpha, p.lambda, x) + log_c_;
          } else if constexpr (std::is_same_v<P, ExponentialParams>) {
            return -p.lambda * (x - x0);
          } else if constexpr (std::is_same_v<P, StretchedExponentialParams>) {
            return std::pow(p.lambda * x0, p.beta) - std::pow(p.lambda * x, p.beta);
          } else {
            return detail_log_q(p, x) - log_z0_;
          }
        },
        spec_.params);
  }

  double ccdf(double x) const { return std::clamp(std::exp(log_ccdf(x)), 0.0, 1.0); }
  double cdf(double x) const { return std::clamp(-std::expm1(log_ccdf(x)), 0.0, 1.0); }

  // No domain check; x must be >= x_min.
  double log_pdf_unchecked(double x) const {
    return std::visit(
        [&](const auto& p) -> double {
          using P = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<P, PowerLawParams>) {
            return log_c_ - p.alpha * std::log(x);
          } else if constexpr (std::is_same_v<P, TruncatedPowerLawParams>) {
            return log_c_ - p.alpha * std::log(x) - p.lambda * x;
          } else if constexpr (std::is_same_v<P, ExponentialParams>) {
            return log_c_ - p.lambda * (x - spec_.x_min);
          } else if constexpr (std::is_same_v<P, StretchedExponentialParams>) {
            return log_c_ + (p.beta - 1.0) * std::log(x) - std::pow(p.lambda * x, p.beta);
          } else {
            const double z = (std::log(x) - p.mu) / p.sigma;
            return log_c_ - std::log(x) - 0.5 * z * z;
          }
        },
        spec_.params);
  }

 private:
  static double detail_log_q(const LogNormalParams& p, double x) {
    return log_normal_upper_tail((std::log(x) - p.mu) / p.sigma);
  }

  void check_domain(double x) const {
    if (!(x >= spec_.x_min) || std::isnan(x))
      throw DomainError("x = " + std::to_string(x) + " is below x_min = " +
                        std::to_string(spec_.x_min));
  }

  DistributionSpec spec_;
  double log_c_ = 0.0;
  double log_z0_ = 0.0;
};

inline double pdf(const DistributionSpec& spec, double x) { return Density(spec).pdf(x); }
inline double ccdf(const DistributionSpec& spec, double x) { return Density(spec).ccdf(x); }
inline double cdf(const DistributionSpec& spec, double x) { return Density(spec).cdf(x); }

// Sum of log densities. Throws DomainError if any sample is below x_min.
inline double loglikelihood(const DistributionSpec& spec, std::span<const double> samples) {
  const Density d(spec);
  double total = 0.0;
  for (double x : samples) total += d.log_pdf(x);
  return total;
}

// Per-point log densities, in sample order.
inline std::vector<double> log_densities(const DistributionSpec& spec,
                                         std::span<const double> samples) {
  const Density d(spec);
  std::vector<double> out;
  out.reserve(samples.size());
  for (double x : samples) out.push_back(d.log_pdf(x));
  return out;
}

namespace detail {

inline double draw_power_law(Rng& rng, double alpha, double x0) {
  return x0 * std::pow(rng.uniform(), -1.0 / (alpha - 1.0));
}

inline double draw_exponential(Rng& rng, double lambda, double x0) {
  return x0 - std::log(rng.uniform()) / lambda;
}

// Standard normal conditioned on z >= a.
inline double draw_normal_tail(Rng& rng, double a) {
  if (a < 1.0) {
    for (;;) {
      const double z = rng.normal();
      if (z >= a) return z;
    }
  }
  // Exponential proposal with the optimal rate for the cut at a.
  const double rate = 0.5 * (a + std::sqrt(a * a + 4.0));
  for (;;) {
    const double z = a - std::log(rng.uniform()) / rate;
    const double d = z - rate;
    if (rng.uniform() <= std::exp(-0.5 * d * d)) return z;
  }
}

// Marsaglia-Tsang gamma(shape, 1) for shape >= 1.
inline double draw_gamma(Rng& rng, double shape) {
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double z, v;
    do {
      z = rng.normal();
      v = 1.0 + c * z;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform();
    if (std::log(u) < 0.5 * z * z + d - d * v + d * std::log(v)) return d * v;
  }
}

inline double draw_truncated_power_law(Rng& rng, double alpha, double lambda, double x0) {
  if (lambda == 0.0) return draw_power_law(rng, alpha, x0);
  if (alpha > 1.0 && lambda * x0 < alpha - 1.0) {
    // Power-law envelope, thinned by the exponential cutoff.
    for (;;) {
      const double x = draw_power_law(rng, alpha, x0);
      if (rng.uniform() <= std::exp(-lambda * (x - x0))) return x;
    }
  }
  if (alpha >= 0.0) {
    // Exponential envelope, thinned by the power-law factor.
    for (;;) {
      const double x = draw_exponential(rng, lambda, x0);
      if (rng.uniform() <= std::pow(x / x0, -alpha)) return x;
    }
  }
  // alpha < 0: a gamma(1 - alpha, lambda) density restricted to [x0, inf).
  for (;;) {
    const double x = draw_gamma(rng, 1.0 - alpha) / lambda;
    if (x >= x0) return x;
  }
}

}  // namespace detail

// One draw from `spec`, which must already be valid. Closed-form inverse
// CDFs where available (PL, Exp, SExp); rejection otherwise.
inline double draw(const DistributionSpec& spec, Rng& rng) {
  const double x0 = spec.x_min;
  const double x = std::visit(
      [&](const auto& p) -> double {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, PowerLawParams>) {
          return detail::draw_power_law(rng, p.alpha, x0);
        } else if constexpr (std::is_same_v<P, TruncatedPowerLawParams>) {
          return detail::draw_truncated_power_law(rng, p.alpha, p.lambda, x0);
        } else if constexpr (std::is_same_v<P, ExponentialParams>) {
          return detail::draw_exponential(rng, p.lambda, x0);
        } else if constexpr (std::is_same_v<P, StretchedExponentialParams>) {
          const double s = std::pow(p.lambda * x0, p.beta) - std::log(rng.uniform());
          return std::pow(s, 1.0 / p.beta) / p.lambda;
        } else {
          const double a = (std::log(x0) - p.mu) / p.sigma;
          return std::exp(p.mu + p.sigma * detail::draw_normal_tail(rng, a));
        }
      },
      spec.params);
  return std::max(x, x0);
}

// n independent draws in generation order, reproducible from `seed`.
inline std::vector<double> sample(const DistributionSpec& spec, std::size_t n, std::uint64_t seed) {
  validate(spec);
  if (n == 0) throw DomainError("sample count must be at least 1");
  Rng rng(seed);
  std::vector<double> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(draw(spec, rng));
  return out;
}

}  // namespace ibfit
