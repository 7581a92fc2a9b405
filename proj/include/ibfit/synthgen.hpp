#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "ibfit/calendar.hpp"
#include "ibfit/distributions.hpp"
#include "ibfit/error.hpp"
#include "ibfit/ingestion.hpp"
#include "ibfit/network.hpp"
#include "ibfit/random.hpp"

namespace ibfit {

// Scales the number of active banks and of loans over an inclusive range of
// bin indices (growth or crisis phases).
struct RegimePhase {
  std::size_t first_bin = 0;
  std::size_t last_bin = 0;
  double bank_scale = 1.0;
  double loan_scale = 1.0;
};

// Synthetic market. Every bank gets a fixed activity propensity drawn from
// `activity_law`; in every bin `loans_per_bin` loans are issued, issuer and
// receiver each picked with probability proportional to propensity (a
// multinomial split of the bin's loans over banks), sizes drawn from
// `loan_size_law`.
struct MarketConfig {
  std::size_t n_banks = 100;
  std::size_t n_bins = 12;
  Granularity granularity = Granularity::Month;
  Date start = Date{std::chrono::year{2000} / 1 / 1};
  std::size_t loans_per_bin = 1000;
  DistributionSpec loan_size_law = DistributionSpec::log_normal(2.54, 1.27, 1e-6);
  DistributionSpec activity_law = DistributionSpec::log_normal(0.0, 1.2, 1e-6);
  std::uint64_t seed = 1;
  std::vector<RegimePhase> regime_schedule;
};

inline void validate(const MarketConfig& c) {
  if (c.n_banks < 2) throw ValidationError("n_banks: at least two banks are required");
  if (c.n_bins < 1) throw ValidationError("bins: at least one bin is required");
  try {
    validate(c.loan_size_law);
  } catch (const ParameterError& e) {
    throw ValidationError(std::string("loan_size: ") + e.what());
  }
  try {
    validate(c.activity_law);
  } catch (const ParameterError& e) {
    throw ValidationError(std::string("activity: ") + e.what());
  }
  for (const auto& r : c.regime_schedule) {
    if (r.first_bin > r.last_bin) throw ValidationError("regime: first bin after last bin");
    if (!(r.bank_scale > 0.0) || !(r.loan_scale >= 0.0))
      throw ValidationError("regime: scales must be positive");
  }
}

// Bin `index` of the configured series.
inline TimeBin market_bin(const MarketConfig& c, std::size_t index) {
  TimeBin b = bin_of(c.start, c.granularity);
  for (std::size_t i = 0; i < index; ++i) b = next_bin(b);
  return b;
}

inline std::string bank_name(std::size_t i, std::size_t n_banks) {
  std::size_t width = 1;
  for (std::size_t m = n_banks - 1; m >= 10; m /= 10) ++width;
  std::string digits = std::to_string(i);
  return "B" + std::string(width - std::min(width, digits.size()), '0') + digits;
}

// Number of active banks and loans in bin `index` after the regime schedule.
inline std::pair<std::size_t, std::size_t> bin_activity(const MarketConfig& c, std::size_t index) {
  double banks = static_cast<double>(c.n_banks);
  double loans = static_cast<double>(c.loans_per_bin);
  for (const auto& r : c.regime_schedule) {
    if (index < r.first_bin || index > r.last_bin) continue;
    banks *= r.bank_scale;
    loans *= r.loan_scale;
  }
  const auto active = std::clamp<std::size_t>(static_cast<std::size_t>(std::llround(banks)), 2,
                                              c.n_banks);
  return {active, static_cast<std::size_t>(std::llround(loans))};
}

// Generates the loan stream bin by bin. Each bin draws from its own stream
// derived from the seed, so the output does not depend on evaluation order.
inline std::vector<LoanRecord> generate_market(const MarketConfig& c) {
  validate(c);
  Rng propensity_rng(derive_seed(c.seed, 0));
  std::vector<double> weight(c.n_banks);
  for (auto& w : weight) w = draw(c.activity_law, propensity_rng);
  std::vector<BankId> names(c.n_banks);
  for (std::size_t i = 0; i < c.n_banks; ++i) names[i] = bank_name(i, c.n_banks);

  std::vector<LoanRecord> out;
  TimeBin bin = bin_of(c.start, c.granularity);
  for (std::size_t b = 0; b < c.n_bins; ++b, bin = next_bin(bin)) {
    Rng rng(derive_seed(c.seed, b + 1));
    const auto [active, n_loans] = bin_activity(c, b);
    std::vector<double> cumulative(active);
    std::partial_sum(weight.begin(), weight.begin() + static_cast<std::ptrdiff_t>(active),
                     cumulative.begin());
    const double total = cumulative.back();
    auto pick = [&](double u) {
      const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
      return std::min<std::size_t>(static_cast<std::size_t>(it - cumulative.begin()), active - 1);
    };

    std::vector<LoanRecord> loans;
    loans.reserve(n_loans);
    for (std::size_t k = 0; k < n_loans; ++k) {
      const std::size_t issuer = pick(rng.uniform() * total);
      // Receiver proportional to propensity among the other banks: draw on
      // the mass with the issuer's share cut out.
      double u = rng.uniform() * (total - weight[issuer]);
      const double issuer_lo = cumulative[issuer] - weight[issuer];
      if (u >= issuer_lo) u += weight[issuer];
      std::size_t receiver = pick(u);
      if (receiver == issuer) receiver = issuer + 1 < active ? issuer + 1 : issuer - 1;

      LoanRecord r;
      r.issuer = names[issuer];
      r.receiver = names[receiver];
      r.size = draw(c.loan_size_law, rng);
      r.interest_rate = std::round(rng.uniform(2.0, 12.0) * 100.0) / 100.0;
      r.reporting_date = bin.start + std::chrono::days{static_cast<int>(
                                         rng.below(static_cast<std::uint64_t>(bin.days())))};
      r.maturity_date = r.reporting_date + std::chrono::days{rng.uniform() < 0.7 ? 1 : 7};
      loans.push_back(std::move(r));
    }
    std::stable_sort(loans.begin(), loans.end(), [](const auto& a, const auto& b) {
      return a.reporting_date < b.reporting_date;
    });
    for (auto& l : loans) out.push_back(std::move(l));
  }
  return out;
}

// n_reps resamples of the series, each the original length, drawn
// uniformly with replacement. Replicate r uses its own derived stream.
inline std::vector<MeasureSeries> bootstrap_resample(const MeasureSeries& series,
                                                     std::size_t n_reps, std::uint64_t seed) {
  if (series.values.empty()) throw DomainError("cannot bootstrap an empty series");
  if (n_reps < 1) throw DomainError("at least one replicate is required");
  std::vector<MeasureSeries> out;
  out.reserve(n_reps);
  const std::size_t n = series.values.size();
  for (std::size_t r = 0; r < n_reps; ++r) {
    Rng rng(derive_seed(seed, r));
    MeasureSeries rep{series.measure, {}, series.bin};
    rep.values.reserve(n);
    for (std::size_t i = 0; i < n; ++i) rep.values.push_back(series.values[rng.below(n)]);
    out.push_back(std::move(rep));
  }
  return out;
}

namespace detail {

inline std::string_view strip(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> words(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

// "<kind> key=value ...", e.g. "lognormal mu=2.54 sigma=1.27 xmin=0.001".
inline DistributionSpec parse_law(std::string_view field, std::string_view text) {
  const auto w = words(text);
  auto fail = [&](const std::string& why) -> DistributionSpec {
    throw ValidationError(std::string(field) + ": " + why);
  };
  if (w.empty()) return fail("missing distribution");
  const auto kind = parse_kind(w[0]);
  if (!kind) return fail("unknown distribution '" + std::string(w[0]) + "'");
  std::map<std::string, double, std::less<>> kv;
  for (std::size_t i = 1; i < w.size(); ++i) {
    const auto eq = w[i].find('=');
    double v;
    if (eq == std::string_view::npos || !parse_double(w[i].substr(eq + 1), v))
      return fail("expected key=number, got '" + std::string(w[i]) + "'");
    kv[std::string(w[i].substr(0, eq))] = v;
  }
  const double x_min = kv.count("xmin") ? kv["xmin"] : 1.0;
  std::vector<double> values;
  for (auto name : parameter_names(*kind)) {
    const auto it = kv.find(name);
    if (it == kv.end()) return fail("missing parameter '" + std::string(name) + "'");
    values.push_back(it->second);
  }
  const std::size_t known = values.size() + kv.count("xmin");
  if (known != kv.size()) return fail("unexpected parameter");
  DistributionSpec spec = make_spec(*kind, values, x_min);
  try {
    validate(spec);
  } catch (const ParameterError& e) {
    return fail(e.what());
  }
  return spec;
}

}  // namespace detail

// Flat "key = value" config; '#' starts a comment. Recognised keys:
// n_banks, bins, granularity, start, loans_per_bin, loan_size, activity,
// seed, and any number of "regime = <first>-<last> <bank_scale> <loan_scale>".
inline MarketConfig parse_market_config(std::istream& in) {
  MarketConfig c;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string_view s = raw;
    if (const auto hash = s.find('#'); hash != std::string_view::npos) s = s.substr(0, hash);
    s = detail::strip(s);
    if (s.empty()) continue;
    const auto eq = s.find('=');
    if (eq == std::string_view::npos) throw ParseError("expected key = value", line);
    const std::string key(detail::strip(s.substr(0, eq)));
    const std::string_view value = detail::strip(s.substr(eq + 1));
    auto count = [&](std::string_view v) {
      std::uint64_t n = 0;
      const auto* end = v.data() + v.size();
      auto [ptr, ec] = std::from_chars(v.data(), end, n);
      if (v.empty() || ec != std::errc{} || ptr != end)
        throw ValidationError(key + ": expected a non-negative integer, got '" + std::string(v) + "'");
      return n;
    };
    if (key == "n_banks") {
      c.n_banks = static_cast<std::size_t>(count(value));
    } else if (key == "bins") {
      c.n_bins = static_cast<std::size_t>(count(value));
    } else if (key == "loans_per_bin") {
      c.loans_per_bin = static_cast<std::size_t>(count(value));
    } else if (key == "seed") {
      c.seed = count(value);
    } else if (key == "granularity") {
      const auto g = parse_granularity(value);
      if (!g) throw ValidationError("granularity: expected week, month, quarter or year");
      c.granularity = *g;
    } else if (key == "start") {
      const auto d = parse_date(value);
      if (!d) throw ValidationError("start: expected YYYY-MM-DD");
      c.start = *d;
    } else if (key == "loan_size") {
      c.loan_size_law = detail::parse_law(key, value);
    } else if (key == "activity") {
      c.activity_law = detail::parse_law(key, value);
    } else if (key == "regime") {
      const auto w = detail::words(value);
      const auto dash = w.empty() ? std::string_view::npos : w[0].find('-');
      RegimePhase r;
      if (w.size() != 3 || dash == std::string_view::npos ||
          !detail::parse_double(w[1], r.bank_scale) || !detail::parse_double(w[2], r.loan_scale))
        throw ValidationError("regime: expected '<first>-<last> <bank_scale> <loan_scale>'");
      r.first_bin = static_cast<std::size_t>(count(w[0].substr(0, dash)));
      r.last_bin = static_cast<std::size_t>(count(w[0].substr(dash + 1)));
      c.regime_schedule.push_back(r);
    } else {
      throw ValidationError("unknown key '" + key + "'");
    }
  }
  validate(c);
  return c;
}

}  // namespace ibfit
