#pragma once

#include <nlohmann/json.hpp>

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "ibfit/calendar.hpp"
#include "ibfit/distributions.hpp"
#include "ibfit/error.hpp"
#include "ibfit/ingestion.hpp"
#include "ibfit/model_selection.hpp"
#include "ibfit/network.hpp"
#include "ibfit/parallel.hpp"
#include "ibfit/synthgen.hpp"
#include "ibfit/tail_selection.hpp"

namespace ibfit {

// Loans split into bins with their network views, plus balance sheets.
struct Dataset {
  Granularity granularity = Granularity::Month;
  std::vector<NetworkViews> bins;  // chronological
  std::vector<BalanceSheetRecord> balances;
  bool has_balances = false;
};

inline Dataset make_dataset(std::span<const LoanRecord> loans, Granularity g,
                            std::optional<std::vector<BalanceSheetRecord>> balances = {}) {
  Dataset d;
  d.granularity = g;
  for (const auto& [bin, records] : bin_records(loans, g))
    d.bins.push_back(build_networks(records, bin));
  if (balances) {
    d.balances = std::move(*balances);
    d.has_balances = true;
  }
  return d;
}

// Verdict for one measure in one bin (or one bootstrap replicate).
struct BinRow {
  TimeBin bin;
  std::size_t n = 0;
  std::optional<TailSelection> tail;
  RankingReport ranking;
  bool inconclusive = false;
  std::string note;
};

struct ParameterStats {
  double mean = 0.0;
  double sd = 0.0;
  std::size_t count = 0;
};

struct KindSummary {
  std::size_t best_count = 0;
  std::size_t alternate_count = 0;
  double best_pct = 0.0;
  double alternate_pct = 0.0;
  std::vector<ParameterStats> parameters;  // over conclusive rows with a converged fit
};

struct ScanSummary {
  std::size_t rows = 0;
  std::size_t conclusive = 0;
  std::size_t excluded = 0;  // inconclusive rows, left out of every percentage
  std::array<KindSummary, kNumKinds> kinds;
  std::optional<DistributionKind> modal_best;
  ParameterStats tail_fraction;  // tail regime only
};

struct ScanReport {
  Measure measure = Measure::LoanSize;
  Granularity granularity = Granularity::Month;
  Regime regime = Regime::Tail;
  RankingOptions options;
  std::vector<BinRow> rows;
  ScanSummary summary;
};

// Tail regime: KS cut-off then ranking at it. Full range: ranking at the
// smallest value.
inline BinRow analyse_series(const MeasureSeries& series, Regime regime,
                             const RankingOptions& opts) {
  BinRow row;
  row.bin = series.bin;
  row.n = series.values.size();
  if (row.n < std::max<std::size_t>(opts.min_tail, 2)) {
    row.inconclusive = true;
    row.note = "fewer than " + std::to_string(opts.min_tail) + " values";
    return row;
  }
  const SortedSample sample(series.values);
  if (regime == Regime::Tail) {
    try {
      row.tail = select_xmin(sample, opts.min_tail);
    } catch (const InconclusiveError& e) {
      row.inconclusive = true;
      row.note = e.what();
      return row;
    }
    row.ranking = rank_candidates(sample, row.tail->x_min_hat, opts, Regime::Tail);
  } else {
    row.ranking = fit_full_range(sample, opts);
  }
  if (row.ranking.inconclusive) {
    row.inconclusive = true;
    row.note = "fewer than two candidate fits succeeded";
  }
  return row;
}

namespace detail {

inline ParameterStats stats_of(const std::vector<double>& v) {
  ParameterStats s;
  s.count = v.size();
  if (v.empty()) return s;
  for (double x : v) s.mean += x;
  s.mean /= static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    s.sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  return s;
}

}  // namespace detail

// Tallies over conclusive rows only; inconclusive rows are counted in
// `excluded`. The modal kind is the one most often best (ties go to the
// earlier kind in column order).
inline ScanSummary summarize(std::span<const BinRow> rows) {
  ScanSummary s;
  s.rows = rows.size();
  std::array<std::vector<std::vector<double>>, kNumKinds> params;
  for (auto k : kAllKinds) params[index_of(k)].resize(parameter_names(k).size());
  std::vector<double> fractions;
  for (const auto& row : rows) {
    if (row.inconclusive) {
      ++s.excluded;
      continue;
    }
    ++s.conclusive;
    if (row.tail) fractions.push_back(row.tail->tail_fraction);
    if (row.ranking.best) ++s.kinds[index_of(*row.ranking.best)].best_count;
    for (auto k : row.ranking.alternates) ++s.kinds[index_of(k)].alternate_count;
    for (auto k : kAllKinds) {
      const auto& fit = row.ranking.fits[index_of(k)];
      if (!fit || !fit->converged) continue;
      const auto v = fit->spec.values();
      for (std::size_t p = 0; p < v.size(); ++p) params[index_of(k)][p].push_back(v[p]);
    }
  }
  for (auto k : kAllKinds) {
    auto& ks = s.kinds[index_of(k)];
    if (s.conclusive) {
      ks.best_pct = 100.0 * static_cast<double>(ks.best_count) / static_cast<double>(s.conclusive);
      ks.alternate_pct =
          100.0 * static_cast<double>(ks.alternate_count) / static_cast<double>(s.conclusive);
    }
    for (const auto& p : params[index_of(k)]) ks.parameters.push_back(detail::stats_of(p));
    if (ks.best_count > 0 &&
        (!s.modal_best || ks.best_count > s.kinds[index_of(*s.modal_best)].best_count))
      s.modal_best = k;
  }
  s.tail_fraction = detail::stats_of(fractions);
  return s;
}

// One report per (measure, regime); bins and measures are fanned out over
// `workers` threads and reassembled in bin order.
inline std::vector<ScanReport> scan(const Dataset& data, std::span<const Measure> measures,
                                    std::span<const Regime> regimes, const RankingOptions& opts,
                                    std::size_t workers) {
  for (auto m : measures)
    if (is_nodal_attribute(m) && !data.has_balances)
      throw ValidationError(std::string(to_string(m)) + " needs a balance-sheet file");

  std::vector<ScanReport> reports;
  for (auto m : measures) {
    for (auto r : regimes) {
      ScanReport rep;
      rep.measure = m;
      rep.granularity = data.granularity;
      rep.regime = r;
      rep.options = opts;
      rep.rows.resize(data.bins.size());
      reports.push_back(std::move(rep));
    }
  }
  const std::size_t per_report = data.bins.size();
  parallel_for(reports.size() * per_report, workers, [&](std::size_t task) {
    auto& rep = reports[task / per_report];
    const auto& views = data.bins[task % per_report];
    const MeasureSeries series = measure_series(rep.measure, views, data.balances);
    rep.rows[task % per_report] = analyse_series(series, rep.regime, opts);
  });
  for (auto& rep : reports) rep.summary = summarize(rep.rows);
  return reports;
}

// ---------------------------------------------------------------------------
// Serialization

namespace detail {

inline std::string num(double v) {
  if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
  return format_number(v);
}

inline nlohmann::json num_json(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

inline std::string kinds_joined(const std::vector<DistributionKind>& ks) {
  std::string out;
  for (auto k : ks) {
    if (!out.empty()) out += ';';
    out += short_name(k);
  }
  return out;
}

inline std::string row_csv_header(std::string_view first_column) {
  std::string h(first_column);
  h += ",start,end,n,inconclusive,x_min,alpha_hat,ks_z,n_tail,tail_fraction";
  for (auto k : kAllKinds)
    for (auto p : parameter_names(k)) h += "," + std::string(short_name(k)) + "_" + std::string(p);
  for (auto k : kAllKinds) h += ",g_" + std::string(short_name(k));
  h += ",best,alternates\n";
  return h;
}

inline std::string row_csv(const std::string& key, const BinRow& row) {
  std::ostringstream o;
  o << key << ',' << format_date(row.bin.start) << ',' << format_date(row.bin.end) << ','
    << row.n << ',' << (row.inconclusive ? 1 : 0) << ',';
  if (row.tail) {
    o << num(row.tail->x_min_hat) << ',' << num(row.tail->alpha_hat) << ',' << num(row.tail->z)
      << ',' << row.tail->n_tail << ',' << num(row.tail->tail_fraction);
  } else if (!row.inconclusive) {
    o << num(row.ranking.x_min) << ",,," << row.ranking.n_tail << ",1";
  } else {
    o << ",,,,";
  }
  for (auto k : kAllKinds) {
    const auto& fit = row.ranking.fits[index_of(k)];
    const auto names = parameter_names(k);
    for (std::size_t p = 0; p < names.size(); ++p) {
      o << ',';
      if (fit && fit->converged) o << num(fit->spec.values()[p]);
    }
  }
  for (auto k : kAllKinds) {
    o << ',';
    if (const auto& g = row.ranking.g_scores[index_of(k)]) o << num(*g);
  }
  o << ',' << (row.ranking.best ? std::string(short_name(*row.ranking.best)) : std::string())
    << ',' << kinds_joined(row.ranking.alternates) << '\n';
  return o.str();
}

inline nlohmann::json row_json(const BinRow& row) {
  using nlohmann::json;
  json j;
  j["bin"] = row.bin.label();
  j["start"] = format_date(row.bin.start);
  j["end"] = format_date(row.bin.end);
  j["n"] = row.n;
  j["inconclusive"] = row.inconclusive;
  if (!row.note.empty()) j["note"] = row.note;
  if (row.tail) {
    j["tail"] = {{"x_min", num_json(row.tail->x_min_hat)},
                 {"alpha", num_json(row.tail->alpha_hat)},
                 {"ks_z", num_json(row.tail->z)},
                 {"n_tail", row.tail->n_tail},
                 {"tail_fraction", num_json(row.tail->tail_fraction)}};
  }
  if (row.inconclusive && row.ranking.n_tail == 0) return j;
  j["x_min"] = num_json(row.ranking.x_min);
  j["n_fit"] = row.ranking.n_tail;
  json fits = json::object();
  for (auto k : kAllKinds) {
    const auto i = index_of(k);
    json f = json::object();
    if (const auto& fit = row.ranking.fits[i]) {
      const auto names = parameter_names(k);
      const auto v = fit->spec.values();
      for (std::size_t p = 0; p < names.size(); ++p) f[std::string(names[p])] = num_json(v[p]);
      f["loglik"] = num_json(fit->loglik);
      f["converged"] = fit->converged;
    }
    if (!row.ranking.fit_errors[i].empty()) f["error"] = row.ranking.fit_errors[i];
    if (const auto& g = row.ranking.g_scores[i]) f["g"] = num_json(*g);
    fits[std::string(short_name(k))] = f;
  }
  j["fits"] = fits;
  json pairs = json::array();
  for (const auto& p : row.ranking.pairs)
    pairs.push_back({{"first", short_name(p.first)},
                     {"second", short_name(p.second)},
                     {"R", num_json(p.r_norm)},
                     {"sigma12", num_json(p.sigma12)},
                     {"p", num_json(p.p_value)}});
  j["pairs"] = pairs;
  j["best"] = row.ranking.best ? json(short_name(*row.ranking.best)) : json(nullptr);
  json alts = json::array();
  for (auto k : row.ranking.alternates) alts.push_back(short_name(k));
  j["alternates"] = alts;
  j["flagged"] = row.ranking.flagged;
  return j;
}

inline nlohmann::json summary_json(const ScanSummary& s, bool with_tail_fraction) {
  using nlohmann::json;
  json j;
  j["rows"] = s.rows;
  j["conclusive"] = s.conclusive;
  j["excluded_inconclusive"] = s.excluded;
  j["modal_best"] = s.modal_best ? json(short_name(*s.modal_best)) : json(nullptr);
  json kinds = json::object();
  for (auto k : kAllKinds) {
    const auto& ks = s.kinds[index_of(k)];
    json params = json::object();
    const auto names = parameter_names(k);
    for (std::size_t p = 0; p < names.size() && p < ks.parameters.size(); ++p)
      params[std::string(names[p])] = {{"mean", num_json(ks.parameters[p].mean)},
                                       {"sd", num_json(ks.parameters[p].sd)},
                                       {"count", ks.parameters[p].count}};
    kinds[std::string(short_name(k))] = {{"best_count", ks.best_count},
                                         {"best_pct", num_json(ks.best_pct)},
                                         {"alternate_count", ks.alternate_count},
                                         {"alternate_pct", num_json(ks.alternate_pct)},
                                         {"parameters", params}};
  }
  j["kinds"] = kinds;
  if (with_tail_fraction)
    j["tail_fraction"] = {{"mean", num_json(s.tail_fraction.mean)},
                          {"sd", num_json(s.tail_fraction.sd)},
                          {"count", s.tail_fraction.count}};
  return j;
}

inline std::string summary_csv(const ScanSummary& s) {
  std::ostringstream o;
  o << "kind,best_count,best_pct,alternate_count,alternate_pct,parameter,mean,sd,count\n";
  for (auto k : kAllKinds) {
    const auto& ks = s.kinds[index_of(k)];
    const auto names = parameter_names(k);
    for (std::size_t p = 0; p < names.size(); ++p) {
      const ParameterStats ps = p < ks.parameters.size() ? ks.parameters[p] : ParameterStats{};
      o << short_name(k) << ',' << ks.best_count << ',' << num(ks.best_pct) << ','
        << ks.alternate_count << ',' << num(ks.alternate_pct) << ',' << names[p] << ','
        << num(ps.mean) << ',' << num(ps.sd) << ',' << ps.count << '\n';
    }
  }
  o << "# conclusive=" << s.conclusive << " excluded=" << s.excluded << " modal_best="
    << (s.modal_best ? std::string(short_name(*s.modal_best)) : std::string("none"));
  if (s.tail_fraction.count)
    o << " tail_fraction_mean=" << num(s.tail_fraction.mean)
      << " tail_fraction_sd=" << num(s.tail_fraction.sd);
  o << '\n';
  return o.str();
}

}  // namespace detail

inline std::string scan_csv(const ScanReport& r) {
  std::string out = detail::row_csv_header("bin");
  for (const auto& row : r.rows) out += detail::row_csv(row.bin.label(), row);
  return out;
}

inline std::string scan_summary_csv(const ScanReport& r) { return detail::summary_csv(r.summary); }

inline std::string scan_json(const ScanReport& r) {
  nlohmann::json j;
  j["measure"] = to_string(r.measure);
  j["granularity"] = to_string(r.granularity);
  j["regime"] = to_string(r.regime);
  j["level"] = r.options.level;
  j["min_tail"] = r.options.min_tail;
  j["likelihood"] = "continuous";
  j["discrete_measure"] = is_discrete(r.measure);
  nlohmann::json bins = nlohmann::json::array();
  for (const auto& row : r.rows) bins.push_back(detail::row_json(row));
  j["bins"] = bins;
  j["summary"] = detail::summary_json(r.summary, r.regime == Regime::Tail);
  return j.dump(2) + "\n";
}

inline std::string report_basename(const ScanReport& r) {
  return std::string(to_string(r.measure)) + "_" + to_string(r.regime) + "_" +
         to_string(r.granularity);
}

// ---------------------------------------------------------------------------
// Network time series

struct NetworkStatsRow {
  TimeBin bin;
  std::size_t n_banks = 0;
  std::size_t n_loans = 0;
  double clustering = 0.0;     // on the largest connected component
  double shortest_path = 0.0;  // on the largest connected component
  std::size_t lcc_size = 0;
};

inline NetworkStatsRow network_stats(const NetworkViews& v) {
  NetworkStatsRow row;
  row.bin = v.bin;
  row.n_banks = v.node_count();
  row.n_loans = v.multi_edges.size();
  if (v.empty()) return row;
  const NetworkViews lcc = largest_connected_component(v);
  row.lcc_size = lcc.node_count();
  row.clustering = avg_clustering(lcc);
  row.shortest_path = lcc.node_count() >= 2 ? avg_shortest_path(lcc) : 0.0;
  return row;
}

inline std::vector<NetworkStatsRow> network_stats(const Dataset& data, std::size_t workers) {
  std::vector<NetworkStatsRow> rows(data.bins.size());
  parallel_for(rows.size(), workers, [&](std::size_t i) { rows[i] = network_stats(data.bins[i]); });
  return rows;
}

inline std::string network_stats_csv(std::span<const NetworkStatsRow> rows) {
  std::ostringstream o;
  o << "bin,start,end,n_banks,n_loans,avg_clustering,avg_shortest_path,lcc_size\n";
  for (const auto& r : rows)
    o << r.bin.label() << ',' << format_date(r.bin.start) << ',' << format_date(r.bin.end) << ','
      << r.n_banks << ',' << r.n_loans << ',' << detail::num(r.clustering) << ','
      << detail::num(r.shortest_path) << ',' << r.lcc_size << '\n';
  return o.str();
}

// ---------------------------------------------------------------------------
// Bootstrap

inline constexpr std::size_t kDefaultBootstrapReps = 1000;

struct BootstrapReport {
  Measure measure = Measure::LoanSize;
  Regime regime = Regime::Tail;
  RankingOptions options;
  std::uint64_t seed = 0;
  BinRow original;
  std::vector<BinRow> replicates;
  ScanSummary summary;  // over the replicates
};

// Re-runs the full verdict on n_reps resamples of one bin's series. Throws
// InconclusiveError if the original series is itself inconclusive.
inline BootstrapReport bootstrap(const MeasureSeries& series, Regime regime, std::size_t n_reps,
                                 std::uint64_t seed, const RankingOptions& opts,
                                 std::size_t workers) {
  BootstrapReport rep;
  rep.measure = series.measure;
  rep.regime = regime;
  rep.options = opts;
  rep.seed = seed;
  rep.original = analyse_series(series, regime, opts);
  if (rep.original.inconclusive)
    throw InconclusiveError("bin " + series.bin.label() + " is inconclusive for " +
                            std::string(to_string(series.measure)) + ": " + rep.original.note);
  const auto samples = bootstrap_resample(series, n_reps, seed);
  rep.replicates.resize(samples.size());
  parallel_for(samples.size(), workers, [&](std::size_t i) {
    rep.replicates[i] = analyse_series(samples[i], regime, opts);
  });
  rep.summary = summarize(rep.replicates);
  return rep;
}

inline std::string bootstrap_csv(const BootstrapReport& r) {
  std::string out = detail::row_csv_header("replicate");
  out += detail::row_csv("original", r.original);
  for (std::size_t i = 0; i < r.replicates.size(); ++i)
    out += detail::row_csv(std::to_string(i), r.replicates[i]);
  return out;
}

inline std::string bootstrap_json(const BootstrapReport& r) {
  nlohmann::json j;
  j["measure"] = to_string(r.measure);
  j["bin"] = r.original.bin.label();
  j["granularity"] = to_string(r.original.bin.granularity);
  j["regime"] = to_string(r.regime);
  j["level"] = r.options.level;
  j["min_tail"] = r.options.min_tail;
  j["likelihood"] = "continuous";
  j["discrete_measure"] = is_discrete(r.measure);
  j["replicates"] = r.replicates.size();
  j["seed"] = r.seed;
  j["original"] = detail::row_json(r.original);
  j["summary"] = detail::summary_json(r.summary, r.regime == Regime::Tail);
  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// File-level drivers used by the command-line tool

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("write failed for " + path.string());
}

inline Dataset load_dataset(const std::string& loans_path,
                            const std::optional<std::string>& balances_path, Granularity g,
                            std::ostream* warnings = nullptr) {
  const auto parsed = load_loans(loans_path);
  if (warnings) {
    for (const auto& r : parsed.rejected)
      *warnings << loans_path << ": line " << r.line << ": rejected: " << r.reason << '\n';
    if (parsed.dropped_long_term)
      *warnings << loans_path << ": dropped " << parsed.dropped_long_term
                << " loan(s) with maturity over " << kMaxMaturityDays << " days\n";
  }
  if (parsed.loans.empty()) throw InconclusiveError("no usable loans in " + loans_path);
  std::optional<std::vector<BalanceSheetRecord>> balances;
  if (balances_path) balances = load_balance_sheets(*balances_path);
  return make_dataset(parsed.loans, g, std::move(balances));
}

}  // namespace ibfit
