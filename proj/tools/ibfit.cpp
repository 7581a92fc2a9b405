// ibfit: per-bin distribution scans of interbank loan data.
//
//   ibfit scan --loans loans.csv [--balances bs.csv] --measures all --regime both
//   ibfit network-stats --loans loans.csv --granularity month
//   ibfit bootstrap --loans loans.csv --measure loan_size --bin 2003-04
//   ibfit synth --config market.cfg --out loans.csv

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ibfit/ibfit.hpp"

namespace fs = std::filesystem;
using namespace ibfit;

namespace {

enum ExitCode : int {
  kOk = 0,
  kIoError = 1,
  kParseFailure = 2,
  kValidationFailure = 3,
  kInconclusive = 4,
};

struct Common {
  std::string loans;
  std::string balances;
  std::string granularity = "month";
  std::string out = ".";
  std::size_t workers = 0;

  Granularity gran() const {
    const auto g = parse_granularity(granularity);
    if (!g) throw ValidationError("--granularity: unknown value '" + granularity + "'");
    return *g;
  }
  std::size_t threads() const { return workers ? workers : default_workers(); }
  std::optional<std::string> balances_path() const {
    return balances.empty() ? std::nullopt : std::optional(balances);
  }
};

std::vector<Regime> parse_regimes(const std::string& s) {
  if (s == "tail") return {Regime::Tail};
  if (s == "full") return {Regime::FullRange};
  if (s == "both") return {Regime::Tail, Regime::FullRange};
  throw ValidationError("--regime: expected tail, full or both, got '" + s + "'");
}

// "all" means every measure the inputs can support.
std::vector<Measure> parse_measures(const std::string& s, bool have_balances) {
  std::vector<Measure> out;
  if (s == "all") {
    for (auto m : kAllMeasures)
      if (have_balances || !is_nodal_attribute(m)) out.push_back(m);
    return out;
  }
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto m = parse_measure(item);
    if (!m) throw ValidationError("--measures: unknown measure '" + item + "'");
    out.push_back(*m);
  }
  if (out.empty()) throw ValidationError("--measures: empty list");
  return out;
}

RankingOptions ranking_options(double level, std::size_t min_tail) {
  if (!(level > 0.0 && level < 1.0)) throw ValidationError("--level must lie in (0, 1)");
  if (min_tail < 2) throw ValidationError("--min-tail must be at least 2");
  RankingOptions o;
  o.level = level;
  o.min_tail = min_tail;
  return o;
}

int run_scan(const Common& c, const std::string& measures, const std::string& regime,
             double level, std::size_t min_tail) {
  const auto regimes = parse_regimes(regime);
  const auto opts = ranking_options(level, min_tail);
  const Dataset data = load_dataset(c.loans, c.balances_path(), c.gran(), &std::cerr);
  const auto ms = parse_measures(measures, data.has_balances);
  const auto reports = scan(data, ms, regimes, opts, c.threads());

  int status = kOk;
  for (const auto& r : reports) {
    const fs::path base = fs::path(c.out) / report_basename(r);
    write_file(base.string() + ".csv", scan_csv(r));
    write_file(base.string() + "_summary.csv", scan_summary_csv(r));
    write_file(base.string() + ".json", scan_json(r));
    std::cout << base.string() << ": " << r.summary.conclusive << " conclusive, "
              << r.summary.excluded << " excluded, modal best "
              << (r.summary.modal_best ? short_name(*r.summary.modal_best) : "none") << '\n';
    if (r.summary.conclusive == 0) {
      std::cerr << "ibfit: " << to_string(r.measure) << " (" << to_string(r.regime)
                << "): no conclusive bins\n";
      status = kInconclusive;
    }
  }
  return status;
}

int run_network_stats(const Common& c) {
  const Dataset data = load_dataset(c.loans, std::nullopt, c.gran(), &std::cerr);
  const auto rows = network_stats(data, c.threads());
  const fs::path path = fs::path(c.out) / ("network_stats_" + std::string(to_string(data.granularity)) + ".csv");
  write_file(path.string(), network_stats_csv(rows));
  std::cout << path.string() << ": " << rows.size() << " bins\n";
  return kOk;
}

int run_bootstrap(const Common& c, const std::string& measure, const std::string& bin_text,
                  const std::string& regime, std::size_t reps, std::uint64_t seed, double level,
                  std::size_t min_tail) {
  const auto m = parse_measure(measure);
  if (!m) throw ValidationError("--measure: unknown measure '" + measure + "'");
  const auto regimes = parse_regimes(regime);
  if (regimes.size() != 1) throw ValidationError("--regime: bootstrap takes tail or full");
  if (reps < 1) throw ValidationError("--reps must be at least 1");
  const auto opts = ranking_options(level, min_tail);
  const Granularity g = c.gran();
  const auto bin = parse_bin(bin_text, g);
  if (!bin) throw ValidationError("--bin: cannot read '" + bin_text + "'");
  const Dataset data = load_dataset(c.loans, c.balances_path(), g, &std::cerr);
  if (is_nodal_attribute(*m) && !data.has_balances)
    throw ValidationError(std::string(to_string(*m)) + " needs a balance-sheet file");

  const NetworkViews* views = nullptr;
  for (const auto& v : data.bins)
    if (v.bin == *bin) views = &v;
  if (!views) throw InconclusiveError("no loans in bin " + bin->label());
  const auto series = measure_series(*m, *views, data.balances);
  const auto report = bootstrap(series, regimes[0], reps, seed, opts, c.threads());

  const fs::path base = fs::path(c.out) / ("bootstrap_" + std::string(to_string(*m)) + "_" +
                                           to_string(regimes[0]) + "_" + bin->label());
  write_file(base.string() + ".csv", bootstrap_csv(report));
  write_file(base.string() + ".json", bootstrap_json(report));
  std::cout << base.string() << ": original best "
            << (report.original.ranking.best ? short_name(*report.original.ranking.best) : "none")
            << ", modal best "
            << (report.summary.modal_best ? short_name(*report.summary.modal_best) : "none")
            << " over " << report.summary.conclusive << " conclusive replicates\n";
  return kOk;
}

int run_synth(const std::string& config, const std::string& out) {
  std::istringstream in(read_text_file(config));
  MarketConfig cfg;
  try {
    cfg = parse_market_config(in);
  } catch (const ParseError& e) {
    throw ParseError(config + ": " + e.detail(), e.line());
  } catch (const ValidationError& e) {
    throw ValidationError(config + ": " + e.what());
  }
  const auto loans = generate_market(cfg);
  std::ostringstream text;
  write_loans(text, loans);
  write_file(out, text.str());
  std::cout << out << ": " << loans.size() << " loans\n";
  return kOk;
}

void add_common(CLI::App* cmd, Common& c, bool balances) {
  cmd->add_option("--loans", c.loans, "Loan CSV (optionally .gz)")->required();
  if (balances) cmd->add_option("--balances", c.balances, "Balance-sheet CSV (optionally .gz)");
  cmd->add_option("--granularity", c.granularity, "week, month, quarter or year")
      ->capture_default_str();
  cmd->add_option("--out", c.out, "Output directory")->capture_default_str();
  cmd->add_option("--workers", c.workers,
                  std::string("Worker threads (default: $") + kWorkersEnv + " or all cores)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Heavy-tail model selection for interbank loan networks"};
  app.require_subcommand(1);

  Common common;
  std::string measures = "all";
  std::string scan_regime = "both";
  std::string boot_regime = "tail";
  std::string measure;
  std::string bin;
  std::string config;
  std::string synth_out = "loans.csv";
  double level = kDefaultLevel;
  std::size_t min_tail = kDefaultMinTail;
  std::size_t reps = kDefaultBootstrapReps;
  std::uint64_t seed = 1;

  auto* scan_cmd = app.add_subcommand("scan", "Per-bin best-fit scan of one or more measures");
  add_common(scan_cmd, common, true);
  scan_cmd->add_option("--measures", measures, "Comma list of measures, or all")
      ->capture_default_str();
  scan_cmd->add_option("--regime", scan_regime, "tail, full or both")->capture_default_str();
  scan_cmd->add_option("--level", level, "Significance level for alternates")
      ->capture_default_str();
  scan_cmd->add_option("--min-tail", min_tail, "Smallest tail worth fitting")
      ->capture_default_str();

  auto* net_cmd = app.add_subcommand("network-stats", "Per-bin network size, clustering and path length");
  add_common(net_cmd, common, false);

  auto* boot_cmd = app.add_subcommand("bootstrap", "Bootstrap the verdict for one measure in one bin");
  add_common(boot_cmd, common, true);
  boot_cmd->add_option("--measure", measure, "Measure name")->required();
  boot_cmd->add_option("--bin", bin, "Bin label or any date inside it")->required();
  boot_cmd->add_option("--regime", boot_regime, "tail or full")->capture_default_str();
  boot_cmd->add_option("--reps", reps, "Number of replicates")->capture_default_str();
  boot_cmd->add_option("--seed", seed, "Resampling seed")->capture_default_str();
  boot_cmd->add_option("--level", level, "Significance level for alternates")
      ->capture_default_str();
  boot_cmd->add_option("--min-tail", min_tail, "Smallest tail worth fitting")
      ->capture_default_str();

  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic loan CSV");
  synth_cmd->add_option("--config", config, "Market config file")->required();
  synth_cmd->add_option("--out", synth_out, "Output loan CSV")->capture_default_str();

  CLI11_PARSE(app, argc, argv);
  try {
    if (scan_cmd->parsed()) return run_scan(common, measures, scan_regime, level, min_tail);
    if (net_cmd->parsed()) return run_network_stats(common);
    if (boot_cmd->parsed())
      return run_bootstrap(common, measure, bin, boot_regime, reps, seed, level, min_tail);
    if (synth_cmd->parsed()) return run_synth(config, synth_out);
  } catch (const ParseError& e) {
    std::cerr << "ibfit: parse error: " << e.what() << '\n';
    return kParseFailure;
  } catch (const InconclusiveError& e) {
    std::cerr << "ibfit: inconclusive: " << e.what() << '\n';
    return kInconclusive;
  } catch (const ValidationError& e) {
    std::cerr << "ibfit: invalid input: " << e.what() << '\n';
    return kValidationFailure;
  } catch (const ParameterError& e) {
    std::cerr << "ibfit: invalid input: " << e.what() << '\n';
    return kValidationFailure;
  } catch (const std::exception& e) {
    std::cerr << "ibfit: " << e.what() << '\n';
    return kIoError;
  }
  return kOk;
}
