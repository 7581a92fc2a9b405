// Generates a small market in memory, scans loan sizes and out-degrees per
// month and prints the summary lines plus the network time series.
#include <cstdio>

#include "ibfit/ibfit.hpp"

using namespace ibfit;

int main() {
  MarketConfig c;
  c.n_banks = 120;
  c.n_bins = 12;
  c.loans_per_bin = 1500;
  c.start = Date{std::chrono::year{2002} / 1 / 1};
  c.regime_schedule.push_back({6, 8, 0.6, 0.4});  // a thin spell
  const Dataset data = make_dataset(generate_market(c), c.granularity);

  const std::vector measures{Measure::LoanSize, Measure::MultiOutDegree};
  const std::vector regimes{Regime::FullRange, Regime::Tail};
  for (const auto& rep : scan(data, measures, regimes, {}, default_workers())) {
    const auto& s = rep.summary;
    std::printf("%-28s %zu/%zu conclusive, modal %s:", report_basename(rep).c_str(), s.conclusive,
                s.rows, s.modal_best ? std::string(short_name(*s.modal_best)).c_str() : "none");
    for (auto k : kAllKinds)
      std::printf(" %s %.0f%%", std::string(short_name(k)).c_str(), s.kinds[index_of(k)].best_pct);
    std::printf("\n");
  }

  std::printf("\n%s", network_stats_csv(network_stats(data, default_workers())).c_str());
}
