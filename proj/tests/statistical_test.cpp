// Seeded multi-trial properties. Slower than the unit tests.
#include <gtest/gtest.h>

#include <algorithm>

#include "ibfit/ibfit.hpp"

using namespace ibfit;

namespace {

constexpr int kTrials = 100;

bool best_or_alternate(const RankingReport& r, DistributionKind k) {
  return r.best == k || std::find(r.alternates.begin(), r.alternates.end(), k) != r.alternates.end();
}

// Counts trials (run in parallel, tallied in trial order) where `hit` holds.
template <typename Trial>
int count_hits(Trial&& trial) {
  std::vector<char> hit(kTrials, 0);
  parallel_for(kTrials, default_workers(), [&](std::size_t t) { hit[t] = trial(t) ? 1 : 0; });
  return static_cast<int>(std::count(hit.begin(), hit.end(), 1));
}

}  // namespace

// Data from kind K at n = 1e4: K is best or an alternate.
TEST(SelfConsistency, EveryKind) {
  const std::vector<DistributionSpec> truths = {
      DistributionSpec::power_law(2.5, 1.0),
      DistributionSpec::truncated_power_law(2.0, 1e-3, 10.0),
      DistributionSpec::exponential(0.5, 1.0),
      DistributionSpec::stretched_exponential(0.29, 0.55, 1.0),
      DistributionSpec::log_normal(2.54, 1.27, 1.0),
  };
  for (std::size_t i = 0; i < truths.size(); ++i) {
    const auto& truth = truths[i];
    const int hits = count_hits([&](std::size_t t) {
      const SortedSample s(sample(truth, 10000, derive_seed(7000 + i, t)));
      return best_or_alternate(rank_candidates(s, truth.x_min), truth.kind());
    });
    EXPECT_GE(hits, 95) << short_name(truth.kind());
    std::printf("  %-4s best or alternate in %d/%d\n", std::string(short_name(truth.kind())).c_str(), hits,
                kTrials);
  }
}

TEST(FullRange, StretchedExponentialDegrees) {
  const auto truth = DistributionSpec::stretched_exponential(0.29, 0.55, 1.0);
  const int hits = count_hits([&](std::size_t t) {
    const auto r = fit_full_range(SortedSample(sample(truth, 10000, derive_seed(8100, t))));
    return r.best == DistributionKind::StretchedExponential;
  });
  EXPECT_GE(hits, 80);
  std::printf("  SExp best in %d/%d\n", hits, kTrials);
}

TEST(RankCandidates, TruncatedPowerLawTail) {
  const auto tpl = DistributionSpec::truncated_power_law(2.0, 1e-3, 10.0);
  const int hits = count_hits([&](std::size_t t) {
    return rank_candidates(SortedSample(sample(tpl, 10000, derive_seed(8200, t))), 10.0).best ==
           DistributionKind::TruncatedPowerLaw;
  });
  EXPECT_GE(hits, 90);
  std::printf("  TPL best in %d/%d\n", hits, kTrials);
}

// SExp (beta = 1) and TPL (alpha = 0) both nest the exponential, so on
// exponential data one of them tops the g-score. It must never beat the
// exponential significantly, which leaves Exp as an alternate.
TEST(RankCandidates, ExponentialTail) {
  const auto exp = DistributionSpec::exponential(0.5, 1.0);
  const int hits = count_hits([&](std::size_t t) {
    const auto r = rank_candidates(SortedSample(sample(exp, 10000, derive_seed(8300, t))), 1.0);
    if (r.best == DistributionKind::Exponential) return true;
    const bool nesting = r.best == DistributionKind::StretchedExponential ||
                         r.best == DistributionKind::TruncatedPowerLaw;
    return nesting && r.pair(*r.best, DistributionKind::Exponential)->p_value >= 0.01;
  });
  EXPECT_GE(hits, 90);
  std::printf("  Exp best, or tied with a nesting family, in %d/%d\n", hits, kTrials);
}

// generate_market -> binning -> loan-size series -> full-range verdict.
TEST(PipelineClosure, LoanSizeLawRecovered) {
  const std::vector<DistributionSpec> laws = {
      DistributionSpec::log_normal(2.54, 1.27, 1e-6),
      DistributionSpec::stretched_exponential(0.29, 0.55, 1.0),
  };
  for (std::size_t i = 0; i < laws.size(); ++i) {
    const int hits = count_hits([&](std::size_t t) {
      MarketConfig c;
      c.n_banks = 50;
      c.n_bins = 1;
      c.loans_per_bin = 10000;
      c.loan_size_law = laws[i];
      c.seed = derive_seed(8400 + i, t);
      const auto data = make_dataset(generate_market(c), c.granularity);
      const auto series = measure_series(Measure::LoanSize, data.bins.at(0));
      return best_or_alternate(fit_full_range(SortedSample(series.values)), laws[i].kind());
    });
    EXPECT_GE(hits, 90) << short_name(laws[i].kind());
    std::printf("  %-4s recovered in %d/%d\n", std::string(short_name(laws[i].kind())).c_str(), hits,
                kTrials);
  }
}

// Bootstrap of a synthetic TPL tail with n_tail >= 500: the original verdict
// is also the modal verdict over the replicates.
TEST(BootstrapStability, TruncatedPowerLawTail) {
  const auto truth = DistributionSpec::truncated_power_law(2.0, 1e-3, 10.0);
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const MeasureSeries s{Measure::OutExposure, sample(truth, 5000, 8500 + seed), {}};
    const auto rep = bootstrap(s, Regime::Tail, kDefaultBootstrapReps, seed, {}, default_workers());
    ASSERT_TRUE(rep.original.tail.has_value());
    EXPECT_GE(rep.original.tail->n_tail, 500u);
    EXPECT_EQ(rep.original.ranking.best, DistributionKind::TruncatedPowerLaw);
    EXPECT_EQ(rep.summary.modal_best, rep.original.ranking.best) << seed;
  }
}
