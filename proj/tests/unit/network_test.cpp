#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <vector>

#include "ibfit/ibfit.hpp"
#include "support/oracles.hpp"

using namespace ibfit;

namespace {

const TimeBin kJan = bin_of(Date{std::chrono::year{2003} / 1 / 1}, Granularity::Month);

LoanRecord loan(const std::string& from, const std::string& to, double size, int day = 1) {
  const Date d = kJan.start + std::chrono::days{day - 1};
  return {from, to, size, 4.5, d, d + std::chrono::days{1}};
}

std::vector<double> values(Measure m, const std::vector<LoanRecord>& loans) {
  return oracle::sorted(measure_series(m, build_networks(loans, kJan)).values);
}

NetworkViews graph(std::initializer_list<std::pair<const char*, const char*>> edges) {
  std::vector<LoanRecord> loans;
  for (auto [a, b] : edges) loans.push_back(loan(a, b, 1.0));
  return build_networks(loans, kJan);
}

BalanceSheetRecord sheet(const std::string& bank, int month, double assets, double capital) {
  return {bank, std::chrono::year{2003} / month, assets, capital};
}

}  // namespace

TEST(BuildNetworks, RepeatedPair) {
  const auto v = build_networks(std::vector{loan("A", "B", 5), loan("A", "B", 7)}, kJan);
  EXPECT_EQ(v.multi_edges.size(), 2u);
  ASSERT_EQ(v.directed_edges.size(), 1u);
  EXPECT_EQ(v.directed_edges[0].exposure, 12.0);
  EXPECT_EQ(v.undirected_edges.size(), 1u);
  EXPECT_EQ(v.nodes, (std::vector<BankId>{"A", "B"}));
}

TEST(BuildNetworks, Reciprocal) {
  const auto v = build_networks(std::vector{loan("A", "B", 5), loan("B", "A", 3)}, kJan);
  EXPECT_EQ(v.directed_edges.size(), 2u);
  EXPECT_EQ(v.undirected_edges.size(), 1u);
}

TEST(BuildNetworks, Empty) {
  const auto v = build_networks(std::vector<LoanRecord>{}, kJan);
  EXPECT_TRUE(v.empty());
  EXPECT_TRUE(v.multi_edges.empty());
  EXPECT_TRUE(v.undirected_edges.empty());
}

TEST(BuildNetworks, Rejections) {
  EXPECT_THROW(build_networks(std::vector{loan("A", "A", 5)}, kJan), ValidationError);
  EXPECT_THROW(build_networks(std::vector{loan("A", "B", 0)}, kJan), ValidationError);
  EXPECT_THROW(build_networks(std::vector{loan("A", "B", -2)}, kJan), ValidationError);
  EXPECT_THROW(build_networks(std::vector{loan("A", "B", 1, 40)}, kJan), ValidationError);
}

TEST(Degrees, Examples) {
  const std::vector loans{loan("A", "B", 5), loan("A", "B", 7)};
  // nodes A, B in id order
  EXPECT_EQ(measure_series(Measure::MultiOutDegree, build_networks(loans, kJan)).values,
            (std::vector<double>{2}));
  EXPECT_EQ(measure_series(Measure::DirectedOutDegree, build_networks(loans, kJan)).values,
            (std::vector<double>{1}));
  EXPECT_EQ(measure_series(Measure::MultiInDegree, build_networks(loans, kJan)).values,
            (std::vector<double>{2}));
  const auto path = build_networks(std::vector{loan("A", "B", 1), loan("B", "C", 1)}, kJan);
  EXPECT_EQ(measure_series(Measure::UndirectedDegree, path).values, (std::vector<double>{1, 2, 1}));
}

TEST(Exposures, Examples) {
  const std::vector loans{loan("A", "B", 5), loan("A", "C", 7)};
  EXPECT_EQ(values(Measure::OutExposure, loans), (std::vector<double>{12}));
  EXPECT_EQ(values(Measure::InExposure, loans), (std::vector<double>{5, 7}));
}

TEST(EdgeWeights, Examples) {
  const std::vector loans{loan("A", "B", 5), loan("A", "B", 7)};
  EXPECT_EQ(values(Measure::LoanSize, loans), (std::vector<double>{5, 7}));
  EXPECT_EQ(values(Measure::CounterpartyExposure, loans), (std::vector<double>{12}));
  const std::vector one{loan("X", "Y", 3.25)};
  EXPECT_EQ(values(Measure::LoanSize, one), (std::vector<double>{3.25}));
  EXPECT_EQ(values(Measure::CounterpartyExposure, one), (std::vector<double>{3.25}));
}

TEST(Measures, MatchEnumerationOracle) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto loans = oracle::random_loans(seed, 50, 40 + 15 * seed, kJan);
    const auto v = build_networks(loans, kJan);
    for (auto m : kAllMeasures) {
      if (is_nodal_attribute(m)) continue;
      EXPECT_EQ(oracle::sorted(measure_series(m, v).values), oracle::brute_series(m, loans))
          << to_string(m) << " seed " << seed;
    }
  }
}

TEST(Measures, HandshakeAndConservation) {
  const auto loans = oracle::random_loans(77, 50, 400, kJan);
  const auto v = build_networks(loans, kJan);
  auto sum = [&](Measure m) {
    const auto s = measure_series(m, v).values;
    return std::accumulate(s.begin(), s.end(), 0.0);
  };
  EXPECT_EQ(sum(Measure::UndirectedDegree), 2.0 * v.undirected_edges.size());
  EXPECT_EQ(sum(Measure::MultiInDegree), static_cast<double>(loans.size()));
  EXPECT_EQ(sum(Measure::MultiOutDegree), static_cast<double>(loans.size()));
  EXPECT_EQ(sum(Measure::DirectedInDegree), static_cast<double>(v.directed_edges.size()));
  double total = 0.0;
  for (const auto& l : loans) total += l.size;
  EXPECT_EQ(sum(Measure::InExposure), total);
  EXPECT_EQ(sum(Measure::OutExposure), total);
  EXPECT_EQ(sum(Measure::CounterpartyExposure), total);
}

TEST(Measures, SeriesArePositive) {
  const auto loans = oracle::random_loans(3, 50, 60, kJan);
  const auto v = build_networks(loans, kJan);
  for (auto m : kAllMeasures) {
    if (is_nodal_attribute(m)) continue;
    for (double x : measure_series(m, v).values) EXPECT_GT(x, 0.0) << to_string(m);
  }
}

TEST(Measures, DegreeMonotoneUnderEdgeAddition) {
  auto loans = oracle::random_loans(5, 30, 50, kJan);
  Rng rng(6);
  for (int step = 0; step < 30; ++step) {
    const auto before = build_networks(loans, kJan);
    const auto adj_before = undirected_adjacency(before);
    loans.push_back(loans[rng.below(loans.size())]);
    std::swap(loans.back().issuer, loans.back().receiver);
    const auto after = build_networks(loans, kJan);
    ASSERT_EQ(before.nodes, after.nodes);
    const auto adj_after = undirected_adjacency(after);
    for (std::size_t i = 0; i < adj_before.size(); ++i) EXPECT_GE(adj_after[i].size(), adj_before[i].size());
  }
}

TEST(Measures, Names) {
  for (auto m : kAllMeasures) EXPECT_EQ(parse_measure(to_string(m)), m);
  EXPECT_FALSE(parse_measure("betweenness").has_value());
  EXPECT_EQ(std::count_if(kAllMeasures.begin(), kAllMeasures.end(), is_nodal_attribute), 3);
  EXPECT_EQ(std::count_if(kAllMeasures.begin(), kAllMeasures.end(), is_degree), 5);
}

TEST(NodalAttributes, Examples) {
  const std::vector balances{sheet("A", 1, 100, 20), sheet("B", 1, 50, -5), sheet("C", 1, -1, 10),
                             sheet("D", 1, 0, 0), sheet("E", 1, 40, 0)};
  EXPECT_EQ(nodal_attribute_series(balances, kJan, Measure::Leverage).values, (std::vector<double>{0.2}));
  EXPECT_EQ(nodal_attribute_series(balances, kJan, Measure::AssetSize).values,
            (std::vector<double>{100, 40}));
  EXPECT_EQ(nodal_attribute_series(balances, kJan, Measure::CapitalSize).values,
            (std::vector<double>{20}));
}

TEST(NodalAttributes, ReportingMonth) {
  const std::vector balances{sheet("A", 1, 1, 1), sheet("A", 2, 2, 1), sheet("A", 3, 3, 1),
                             sheet("A", 4, 4, 1)};
  const auto q1 = bin_of(Date{std::chrono::year{2003} / 2 / 10}, Granularity::Quarter);
  EXPECT_EQ(nodal_attribute_series(balances, q1, Measure::AssetSize).values, (std::vector<double>{3}));
  EXPECT_EQ(nodal_attribute_series(balances, kJan, Measure::AssetSize).values, (std::vector<double>{1}));
  const auto jun = bin_of(Date{std::chrono::year{2003} / 6 / 1}, Granularity::Month);
  EXPECT_THROW(nodal_attribute_series(balances, jun, Measure::AssetSize), ValidationError);
  EXPECT_THROW(nodal_attribute_series(balances, kJan, Measure::LoanSize), ParameterError);
  // Through measure_series: missing balances is the same missing-month error.
  EXPECT_THROW(measure_series(Measure::AssetSize, build_networks(std::vector<LoanRecord>{}, kJan)),
               ValidationError);
}

TEST(Clustering, SmallGraphs) {
  EXPECT_DOUBLE_EQ(avg_clustering(graph({{"A", "B"}, {"B", "C"}, {"C", "A"}})), 1.0);
  EXPECT_DOUBLE_EQ(avg_clustering(graph({{"H", "A"}, {"H", "B"}, {"H", "C"}})), 0.0);
  // Triangle plus a pendant: c = (1/3, 1, 1, 0).
  EXPECT_DOUBLE_EQ(avg_clustering(graph({{"A", "B"}, {"B", "C"}, {"C", "A"}, {"A", "D"}})),
                   (1.0 / 3.0 + 2.0) / 4.0);
}

TEST(ShortestPath, SmallGraphs) {
  EXPECT_DOUBLE_EQ(avg_shortest_path(graph({{"A", "B"}, {"B", "C"}})), 4.0 / 3.0);
  EXPECT_DOUBLE_EQ(avg_shortest_path(graph({{"A", "B"}, {"B", "C"}, {"C", "A"}})), 1.0);
  EXPECT_DOUBLE_EQ(avg_shortest_path(
                       graph({{"A", "B"}, {"B", "C"}, {"C", "A"}, {"D", "E"}, {"E", "F"}, {"F", "D"}})),
                   1.0);
  EXPECT_THROW(avg_shortest_path(build_networks(std::vector<LoanRecord>{}, kJan)), DomainError);
}

TEST(LargestComponent, TiesAndSizes) {
  const auto two = graph({{"D", "E"}, {"E", "F"}, {"A", "B"}, {"B", "C"}});
  const auto lcc = largest_connected_component(two);
  EXPECT_EQ(lcc.nodes, (std::vector<BankId>{"A", "B", "C"}));
  EXPECT_EQ(lcc.undirected_edges.size(), 2u);
  EXPECT_EQ(lcc.multi_edges.size(), 2u);

  const auto split = graph({{"P", "Q"}, {"X", "Y"}, {"Y", "Z"}});
  EXPECT_EQ(largest_connected_component(split).nodes, (std::vector<BankId>{"X", "Y", "Z"}));

  const auto connected = graph({{"A", "B"}, {"B", "C"}, {"C", "D"}});
  const auto same = largest_connected_component(connected);
  EXPECT_EQ(same.nodes, connected.nodes);
  EXPECT_EQ(same.undirected_edges, connected.undirected_edges);
}

TEST(GraphMetrics, MatchDenseOracles) {
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    // Sparse to dense, so some graphs are disconnected.
    const auto loans = oracle::random_loans(100 + seed, 50, 10 * seed, kJan);
    const auto v = build_networks(loans, kJan);
    const auto g = oracle::undirected(v);
    EXPECT_DOUBLE_EQ(avg_clustering(v), oracle::avg_clustering(g)) << seed;
    const auto lcc = largest_connected_component(v);
    std::vector<std::size_t> members;
    for (const auto& id : lcc.nodes)
      members.push_back(static_cast<std::size_t>(
          std::lower_bound(v.nodes.begin(), v.nodes.end(), id) - v.nodes.begin()));
    EXPECT_EQ(members, oracle::largest_component(g)) << seed;
    if (lcc.node_count() >= 2) {
      const double d = avg_shortest_path(v);
      EXPECT_DOUBLE_EQ(d, oracle::avg_shortest_path(g)) << seed;
      EXPECT_GE(d, 1.0);
    }
    const double c = avg_clustering(v);
    EXPECT_GE(c, 0.0);
    EXPECT_LE(c, 1.0);
  }
}
