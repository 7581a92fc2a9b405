#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <iterator>
#include <map>
#include <numeric>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ibfit/calendar.hpp"
#include "ibfit/error.hpp"
#include "ibfit/ingestion.hpp"

namespace ibfit {

using NodeIndex = std::uint32_t;

struct MultiEdge {
  NodeIndex issuer;
  NodeIndex receiver;
  double size;
  bool operator==(const MultiEdge&) const = default;
};

struct DirectedEdge {
  NodeIndex from;
  NodeIndex to;
  double exposure;  // total lent from `from` to `to` within the bin
  bool operator==(const DirectedEdge&) const = default;
};

// The undirected, directed-weighted and multidirected views of one bin.
// Node indices refer into `nodes`, which is sorted by bank id.
struct NetworkViews {
  std::vector<BankId> nodes;
  std::vector<std::pair<NodeIndex, NodeIndex>> undirected_edges;  // first < second, sorted
  std::vector<DirectedEdge> directed_edges;                       // sorted by (from, to)
  std::vector<MultiEdge> multi_edges;                             // one per loan, input order
  TimeBin bin;

  std::size_t node_count() const noexcept { return nodes.size(); }
  bool empty() const noexcept { return nodes.empty(); }
};

enum class Measure {
  AssetSize,
  CapitalSize,
  Leverage,
  LoanSize,
  CounterpartyExposure,
  UndirectedDegree,
  DirectedInDegree,
  DirectedOutDegree,
  MultiInDegree,
  MultiOutDegree,
  InExposure,
  OutExposure,
};

inline constexpr std::array<Measure, 12> kAllMeasures = {
    Measure::AssetSize,        Measure::CapitalSize,       Measure::Leverage,
    Measure::LoanSize,         Measure::CounterpartyExposure, Measure::UndirectedDegree,
    Measure::DirectedInDegree, Measure::DirectedOutDegree, Measure::MultiInDegree,
    Measure::MultiOutDegree,   Measure::InExposure,        Measure::OutExposure};

constexpr std::string_view to_string(Measure m) noexcept {
  constexpr std::array<std::string_view, 12> names = {
      "asset_size",         "capital_size",       "leverage",
      "loan_size",          "counterparty_exposure", "undirected_degree",
      "directed_in_degree", "directed_out_degree", "multi_in_degree",
      "multi_out_degree",   "in_exposure",        "out_exposure"};
  return names[static_cast<std::size_t>(m)];
}

inline std::optional<Measure> parse_measure(std::string_view s) {
  for (auto m : kAllMeasures)
    if (to_string(m) == s) return m;
  return std::nullopt;
}

constexpr bool is_degree(Measure m) noexcept {
  return m == Measure::UndirectedDegree || m == Measure::DirectedInDegree ||
         m == Measure::DirectedOutDegree || m == Measure::MultiInDegree ||
         m == Measure::MultiOutDegree;
}

constexpr bool is_nodal_attribute(Measure m) noexcept {
  return m == Measure::AssetSize || m == Measure::CapitalSize || m == Measure::Leverage;
}

// Integer-valued measures; fitted with continuous likelihoods all the same.
constexpr bool is_discrete(Measure m) noexcept { return is_degree(m); }

// Strictly positive values of one measure in one bin, in node (or edge)
// order.
struct MeasureSeries {
  Measure measure;
  std::vector<double> values;
  TimeBin bin;
};

enum class Direction { In, Out };
enum class EdgeWeight { Loan, Counterparty };

// Builds the three views from the loans of one bin. Throws ValidationError
// on self-loans, non-positive sizes, or loans dated outside the bin.
inline NetworkViews build_networks(std::span<const LoanRecord> loans, const TimeBin& bin) {
  NetworkViews v;
  v.bin = bin;
  for (const auto& l : loans) {
    if (l.issuer == l.receiver) throw ValidationError("self-loan by bank '" + l.issuer + "'");
    if (!(l.size > 0.0)) throw ValidationError("non-positive loan size");
    if (!bin.contains(l.reporting_date))
      throw ValidationError("loan dated " + format_date(l.reporting_date) + " lies outside bin " +
                            bin.label());
    v.nodes.push_back(l.issuer);
    v.nodes.push_back(l.receiver);
  }
  std::sort(v.nodes.begin(), v.nodes.end());
  v.nodes.erase(std::unique(v.nodes.begin(), v.nodes.end()), v.nodes.end());
  auto index = [&](const BankId& id) {
    return static_cast<NodeIndex>(std::lower_bound(v.nodes.begin(), v.nodes.end(), id) -
                                  v.nodes.begin());
  };

  std::map<std::pair<NodeIndex, NodeIndex>, double> exposure;
  for (const auto& l : loans) {
    const MultiEdge e{index(l.issuer), index(l.receiver), l.size};
    v.multi_edges.push_back(e);
    exposure[{e.issuer, e.receiver}] += e.size;
    v.undirected_edges.emplace_back(std::min(e.issuer, e.receiver), std::max(e.issuer, e.receiver));
  }
  for (const auto& [pair, w] : exposure) v.directed_edges.push_back({pair.first, pair.second, w});
  std::sort(v.undirected_edges.begin(), v.undirected_edges.end());
  v.undirected_edges.erase(std::unique(v.undirected_edges.begin(), v.undirected_edges.end()),
                           v.undirected_edges.end());
  return v;
}

// Sorted neighbour lists of the undirected view.
inline std::vector<std::vector<NodeIndex>> undirected_adjacency(const NetworkViews& v) {
  std::vector<std::vector<NodeIndex>> adj(v.node_count());
  for (auto [a, b] : v.undirected_edges) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  for (auto& n : adj) std::sort(n.begin(), n.end());
  return adj;
}

namespace detail {

inline std::vector<double> positive_only(const std::vector<double>& per_node) {
  std::vector<double> out;
  for (double x : per_node)
    if (x > 0.0) out.push_back(x);
  return out;
}

}  // namespace detail

// Per-node degree of the selected kind; nodes with degree 0 are omitted.
inline MeasureSeries degree_series(const NetworkViews& v, Measure m) {
  if (!is_degree(m)) throw ParameterError(std::string(to_string(m)) + " is not a degree measure");
  std::vector<double> deg(v.node_count(), 0.0);
  switch (m) {
    case Measure::UndirectedDegree:
      for (auto [a, b] : v.undirected_edges) deg[a] += 1, deg[b] += 1;
      break;
    case Measure::DirectedInDegree:
      for (const auto& e : v.directed_edges) deg[e.to] += 1;
      break;
    case Measure::DirectedOutDegree:
      for (const auto& e : v.directed_edges) deg[e.from] += 1;
      break;
    case Measure::MultiInDegree:
      for (const auto& e : v.multi_edges) deg[e.receiver] += 1;
      break;
    case Measure::MultiOutDegree:
      for (const auto& e : v.multi_edges) deg[e.issuer] += 1;
      break;
    default: break;
  }
  return {m, detail::positive_only(deg), v.bin};
}

// Total borrowed (In) or lent (Out) per node; nodes with zero are omitted.
inline MeasureSeries exposure_series(const NetworkViews& v, Direction d) {
  std::vector<double> total(v.node_count(), 0.0);
  for (const auto& e : v.multi_edges) total[d == Direction::In ? e.receiver : e.issuer] += e.size;
  return {d == Direction::In ? Measure::InExposure : Measure::OutExposure,
          detail::positive_only(total), v.bin};
}

// Loan sizes (one per multi-edge) or counterparty exposures (one per
// directed edge).
inline MeasureSeries edge_weight_series(const NetworkViews& v, EdgeWeight w) {
  MeasureSeries s{w == EdgeWeight::Loan ? Measure::LoanSize : Measure::CounterpartyExposure, {},
                  v.bin};
  if (w == EdgeWeight::Loan) {
    for (const auto& e : v.multi_edges) s.values.push_back(e.size);
  } else {
    for (const auto& e : v.directed_edges) s.values.push_back(e.exposure);
  }
  return s;
}

// The reporting month used for a bin: the latest month overlapping the bin
// for which any balance data exist.
inline YearMonth reporting_month(std::span<const BalanceSheetRecord> balances, const TimeBin& bin) {
  using namespace std::chrono;
  std::optional<YearMonth> best;
  for (const auto& r : balances) {
    const Date first{r.month / 1};
    const Date after{(r.month + months{1}) / 1};
    if (first < bin.end && after > bin.start && (!best || *best < r.month)) best = r.month;
  }
  if (!best) throw ValidationError("no balance-sheet data for bin " + bin.label());
  return *best;
}

// Asset size, capital size, or leverage (capital / assets) per bank in the
// bin's reporting month. Banks with negative assets or negative capital are
// excluded; zero values cannot be fitted and are dropped as well.
inline MeasureSeries nodal_attribute_series(std::span<const BalanceSheetRecord> balances,
                                            const TimeBin& bin, Measure m) {
  if (!is_nodal_attribute(m))
    throw ParameterError(std::string(to_string(m)) + " is not a nodal attribute");
  const YearMonth month = reporting_month(balances, bin);
  std::vector<const BalanceSheetRecord*> rows;
  for (const auto& r : balances)
    if (r.month == month) rows.push_back(&r);
  std::sort(rows.begin(), rows.end(), [](auto* a, auto* b) { return a->bank < b->bank; });
  MeasureSeries s{m, {}, bin};
  for (const auto* r : rows) {
    if (r->total_assets < 0.0 || r->capital < 0.0) continue;
    double value = 0.0;
    switch (m) {
      case Measure::AssetSize: value = r->total_assets; break;
      case Measure::CapitalSize: value = r->capital; break;
      default:
        if (r->total_assets == 0.0) continue;
        value = r->capital / r->total_assets;
    }
    if (value > 0.0) s.values.push_back(value);
  }
  return s;
}

// Any of the twelve measures for one bin. Nodal attributes need balances.
inline MeasureSeries measure_series(Measure m, const NetworkViews& v,
                                    std::span<const BalanceSheetRecord> balances = {}) {
  switch (m) {
    case Measure::AssetSize:
    case Measure::CapitalSize:
    case Measure::Leverage: return nodal_attribute_series(balances, v.bin, m);
    case Measure::LoanSize: return edge_weight_series(v, EdgeWeight::Loan);
    case Measure::CounterpartyExposure: return edge_weight_series(v, EdgeWeight::Counterparty);
    case Measure::InExposure: return exposure_series(v, Direction::In);
    case Measure::OutExposure: return exposure_series(v, Direction::Out);
    default: return degree_series(v, m);
  }
}

// Mean of the local clustering coefficients 2T(u) / (k(k-1)) over all
// nodes; nodes of degree < 2 contribute 0.
inline double avg_clustering(const NetworkViews& v) {
  if (v.empty()) throw DomainError("clustering of an empty network");
  const auto adj = undirected_adjacency(v);
  double sum = 0.0;
  std::vector<NodeIndex> common;
  for (std::size_t u = 0; u < adj.size(); ++u) {
    const std::size_t k = adj[u].size();
    if (k < 2) continue;
    std::size_t twice_triangles = 0;
    for (NodeIndex w : adj[u]) {
      common.clear();
      std::set_intersection(adj[u].begin(), adj[u].end(), adj[w].begin(), adj[w].end(),
                            std::back_inserter(common));
      twice_triangles += common.size();
    }
    sum += static_cast<double>(twice_triangles) / static_cast<double>(k * (k - 1));
  }
  return sum / static_cast<double>(adj.size());
}

// Subgraph induced by the largest undirected component; among equal sizes
// the one holding the smallest bank id wins.
inline NetworkViews largest_connected_component(const NetworkViews& v) {
  if (v.empty()) throw DomainError("largest component of an empty network");
  const auto adj = undirected_adjacency(v);
  std::vector<int> component(v.node_count(), -1);
  int best = -1;
  std::size_t best_size = 0;
  int count = 0;
  for (std::size_t s = 0; s < adj.size(); ++s) {
    if (component[s] >= 0) continue;
    std::size_t size = 0;
    std::queue<NodeIndex> q;
    q.push(static_cast<NodeIndex>(s));
    component[s] = count;
    while (!q.empty()) {
      const NodeIndex u = q.front();
      q.pop();
      ++size;
      for (NodeIndex w : adj[u])
        if (component[w] < 0) component[w] = count, q.push(w);
    }
    // Components are discovered in order of their smallest node, so a strict
    // comparison keeps the earliest one on ties.
    if (size > best_size) best = count, best_size = size;
    ++count;
  }

  std::vector<NodeIndex> remap(v.node_count(), 0);
  NetworkViews out;
  out.bin = v.bin;
  for (std::size_t i = 0; i < v.node_count(); ++i) {
    if (component[i] != best) continue;
    remap[i] = static_cast<NodeIndex>(out.nodes.size());
    out.nodes.push_back(v.nodes[i]);
  }
  auto keep = [&](NodeIndex i) { return component[i] == best; };
  for (auto [a, b] : v.undirected_edges)
    if (keep(a)) out.undirected_edges.emplace_back(remap[a], remap[b]);
  for (const auto& e : v.directed_edges)
    if (keep(e.from)) out.directed_edges.push_back({remap[e.from], remap[e.to], e.exposure});
  for (const auto& e : v.multi_edges)
    if (keep(e.issuer)) out.multi_edges.push_back({remap[e.issuer], remap[e.receiver], e.size});
  return out;
}

// Mean unweighted distance over ordered pairs of distinct nodes of the
// largest connected component.
inline double avg_shortest_path(const NetworkViews& v) {
  const NetworkViews lcc = largest_connected_component(v);
  const std::size_t n = lcc.node_count();
  if (n < 2) throw DegenerateError("largest connected component has a single node");
  const auto adj = undirected_adjacency(lcc);
  std::uint64_t total = 0;
  std::vector<int> dist(n);
  std::vector<NodeIndex> frontier;
  for (std::size_t s = 0; s < n; ++s) {
    std::fill(dist.begin(), dist.end(), -1);
    dist[s] = 0;
    frontier.assign(1, static_cast<NodeIndex>(s));
    for (std::size_t head = 0; head < frontier.size(); ++head) {
      const NodeIndex u = frontier[head];
      for (NodeIndex w : adj[u]) {
        if (dist[w] >= 0) continue;
        dist[w] = dist[u] + 1;
        total += static_cast<std::uint64_t>(dist[w]);
        frontier.push_back(w);
      }
    }
  }
  return static_cast<double>(total) / static_cast<double>(n * (n - 1));
}

}  // namespace ibfit
