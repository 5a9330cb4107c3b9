#pragma once

#include <algorithm>
#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hashnet/errors.hpp"
#include "hashnet/rng.hpp"

namespace hashnet {

using AgentIndex = int;

/// Undirected edge stored with first < second.
struct Edge {
  AgentIndex first = 0;
  AgentIndex second = 0;

  Edge() = default;
  Edge(AgentIndex a, AgentIndex b) : first(std::min(a, b)), second(std::max(a, b)) {}

  friend auto operator<=>(const Edge&, const Edge&) = default;
};

enum class TopologyKind { watts_strogatz, complete, edges };

inline std::string_view to_string(TopologyKind k) {
  switch (k) {
    case TopologyKind::watts_strogatz: return "watts_strogatz";
    case TopologyKind::complete: return "complete";
    case TopologyKind::edges: return "edges";
  }
  return "?";
}

/// Network parameters. The default kind is Watts-Strogatz: n nodes, each
/// joined to its k/2 nearest neighbours on either side, every clockwise edge
/// rewired with probability p. "complete" joins every pair; "edges" uses the
/// explicit edge list. k and p only apply to Watts-Strogatz.
struct TopologySpec {
  int n = 20;
  int k = 4;
  double p = 0.1;
  std::uint64_t seed = 0;
  TopologyKind kind = TopologyKind::watts_strogatz;
  std::vector<Edge> edges;
};

/// Throws ConfigError naming the offending field ("n", "k", "p" or "edges").
inline void validate(const TopologySpec& spec) {
  if (spec.kind != TopologyKind::watts_strogatz) {
    if (spec.n < 2) throw ConfigError("n", "agent count must be at least 2, got " + std::to_string(spec.n));
    if (spec.kind == TopologyKind::edges) {
      std::set<Edge> seen;
      for (const Edge& e : spec.edges) {
        if (e.first == e.second) throw ConfigError("edges", "self-loop on node " + std::to_string(e.first));
        if (e.first < 0 || e.second >= spec.n) throw ConfigError("edges", "edge endpoint out of range");
        if (!seen.insert(e).second)
          throw ConfigError("edges", "duplicate edge " + std::to_string(e.first) + "-" + std::to_string(e.second));
      }
    }
    return;
  }
  if (spec.n < 3) throw ConfigError("n", "agent count must be at least 3, got " + std::to_string(spec.n));
  if (spec.k < 2 || spec.k % 2 != 0)
    throw ConfigError("k", "neighbour degree must be even and >= 2, got " + std::to_string(spec.k));
  if (spec.k >= spec.n)
    throw ConfigError("k", "neighbour degree must be < n (" + std::to_string(spec.n) + "), got " +
                               std::to_string(spec.k));
  if (!(spec.p >= 0.0 && spec.p <= 1.0))
    throw ConfigError("p", "rewiring probability must lie in [0, 1], got " + std::to_string(spec.p));
}

class Network {
public:
  Network() = default;

  /// Builds from an edge list. Self-loops and duplicates are rejected.
  Network(int n, const std::vector<Edge>& edges) : adjacency_(static_cast<std::size_t>(n)) {
    for (const Edge& e : edges) add_edge(e.first, e.second);
  }

  static Network complete(int n) {
    std::vector<Edge> edges;
    for (int a = 0; a < n; ++a)
      for (int b = a + 1; b < n; ++b) edges.emplace_back(a, b);
    return Network(n, edges);
  }

  int size() const { return static_cast<int>(adjacency_.size()); }

  std::size_t edge_count() const {
    std::size_t degree_sum = 0;
    for (const auto& nbrs : adjacency_) degree_sum += nbrs.size();
    return degree_sum / 2;
  }

  /// Sorted by (first, second).
  std::vector<Edge> edges() const {
    std::vector<Edge> out;
    for (int a = 0; a < size(); ++a)
      for (int b : adjacency_[static_cast<std::size_t>(a)])
        if (a < b) out.emplace_back(a, b);
    return out;
  }

  /// Neighbours in ascending order.
  const std::set<AgentIndex>& neighbors(AgentIndex v) const { return adjacency_.at(static_cast<std::size_t>(v)); }

  int degree(AgentIndex v) const { return static_cast<int>(neighbors(v).size()); }

  bool has_edge(AgentIndex a, AgentIndex b) const {
    if (a < 0 || b < 0 || a >= size() || b >= size()) return false;
    return adjacency_[static_cast<std::size_t>(a)].count(b) != 0;
  }

  friend bool operator==(const Network&, const Network&) = default;

private:
  friend Network generate_network(const TopologySpec&);

  void add_edge(AgentIndex a, AgentIndex b) {
    if (a == b) throw ConfigError("edges", "self-loop on node " + std::to_string(a));
    if (a < 0 || b < 0 || a >= size() || b >= size())
      throw ConfigError("edges", "edge endpoint out of range");
    if (!adjacency_[static_cast<std::size_t>(a)].insert(b).second)
      throw ConfigError("edges", "duplicate edge " + std::to_string(a) + "-" + std::to_string(b));
    adjacency_[static_cast<std::size_t>(b)].insert(a);
  }

  void remove_edge(AgentIndex a, AgentIndex b) {
    adjacency_[static_cast<std::size_t>(a)].erase(b);
    adjacency_[static_cast<std::size_t>(b)].erase(a);
  }

  std::vector<std::set<AgentIndex>> adjacency_;
};

/// Builds the network described by `spec`.
///
/// Watts-Strogatz follows the classic construction. Lattice edges (u, u+j) are visited for j = 1..k/2 and, within each j, for
/// u = 0..n-1. Each is rewired with probability p by moving its far endpoint
/// to a node drawn uniformly from those that are neither u nor already
/// adjacent to u. Nodes already adjacent to everyone keep the edge. The edge
/// count never changes.
inline Network generate_network(const TopologySpec& spec) {
  validate(spec);
  if (spec.kind == TopologyKind::complete) return Network::complete(spec.n);
  if (spec.kind == TopologyKind::edges) return Network(spec.n, spec.edges);
  const int n = spec.n;
  const int half = spec.k / 2;
  Network net;
  net.adjacency_.assign(static_cast<std::size_t>(n), {});
  for (int u = 0; u < n; ++u)
    for (int j = 1; j <= half; ++j) net.add_edge(u, (u + j) % n);

  if (spec.p == 0.0) return net;

  Rng rng = Rng::substream(spec.seed, "topology");
  std::vector<AgentIndex> candidates;
  candidates.reserve(static_cast<std::size_t>(n));
  for (int j = 1; j <= half; ++j) {
    for (int u = 0; u < n; ++u) {
      const int v = (u + j) % n;
      if (!rng.bernoulli(spec.p)) continue;
      // The lattice edge may already have been moved away by an earlier rewire.
      if (!net.has_edge(u, v)) continue;
      candidates.clear();
      for (int w = 0; w < n; ++w)
        if (w != u && !net.has_edge(u, w)) candidates.push_back(w);
      if (candidates.empty()) continue;
      const AgentIndex w = candidates[static_cast<std::size_t>(rng.below(candidates.size()))];
      net.remove_edge(u, v);
      net.add_edge(u, w);
    }
  }
  return net;
}

struct Pairing {
  int round = 1;
  std::vector<Edge> pairs;  // sorted by first
  std::vector<AgentIndex> unmatched;  // ascending
};

/// Random greedy maximal matching: agents are visited in a random order and
/// each still-unmatched agent is paired with a uniformly drawn unmatched
/// neighbour. Agents left over sit the round out.
inline Pairing pair_round(const Network& net, int round, Rng& rng) {
  const int n = net.size();
  std::vector<AgentIndex> order(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  rng.shuffle(std::span<AgentIndex>(order));

  std::vector<char> matched(static_cast<std::size_t>(n), 0);
  Pairing out;
  out.round = round;
  std::vector<AgentIndex> open;
  for (AgentIndex v : order) {
    if (matched[static_cast<std::size_t>(v)]) continue;
    open.clear();
    for (AgentIndex w : net.neighbors(v))
      if (!matched[static_cast<std::size_t>(w)]) open.push_back(w);
    if (open.empty()) continue;
    const AgentIndex w = open[static_cast<std::size_t>(rng.below(open.size()))];
    matched[static_cast<std::size_t>(v)] = matched[static_cast<std::size_t>(w)] = 1;
    out.pairs.emplace_back(v, w);
  }
  std::sort(out.pairs.begin(), out.pairs.end());
  for (int v = 0; v < n; ++v)
    if (!matched[static_cast<std::size_t>(v)]) out.unmatched.push_back(v);
  return out;
}

/// Pairing for round `round` of a run rooted at `seed`; its own substream.
inline Pairing pair_round(const Network& net, int round, std::uint64_t seed) {
  Rng rng = Rng::substream(seed, "pairing", {static_cast<std::uint64_t>(round)});
  return pair_round(net, round, rng);
}

}  // namespace hashnet
