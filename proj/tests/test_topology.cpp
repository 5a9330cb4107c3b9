#include <gtest/gtest.h>

#include <random>

#include "hashnet/topology.hpp"
#include "support.hpp"

using namespace hashnet;
using testing_support::ws;
using testing_support::brute_force_clustering;
using testing_support::check_pairing;

namespace {

std::string rejected_field(const TopologySpec& spec) {
  try {
    generate_network(spec);
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "";
}

}  // namespace

TEST(Topology, LatticeWhenNoRewiring) {
  const Network net = generate_network(ws(12, 4, 0.0, 99));
  EXPECT_EQ(net.edge_count(), 24u);
  for (int v = 0; v < 12; ++v) {
    EXPECT_EQ(net.degree(v), 4);
    EXPECT_TRUE(net.has_edge(v, (v + 1) % 12));
    EXPECT_TRUE(net.has_edge(v, (v + 2) % 12));
  }
}

TEST(Topology, LatticeClusteringByTriangleCount) {
  const Network net = generate_network(ws(12, 4, 0.0, 1));
  // Analytic ring-lattice value 3(k-2)/(4(k-1)) for k = 4.
  EXPECT_DOUBLE_EQ(brute_force_clustering(net), 0.5);
}

TEST(Topology, FullRewiringKeepsEdgeCount) {
  const Network net = generate_network(ws(20, 4, 1.0, 7));
  EXPECT_EQ(net.edge_count(), 40u);
  EXPECT_EQ(net.edges().size(), 40u);
  for (const Edge& e : net.edges()) EXPECT_LT(e.first, e.second);
}

TEST(Topology, RandomSpecsConserveEdges) {
  std::mt19937_64 gen(2718);
  for (int i = 0; i < 200; ++i) {
    const int n = std::uniform_int_distribution<int>(3, 60)(gen);
    const int max_half = (n - 1) / 2;
    const int k = 2 * std::uniform_int_distribution<int>(1, max_half)(gen);
    const double p = std::uniform_real_distribution<double>(0.0, 1.0)(gen);
    const Network net = generate_network(ws(n, k, p, gen()));
    ASSERT_EQ(net.edge_count(), static_cast<std::size_t>(n * k / 2)) << "n=" << n << " k=" << k << " p=" << p;
    const auto edges = net.edges();
    std::set<Edge> unique(edges.begin(), edges.end());
    ASSERT_EQ(unique.size(), edges.size());
    for (const Edge& e : edges) ASSERT_NE(e.first, e.second);
  }
}

TEST(Topology, SameSeedSameNetwork) {
  EXPECT_EQ(generate_network(ws(20, 4, 0.3, 5)), generate_network(ws(20, 4, 0.3, 5)));
  EXPECT_NE(generate_network(ws(20, 4, 0.3, 5)), generate_network(ws(20, 4, 0.3, 6)));
}

TEST(Topology, InvalidSpecsNameTheField) {
  EXPECT_EQ(rejected_field(ws(20, 3, 0.1, 0)), "k");
  EXPECT_EQ(rejected_field(ws(4, 4, 0.1, 0)), "k");
  EXPECT_EQ(rejected_field(ws(20, 0, 0.1, 0)), "k");
  EXPECT_EQ(rejected_field(ws(20, 4, -0.1, 0)), "p");
  EXPECT_EQ(rejected_field(ws(20, 4, 1.5, 0)), "p");
  EXPECT_EQ(rejected_field(ws(2, 2, 0.1, 0)), "n");
}

TEST(Topology, ExplicitEdgeListRejectsBadEdges) {
  EXPECT_THROW(Network(3, {{0, 0}}), ConfigError);
  EXPECT_THROW(Network(3, {{0, 1}, {1, 0}}), ConfigError);
  EXPECT_THROW(Network(3, {{0, 5}}), ConfigError);
}

TEST(Pairing, CompleteGraphOnFourIsPerfect) {
  const Network k4 = Network::complete(4);
  for (int r = 1; r <= 50; ++r) {
    const Pairing p = pair_round(k4, r, 123u);
    EXPECT_EQ(p.pairs.size(), 2u);
    EXPECT_TRUE(p.unmatched.empty());
    EXPECT_EQ(check_pairing(k4, p), "");
  }
}

TEST(Pairing, PathOfThreeLeavesOneOut) {
  const Network path(3, {{0, 1}, {1, 2}});
  for (int r = 1; r <= 50; ++r) {
    const Pairing p = pair_round(path, r, 9u);
    ASSERT_EQ(p.pairs.size(), 1u);
    ASSERT_EQ(p.unmatched.size(), 1u);
    EXPECT_TRUE(path.has_edge(p.pairs[0].first, p.pairs[0].second));
    EXPECT_EQ(check_pairing(path, p), "");
  }
}

TEST(Pairing, SmallWorldDrawsAreMaximalMatchings) {
  const Network net = generate_network(ws(20, 4, 0.1, 3));
  for (int draw = 1; draw <= 1000; ++draw) {
    const Pairing p = pair_round(net, draw, 3u);
    ASSERT_EQ(check_pairing(net, p), "") << "draw " << draw;
  }
}

TEST(Pairing, RandomGraphsAreMaximalMatchings) {
  std::mt19937_64 gen(31);
  for (int i = 0; i < 1000; ++i) {
    const int n = std::uniform_int_distribution<int>(1, 30)(gen);
    const double density = std::uniform_real_distribution<double>(0.0, 1.0)(gen);
    const Network net = testing_support::random_graph(n, density, gen);
    Rng rng(gen());
    const Pairing p = pair_round(net, 1, rng);
    ASSERT_EQ(check_pairing(net, p), "") << "graph " << i;
  }
}

TEST(Pairing, DeterministicForFixedState) {
  const Network net = generate_network(ws(20, 4, 0.1, 3));
  for (int r = 1; r <= 10; ++r) {
    const Pairing a = pair_round(net, r, 77u);
    const Pairing b = pair_round(net, r, 77u);
    EXPECT_EQ(a.pairs, b.pairs);
    EXPECT_EQ(a.unmatched, b.unmatched);
  }
  Rng r1(5), r2(5);
  EXPECT_EQ(pair_round(net, 1, r1).pairs, pair_round(net, 1, r2).pairs);
}

TEST(Pairing, RoundsUseDifferentDraws) {
  const Network net = Network::complete(20);
  std::set<std::vector<Edge>> seen;
  for (int r = 1; r <= 10; ++r) seen.insert(pair_round(net, r, 1u).pairs);
  EXPECT_GT(seen.size(), 1u);
}

TEST(Pairing, IsolatedNodesSitOut) {
  const Network net(4, {{0, 1}});
  const Pairing p = pair_round(net, 1, 4u);
  ASSERT_EQ(p.pairs.size(), 1u);
  EXPECT_EQ(p.unmatched, (std::vector<AgentIndex>{2, 3}));
}

TEST(Topology, CompleteAndExplicitKinds) {
  TopologySpec complete{5, 0, 0.0, 1, TopologyKind::complete, {}};
  EXPECT_EQ(generate_network(complete), Network::complete(5));
  EXPECT_EQ(generate_network(complete).edge_count(), 10u);

  TopologySpec single{2, 0, 0.0, 1, TopologyKind::edges, {{0, 1}}};
  const Network net = generate_network(single);
  EXPECT_EQ(net.size(), 2);
  EXPECT_EQ(net.edges(), (std::vector<Edge>{{0, 1}}));

  EXPECT_EQ(rejected_field({2, 0, 0.0, 1, TopologyKind::edges, {{0, 2}}}), "edges");
  EXPECT_EQ(rejected_field({3, 0, 0.0, 1, TopologyKind::edges, {{0, 1}, {1, 0}}}), "edges");
  EXPECT_EQ(rejected_field({1, 0, 0.0, 1, TopologyKind::complete, {}}), "n");
}
