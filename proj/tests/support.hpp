#pragma once

// Test helpers and independent oracles. Nothing here calls into the metric
// or topology code it is used to check.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <boost/multiprecision/cpp_dec_float.hpp>

#include "hashnet/hashtag.hpp"
#include "hashnet/topology.hpp"
#include "hashnet/transcript.hpp"

namespace testing_support {

using hashnet::AgentIndex;
using hashnet::Network;
using hashnet::Pairing;
using BigReal = boost::multiprecision::cpp_dec_float_50;

inline std::filesystem::path source_path(const std::string& rel) { return std::filesystem::path(HASHNET_SOURCE_DIR) / rel; }

inline std::string read_text(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  static std::atomic<int> counter{0};
  auto dir = std::filesystem::temp_directory_path() /
             ("hashnet_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++) + "_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

// ---------------------------------------------------------------------------
// Metric oracles (50 significant digits)

inline BigReal big_log2(const BigReal& x) { return boost::multiprecision::log(x) / boost::multiprecision::log(BigReal(2)); }

inline BigReal oracle_entropy(const std::map<std::string, long long>& counts) {
  long long total = 0;
  for (const auto& kv : counts) total += kv.second;
  BigReal h = 0;
  for (const auto& kv : counts) {
    if (kv.second == 0) continue;
    BigReal q = BigReal(kv.second) / BigReal(total);
    h -= q * big_log2(q);
  }
  return h;
}

/// Perplexity of `responses` under an add-one unigram model of `corpus`, both
/// already tokenized.
inline BigReal oracle_perplexity(const std::vector<std::string>& corpus, const std::vector<std::string>& responses) {
  std::map<std::string, long long> counts;
  for (const auto& t : corpus) ++counts[t];
  const BigReal denom = BigReal(static_cast<long long>(corpus.size())) + BigReal(static_cast<long long>(counts.size())) + 1;
  BigReal sum = 0;
  for (const auto& r : responses) {
    auto it = counts.find(r);
    const long long c = it == counts.end() ? 0 : it->second;
    sum += boost::multiprecision::log(BigReal(c + 1) / denom);
  }
  return boost::multiprecision::exp(-sum / BigReal(static_cast<long long>(responses.size())));
}

inline double relative_error(double got, const BigReal& want) {
  const BigReal diff = boost::multiprecision::abs(BigReal(got) - want);
  if (want == 0) return static_cast<double>(diff);
  return static_cast<double>(diff / boost::multiprecision::abs(want));
}

// ---------------------------------------------------------------------------
// Graph oracles

/// Watts-Strogatz spec.
inline hashnet::TopologySpec ws(int n, int k, double p, std::uint64_t seed) {
  hashnet::TopologySpec s;
  s.n = n;
  s.k = k;
  s.p = p;
  s.seed = seed;
  return s;
}

/// Mean local clustering coefficient by explicit triangle enumeration.
inline double brute_force_clustering(const Network& net) {
  double sum = 0.0;
  for (int v = 0; v < net.size(); ++v) {
    std::vector<int> nb;
    for (int w = 0; w < net.size(); ++w)
      if (w != v && net.has_edge(v, w)) nb.push_back(w);
    const double d = static_cast<double>(nb.size());
    if (nb.size() < 2) continue;
    int links = 0;
    for (std::size_t i = 0; i < nb.size(); ++i)
      for (std::size_t j = i + 1; j < nb.size(); ++j)
        if (net.has_edge(nb[i], nb[j])) ++links;
    sum += 2.0 * links / (d * (d - 1.0));
  }
  return sum / net.size();
}

/// Empty when `p` is a valid maximal matching of `net`; a description of the
/// first problem otherwise.
inline std::string check_pairing(const Network& net, const Pairing& p) {
  std::vector<int> seen(static_cast<std::size_t>(net.size()), 0);
  for (const auto& e : p.pairs) {
    if (!net.has_edge(e.first, e.second))
      return "pair " + std::to_string(e.first) + "-" + std::to_string(e.second) + " is not an edge";
    if (seen[e.first]++ || seen[e.second]++) return "agent paired twice";
  }
  std::set<int> unmatched(p.unmatched.begin(), p.unmatched.end());
  for (int v = 0; v < net.size(); ++v) {
    if (!seen[v] && !unmatched.count(v)) return "agent " + std::to_string(v) + " neither paired nor unmatched";
    if (seen[v] && unmatched.count(v)) return "agent " + std::to_string(v) + " both paired and unmatched";
  }
  for (int a : p.unmatched)
    for (int b : p.unmatched)
      if (a < b && net.has_edge(a, b))
        return "not maximal: " + std::to_string(a) + " and " + std::to_string(b) + " both unmatched";
  return {};
}

/// Erdos-Renyi G(n, p) graph for pairing checks.
inline Network random_graph(int n, double density, std::mt19937_64& gen) {
  std::bernoulli_distribution coin(density);
  std::vector<hashnet::Edge> edges;
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b)
      if (coin(gen)) edges.emplace_back(a, b);
  return Network(n, edges);
}

// ---------------------------------------------------------------------------
// Transcript fixtures

inline hashnet::InteractionRecord make_record(int round, AgentIndex a, AgentIndex b, const std::string& tag_a,
                                              const std::string& tag_b) {
  hashnet::InteractionRecord r;
  r.round = round;
  r.agent_a = a;
  r.agent_b = b;
  r.raw_a = tag_a;
  r.raw_b = tag_b;
  r.hashtag_a = hashnet::parse_response(tag_a);
  r.hashtag_b = hashnet::parse_response(tag_b);
  hashnet::score(r);
  return r;
}

}  // namespace testing_support
