#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hashnet/errors.hpp"
#include "hashnet/hashtag.hpp"
#include "hashnet/transcript.hpp"

namespace hashnet {

/// Which responses enter a metric.
struct ResponseFilter {
  bool exclude_fallbacks = false;

  std::string_view policy_name() const { return exclude_fallbacks ? "exclude_fallbacks" : "include_fallbacks"; }
};

/// Every response (both sides of each record) of round `round` that passes
/// the filter, as parsed hashtags.
inline std::vector<Hashtag> round_responses(const Transcript& t, int round, ResponseFilter filter = {}) {
  std::vector<Hashtag> out;
  for (const auto& r : t.records) {
    if (r.round != round) continue;
    if (!(filter.exclude_fallbacks && r.fallback_a)) out.push_back(r.hashtag_a);
    if (!(filter.exclude_fallbacks && r.fallback_b)) out.push_back(r.hashtag_b);
  }
  return out;
}

inline std::vector<Hashtag> all_responses(const Transcript& t, ResponseFilter filter = {}) {
  std::vector<Hashtag> out;
  for (const auto& r : t.records) {
    if (!(filter.exclude_fallbacks && r.fallback_a)) out.push_back(r.hashtag_a);
    if (!(filter.exclude_fallbacks && r.fallback_b)) out.push_back(r.hashtag_b);
  }
  return out;
}

/// Occurrence counts keyed by normalized hashtag.
struct HashtagDistribution {
  std::map<std::string, long long> counts;
  long long total = 0;

  void add(const std::string& key, long long n = 1) {
    counts[key] += n;
    total += n;
  }
  bool empty() const { return total == 0; }
};

inline HashtagDistribution distribution_of(const std::vector<Hashtag>& tags) {
  HashtagDistribution d;
  for (const auto& h : tags) d.add(h.normalized);
  return d;
}

/// Distribution of round `round`; each response counts once.
inline HashtagDistribution round_distribution(const Transcript& t, int round, ResponseFilter filter = {}) {
  HashtagDistribution d = distribution_of(round_responses(t, round, filter));
  if (d.empty()) throw DomainError("round " + std::to_string(round) + " has no responses");
  return d;
}

/// Shannon entropy in bits.
inline double shannon_entropy(const HashtagDistribution& dist) {
  if (dist.total <= 0) throw DomainError("entropy of an empty distribution");
  const double total = static_cast<double>(dist.total);
  double h = 0.0;
  for (const auto& [key, c] : dist.counts) {
    if (c <= 0) continue;
    const double q = static_cast<double>(c) / total;
    h -= q * std::log2(q);
  }
  return h <= 0.0 ? 0.0 : h;
}

/// Share of responses that are the most frequent hashtag.
inline double dominant_share(const HashtagDistribution& dist) {
  if (dist.total <= 0) throw DomainError("dominant share of an empty distribution");
  long long top = 0;
  for (const auto& [key, c] : dist.counts) top = std::max(top, c);
  return static_cast<double>(top) / static_cast<double>(dist.total);
}

// ---------------------------------------------------------------------------
// Unigram reference model

enum class Tokenization { hashtag, words };

inline std::string_view to_string(Tokenization t) { return t == Tokenization::hashtag ? "hashtag_as_token" : "word_tokens"; }

inline Tokenization tokenization_from_string(std::string_view s, const std::string& field) {
  if (s == "hashtag_as_token" || s == "hashtag") return Tokenization::hashtag;
  if (s == "word_tokens" || s == "words") return Tokenization::words;
  throw ConfigError(field, "unknown tokenization \"" + std::string(s) + "\" (expected hashtag_as_token or word_tokens)");
}

/// Tokens of one hashtag string: the whole normalized hashtag, or each
/// whitespace-separated word normalized on its own. Empty tokens are dropped.
inline std::vector<std::string> tokenize(std::string_view text, Tokenization mode) {
  std::vector<std::string> out;
  if (mode == Tokenization::hashtag) {
    std::string tok = normalize_hashtag(text);
    if (!tok.empty()) out.push_back(std::move(tok));
    return out;
  }
  for (const std::string& w : detail::split_words(text)) {
    std::string tok = normalize_hashtag(w);
    if (!tok.empty()) out.push_back(std::move(tok));
  }
  return out;
}

/// Add-one smoothed unigram model with a single out-of-vocabulary type:
/// p(w) = (count(w) + 1) / (N + V + 1), p(OOV) = 1 / (N + V + 1).
struct UnigramModel {
  Tokenization tokenization = Tokenization::hashtag;
  std::map<std::string, long long> counts;
  long long token_count = 0;  // N

  std::size_t vocabulary_size() const { return counts.size(); }  // V

  double denominator() const {
    return static_cast<double>(token_count) + static_cast<double>(counts.size()) + 1.0;
  }
  double oov_probability() const { return 1.0 / denominator(); }
  double probability(const std::string& token) const {
    auto it = counts.find(token);
    const double c = it == counts.end() ? 0.0 : static_cast<double>(it->second);
    return (c + 1.0) / denominator();
  }

  long double log_probability(const std::string& token) const {
    auto it = counts.find(token);
    const double c = it == counts.end() ? 0.0 : static_cast<double>(it->second);
    return std::log(static_cast<long double>(c) + 1.0L) - std::log(static_cast<long double>(denominator()));
  }

  std::map<std::string, double> probabilities() const {
    std::map<std::string, double> p;
    for (const auto& [tok, c] : counts) p[tok] = probability(tok);
    return p;
  }
};

inline UnigramModel build_unigram_model(const std::vector<std::string>& corpus, Tokenization mode = Tokenization::hashtag) {
  UnigramModel m;
  m.tokenization = mode;
  for (const auto& line : corpus)
    for (auto& tok : tokenize(line, mode)) {
      ++m.counts[tok];
      ++m.token_count;
    }
  if (m.token_count == 0) throw ConfigError("reference_corpus", "corpus contains no tokens");
  return m;
}

/// Anything that tokenizes responses and assigns each token a probability.
template <typename M>
concept TokenModel = requires(const M& m, const std::string& tok) {
  { m.tokenization } -> std::convertible_to<Tokenization>;
  { m.log_probability(tok) } -> std::convertible_to<long double>;
};

/// exp of the mean negative log-probability of all tokens in `responses`.
/// Accumulates in long double and rounds once at the end.
template <TokenModel Model>
double perplexity(const Model& model, const std::vector<std::string>& responses) {
  long double log_sum = 0.0L;
  long long m = 0;
  for (const auto& r : responses)
    for (const auto& tok : tokenize(r, model.tokenization)) {
      log_sum += model.log_probability(tok);
      ++m;
    }
  if (m == 0) throw DomainError("perplexity of an empty response set");
  return static_cast<double>(std::exp(-log_sum / static_cast<long double>(m)));
}

// ---------------------------------------------------------------------------
// Rank abundance

struct RankAbundance {
  std::vector<std::pair<std::string, long long>> top;  // by count desc, then hashtag asc
  double entropy = 0.0;                                // of the full distribution
  std::size_t distinct = 0;
  long long total = 0;
};

inline RankAbundance rank_abundance(const HashtagDistribution& dist, std::size_t k = 10) {
  if (dist.empty()) throw DomainError("rank abundance of an empty distribution");
  RankAbundance out;
  std::vector<std::pair<std::string, long long>> all(dist.counts.begin(), dist.counts.end());
  std::stable_sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  if (all.size() > k) all.resize(k);
  out.top = std::move(all);
  out.entropy = shannon_entropy(dist);
  out.distinct = dist.counts.size();
  out.total = dist.total;
  return out;
}

inline RankAbundance rank_abundance(const Transcript& t, std::size_t k = 10, ResponseFilter filter = {}) {
  if (t.records.empty()) throw DomainError("rank abundance of an empty transcript");
  return rank_abundance(distribution_of(all_responses(t, filter)), k);
}

// ---------------------------------------------------------------------------
// Per-round series

enum class SeriesMetric { entropy, dominant_share, perplexity };

inline std::string_view to_string(SeriesMetric m) {
  switch (m) {
    case SeriesMetric::entropy: return "entropy";
    case SeriesMetric::dominant_share: return "dominant_share";
    case SeriesMetric::perplexity: return "perplexity";
  }
  return "?";
}

struct MetricSeries {
  std::string metric;
  std::vector<std::pair<int, double>> values;  // (round, value), rounds increasing
};

/// Applies a per-round metric to every round present in the transcript.
/// Errors are rethrown with the round index attached.
inline MetricSeries metric_series(const Transcript& t, SeriesMetric metric, ResponseFilter filter = {},
                                  const UnigramModel* model = nullptr) {
  if (metric == SeriesMetric::perplexity && !model)
    throw ConfigError("metrics.reference_corpus", "perplexity needs a unigram model");
  MetricSeries s;
  s.metric = std::string(to_string(metric));
  for (int round = 1; round <= t.last_round(); ++round) {
    try {
      double v = 0.0;
      switch (metric) {
        case SeriesMetric::entropy: v = shannon_entropy(round_distribution(t, round, filter)); break;
        case SeriesMetric::dominant_share: v = dominant_share(round_distribution(t, round, filter)); break;
        case SeriesMetric::perplexity: {
          std::vector<std::string> raws;
          for (const auto& h : round_responses(t, round, filter)) raws.push_back(h.raw);
          v = perplexity(*model, raws);
          break;
        }
      }
      s.values.emplace_back(round, v);
    } catch (const DomainError& e) {
      throw DomainError("round " + std::to_string(round) + ": " + e.what());
    }
  }
  return s;
}

}  // namespace hashnet
