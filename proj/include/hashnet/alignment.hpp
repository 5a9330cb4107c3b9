#pragma once

#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "hashnet/errors.hpp"
#include "hashnet/narrative.hpp"
#include "hashnet/rng.hpp"

namespace hashnet {

using Embedding = std::vector<double>;

/// Maps texts to vectors. Throws EmbedderUnavailable when it cannot.
class Embedder {
public:
  virtual ~Embedder() = default;
  virtual std::vector<Embedding> embed(const std::vector<std::string>& texts) = 0;
  virtual std::string name() const = 0;
};

/// Cosine similarity; a zero vector has similarity 0 with everything.
/// Vectors of different length are zero-padded.
inline double cosine(const Embedding& a, const Embedding& b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    na += a[i] * a[i];
    if (i < b.size()) dot += a[i] * b[i];
  }
  for (double x : b) nb += x * x;
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

/// Each distinct string gets its own axis, in first-seen order.
class OneHotEmbedder final : public Embedder {
public:
  std::vector<Embedding> embed(const std::vector<std::string>& texts) override {
    std::lock_guard lock(mutex_);
    for (const auto& t : texts) index_.try_emplace(t, index_.size());
    std::vector<Embedding> out;
    out.reserve(texts.size());
    for (const auto& t : texts) {
      Embedding v(index_.size(), 0.0);
      v[index_.at(t)] = 1.0;
      out.push_back(std::move(v));
    }
    return out;
  }
  std::string name() const override { return "one_hot"; }

private:
  std::mutex mutex_;
  std::map<std::string, std::size_t> index_;
};

/// Offline bag of hashed character trigrams over lowercased alphanumeric
/// words. Crude, but deterministic and sensitive to shared word stems.
class HashedNgramEmbedder final : public Embedder {
public:
  explicit HashedNgramEmbedder(std::size_t dims = 512) : dims_(dims) {}

  std::vector<Embedding> embed(const std::vector<std::string>& texts) override {
    std::vector<Embedding> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(embed_one(t));
    return out;
  }
  std::string name() const override { return "hashed_trigram_" + std::to_string(dims_); }

private:
  Embedding embed_one(const std::string& text) const {
    Embedding v(dims_, 0.0);
    std::string word;
    auto flush = [&] {
      if (word.empty()) return;
      const std::string padded = " " + word + " ";
      for (std::size_t i = 0; i + 3 <= padded.size(); ++i)
        v[fnv1a64(std::string_view(padded).substr(i, 3)) % dims_] += 1.0;
      word.clear();
    };
    for (char c : text) {
      const auto u = static_cast<unsigned char>(c);
      if (std::isalnum(u) || u >= 0x80)
        word += static_cast<char>(std::tolower(u));
      else
        flush();
    }
    flush();
    return v;
  }

  std::size_t dims_;
};

/// Fixed text-to-vector table, loaded from a JSON object {text: [numbers]}.
class TableEmbedder final : public Embedder {
public:
  explicit TableEmbedder(std::map<std::string, Embedding> table) : table_(std::move(table)) {}

  static TableEmbedder load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw EmbedderUnavailable("cannot open embedding table " + path.string());
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(in);
      return TableEmbedder(doc.get<std::map<std::string, Embedding>>());
    } catch (const nlohmann::json::exception& e) {
      throw EmbedderUnavailable("malformed embedding table " + path.string() + ": " + e.what());
    }
  }

  std::vector<Embedding> embed(const std::vector<std::string>& texts) override {
    std::vector<Embedding> out;
    out.reserve(texts.size());
    for (const auto& t : texts) {
      auto it = table_.find(t);
      if (it == table_.end()) throw EmbedderUnavailable("embedding table has no entry for \"" + t + "\"");
      out.push_back(it->second);
    }
    return out;
  }
  std::string name() const override { return "table"; }

private:
  std::map<std::string, Embedding> table_;
};

struct EventAssignment {
  std::string label;
  double score = 0.0;
};

struct AlignmentResult {
  std::map<std::string, EventAssignment> assignments;      // distinct hashtag -> best event
  std::vector<std::pair<std::string, long long>> counts;  // event order, zeros included

  long long assigned_total() const {
    long long s = 0;
    for (const auto& [label, c] : counts) s += c;
    return s;
  }
};

/// Assigns every hashtag to the narrative event whose description embedding
/// has the highest cosine similarity (earlier events win ties). Counts are
/// weighted by how often each hashtag occurs in `hashtags`.
inline AlignmentResult align_hashtags(const std::vector<std::string>& hashtags, const FocalNarrative& narrative,
                                      Embedder& embedder) {
  if (narrative.events.empty())
    throw DomainError("narrative \"" + narrative.id + "\" has no events to align against");

  std::map<std::string, long long> frequency;
  std::vector<std::string> distinct;
  for (const auto& h : hashtags)
    if (frequency[h]++ == 0) distinct.push_back(h);

  std::vector<std::string> descriptions;
  for (const auto& e : narrative.events) descriptions.push_back(e.description);
  const std::vector<Embedding> event_vecs = embedder.embed(descriptions);
  const std::vector<Embedding> tag_vecs = distinct.empty() ? std::vector<Embedding>{} : embedder.embed(distinct);
  if (event_vecs.size() != descriptions.size() || tag_vecs.size() != distinct.size())
    throw EmbedderUnavailable("embedder returned the wrong number of vectors");

  AlignmentResult out;
  std::vector<long long> counts(narrative.events.size(), 0);
  for (std::size_t i = 0; i < distinct.size(); ++i) {
    std::size_t best = 0;
    double best_score = cosine(tag_vecs[i], event_vecs[0]);
    for (std::size_t e = 1; e < event_vecs.size(); ++e) {
      const double s = cosine(tag_vecs[i], event_vecs[e]);
      if (s > best_score) {
        best = e;
        best_score = s;
      }
    }
    out.assignments[distinct[i]] = {narrative.events[best].label, best_score};
    counts[best] += frequency[distinct[i]];
  }
  for (std::size_t e = 0; e < narrative.events.size(); ++e) out.counts.emplace_back(narrative.events[e].label, counts[e]);
  return out;
}

}  // namespace hashnet
