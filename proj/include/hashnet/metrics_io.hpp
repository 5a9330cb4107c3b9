#pragma once

#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hashnet/alignment.hpp"
#include "hashnet/config.hpp"
#include "hashnet/csv.hpp"
#include "hashnet/digest.hpp"
#include "hashnet/metrics.hpp"
#include "hashnet/narrative.hpp"
#include "hashnet/remote.hpp"

namespace hashnet {

/// Outcome of one metric: computed, or skipped with a reason.
struct MetricStatus {
  bool ok = true;
  std::string detail;

  std::string describe() const { return ok ? "ok" : "skipped: " + detail; }
};

/// All metric outputs of one transcript.
struct MetricsBundle {
  MetricSeries entropy;
  MetricSeries dominant;
  std::optional<MetricSeries> perplexity;
  RankAbundance rac;
  std::optional<AlignmentResult> alignment;

  MetricStatus perplexity_status;
  MetricStatus alignment_status;
  nlohmann::ordered_json metadata;

  bool any_skipped() const { return !perplexity_status.ok || !alignment_status.ok; }
};

/// Reference corpus: one hashtag per line, UTF-8. Blank lines are ignored.
inline std::vector<std::string> read_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("metrics.reference_corpus", "cannot open " + path.string());
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") != std::string::npos) lines.push_back(line);
  }
  return lines;
}

/// Builds the configured embedding provider; nullptr when none is set.
inline std::unique_ptr<Embedder> make_embedder(const EmbeddingSettings& s) {
  switch (s.provider) {
    case EmbeddingProvider::none: return nullptr;
    case EmbeddingProvider::hashed: return std::make_unique<HashedNgramEmbedder>();
    case EmbeddingProvider::table: return std::make_unique<TableEmbedder>(TableEmbedder::load(s.table));
    case EmbeddingProvider::remote: return std::make_unique<RemoteEmbedder>(s.endpoint);
  }
  return nullptr;
}

/// Computes every metric for `t`. Perplexity and alignment are skipped, with
/// the reason recorded, when their inputs are missing or the embedder fails.
inline MetricsBundle compute_metrics(const Transcript& t, const MetricsSettings& settings,
                                     const FocalNarrative* narrative, Embedder* embedder) {
  const ResponseFilter filter{settings.exclude_fallbacks};
  MetricsBundle b;
  b.entropy = metric_series(t, SeriesMetric::entropy, filter);
  b.dominant = metric_series(t, SeriesMetric::dominant_share, filter);
  b.rac = rank_abundance(t, settings.rac_top_k, filter);

  std::optional<std::string> corpus_digest;
  if (!settings.reference_corpus) {
    b.perplexity_status = {false, "no reference corpus configured"};
  } else {
    const auto corpus = read_corpus(*settings.reference_corpus);
    corpus_digest = sha256_file(*settings.reference_corpus);
    if (corpus.empty()) {
      b.perplexity_status = {false, "reference corpus is empty"};
    } else {
      const UnigramModel model = build_unigram_model(corpus, settings.tokenization);
      b.perplexity = metric_series(t, SeriesMetric::perplexity, filter, &model);
    }
  }

  if (!narrative || !narrative->has_events()) {
    b.alignment_status = {false, "narrative has no segmented events"};
  } else if (!embedder) {
    b.alignment_status = {false, "no embedding provider configured"};
  } else {
    std::vector<std::string> raws;
    for (const auto& h : all_responses(t, filter)) raws.push_back(h.raw);
    try {
      b.alignment = align_hashtags(raws, *narrative, *embedder);
    } catch (const EmbedderUnavailable& e) {
      b.alignment_status = {false, std::string("embedder unavailable: ") + e.what()};
    }
  }

  auto& m = b.metadata;
  m["run_id"] = t.header.run_id;
  m["seed"] = t.header.seed;
  m["narrative_id"] = t.header.narrative_id;
  m["config_digest"] = sha256_hex(t.header.config.dump());
  m["rounds"] = t.last_round();
  m["entropy_base"] = 2;
  m["tokenization"] = std::string(to_string(settings.tokenization));
  m["smoothing"] = "add_one";
  m["exclusion_policy"] = std::string(filter.policy_name());
  m["reference_corpus"] = settings.reference_corpus ? nlohmann::ordered_json(settings.reference_corpus->filename().string())
                                                    : nlohmann::ordered_json(nullptr);
  m["reference_corpus_digest"] = corpus_digest ? nlohmann::ordered_json(*corpus_digest) : nlohmann::ordered_json(nullptr);
  m["embedding_provider"] = embedder ? nlohmann::ordered_json(embedder->name()) : nlohmann::ordered_json(nullptr);
  m["rac"] = {{"top_k", settings.rac_top_k},
              {"full_entropy", format_real(b.rac.entropy)},
              {"distinct", b.rac.distinct},
              {"total", b.rac.total}};
  m["status"] = {{"entropy", "ok"},
                 {"dominant_share", "ok"},
                 {"perplexity", b.perplexity_status.describe()},
                 {"rank_abundance", "ok"},
                 {"alignment", b.alignment_status.describe()}};
  return b;
}

inline std::string series_csv(const MetricSeries& s) {
  std::string out = "round,value\n";
  for (const auto& [round, v] : s.values) out += std::to_string(round) + "," + format_real(v) + "\n";
  return out;
}

inline std::string rac_csv(const RankAbundance& r) {
  std::string out = "rank,hashtag,count\n";
  for (std::size_t i = 0; i < r.top.size(); ++i)
    out += std::to_string(i + 1) + "," + csv_cell(r.top[i].first) + "," + std::to_string(r.top[i].second) + "\n";
  return out;
}

inline std::string alignment_csv(const AlignmentResult& a) {
  std::string out = "event,count\n";
  for (const auto& [label, c] : a.counts) out += csv_cell(label) + "," + std::to_string(c) + "\n";
  return out;
}

inline void write_text(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::ios_base::failure("cannot write " + path.string());
  out << content;
  if (!out) throw std::ios_base::failure("write failed: " + path.string());
}

/// Writes entropy.csv, dominant_share.csv, perplexity.csv, rac.csv,
/// alignment.csv and metadata.json into `dir`. Skipped metrics get no CSV.
inline std::vector<std::filesystem::path> write_metrics(const MetricsBundle& b, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  auto emit = [&](const char* name, const std::string& content) {
    write_text(dir / name, content);
    written.push_back(dir / name);
  };
  emit("entropy.csv", series_csv(b.entropy));
  emit("dominant_share.csv", series_csv(b.dominant));
  if (b.perplexity) emit("perplexity.csv", series_csv(*b.perplexity));
  emit("rac.csv", rac_csv(b.rac));
  if (b.alignment) emit("alignment.csv", alignment_csv(*b.alignment));
  emit("metadata.json", b.metadata.dump(2) + "\n");
  return written;
}

}  // namespace hashnet
