#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hashnet/config.hpp"
#include "hashnet/digest.hpp"
#include "hashnet/engine.hpp"
#include "hashnet/metrics_io.hpp"

namespace hashnet::cli {

enum ExitCode : int { kOk = 0, kInvalid = 1, kIo = 2 };

struct Options {
  std::filesystem::path config;
  std::optional<std::filesystem::path> out;
  std::optional<std::uint64_t> seed;
  std::optional<int> parallelism;
  bool exclude_fallbacks = false;
  bool strict = false;
  std::optional<std::filesystem::path> transcript;  // metrics
  std::vector<std::filesystem::path> transcripts;   // report
};

namespace detail {

inline void print_violations(const std::vector<Violation>& vs, std::ostream& err) {
  for (const auto& v : vs) err << "  " << (v.field.empty() ? "(document)" : v.field) << ": " << v.message << '\n';
}

/// Loads the configuration, reporting problems. Returns nullopt and sets
/// `code` on failure.
inline std::optional<CliConfig> load_or_report(const Options& opts, std::ostream& err, int& code) {
  if (!std::filesystem::exists(opts.config)) {
    err << "error: cannot read configuration " << opts.config.string() << '\n';
    code = kIo;
    return std::nullopt;
  }
  ConfigLoad load = load_config(opts.config);
  if (!load.ok()) {
    err << opts.config.string() << ": " << load.violations.size() << " violation(s)\n";
    print_violations(load.violations, err);
    code = kInvalid;
    return std::nullopt;
  }
  CliConfig c = std::move(load.config);
  if (opts.seed) c.run.seed = *opts.seed;
  if (opts.parallelism) {
    if (*opts.parallelism < 1) {
      err << "error: --parallelism must be >= 1\n";
      code = kInvalid;
      return std::nullopt;
    }
    c.run.parallelism = *opts.parallelism;
  }
  if (opts.exclude_fallbacks) c.metrics.exclude_fallbacks = true;
  return c;
}

inline std::filesystem::path output_dir(const Options& opts, const CliConfig& c) { return opts.out ? *opts.out : c.output.dir; }

}  // namespace detail

inline int cmd_validate(const Options& opts, std::ostream& out, std::ostream& err) {
  if (!std::filesystem::exists(opts.config)) {
    err << "error: cannot read configuration " << opts.config.string() << '\n';
    return kIo;
  }
  ConfigLoad load = load_config(opts.config);
  if (!load.ok()) {
    err << opts.config.string() << ": " << load.violations.size() << " violation(s)\n";
    detail::print_violations(load.violations, err);
    return kInvalid;
  }
  const RunConfig& r = load.config.run;
  out << opts.config.string() << ": valid (n=" << r.topology.n << ", k=" << r.topology.k << ", p=" << r.topology.p
      << ", rounds=" << r.rounds << ", agents=" << r.agents.size() << ")\n";
  return kOk;
}

inline int cmd_simulate(const Options& opts, std::ostream& out, std::ostream& err) {
  int code = kOk;
  auto config = detail::load_or_report(opts, err, code);
  if (!config) return code;

  const std::filesystem::path dir = detail::output_dir(opts, *config);
  const std::filesystem::path path = dir / config->output.transcript;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) {
    err << "error: cannot write transcript " << path.string() << '\n';
    return kIo;
  }

  Transcript t;
  try {
    t = run_simulation(config->run, RunOptions{&file, nullptr});
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kInvalid;
  } catch (const LoadError& e) {
    err << "error: " << e.what() << '\n';
    return kIo;
  }
  file.close();
  if (!file) {
    err << "error: failed writing " << path.string() << '\n';
    return kIo;
  }

  const RunSummary s = summarize(t);
  out << "transcript: " << path.string() << '\n';
  out << "sha256: " << sha256_file(path) << '\n';
  out << "rounds completed: " << s.rounds_completed << "/" << config->run.rounds << '\n';
  out << "records: " << s.records << '\n';
  out << "match rate: " << format_real(s.match_rate(), 4) << '\n';
  out << "fallbacks: " << s.fallbacks << '\n';
  if (t.abort) {
    err << "run aborted in round " << t.abort->round << " (" << t.abort->failed_pairs << "/" << t.abort->total_pairs
        << " pairs failed): " << t.abort->reason << '\n';
    return kInvalid;
  }
  return kOk;
}

namespace detail {

struct LoadedRun {
  std::string label;
  std::filesystem::path path;
  Transcript transcript;
  MetricsBundle metrics;
};

inline std::optional<LoadedRun> analyze(const std::filesystem::path& path, const CliConfig& config,
                                        const FocalNarrative* narrative, Embedder* embedder, std::ostream& err,
                                        int& code) {
  LoadedRun run;
  run.path = path;
  run.label = path.stem().string();
  try {
    run.transcript = read_transcript(path);
  } catch (const LoadError& e) {
    err << "error: " << e.what() << '\n';
    code = kIo;
    return std::nullopt;
  }
  if (run.transcript.records.empty()) {
    err << "error: " << path.string() << " has no records\n";
    code = kInvalid;
    return std::nullopt;
  }
  try {
    run.metrics = compute_metrics(run.transcript, config.metrics, narrative, embedder);
  } catch (const DomainError& e) {
    err << "error: " << path.string() << ": " << e.what() << '\n';
    code = kInvalid;
    return std::nullopt;
  } catch (const LoadError& e) {
    err << "error: " << e.what() << '\n';
    code = kIo;
    return std::nullopt;
  }
  run.metrics.metadata["transcript"] = path.filename().string();
  run.metrics.metadata["transcript_digest"] = sha256_file(path);
  return run;
}

struct Providers {
  std::optional<FocalNarrative> narrative;
  std::unique_ptr<Embedder> embedder;
  std::string embedder_error;
};

inline Providers providers_for(const CliConfig& config) {
  Providers p;
  try {
    p.narrative = load_narrative(config.run.narrative);
  } catch (const LoadError&) {
  }
  try {
    p.embedder = make_embedder(config.metrics.embedding);
  } catch (const EmbedderUnavailable& e) {
    p.embedder_error = e.what();
  }
  return p;
}

}  // namespace detail

inline int cmd_metrics(const Options& opts, std::ostream& out, std::ostream& err) {
  int code = kOk;
  auto config = detail::load_or_report(opts, err, code);
  if (!config) return code;
  const std::filesystem::path dir = detail::output_dir(opts, *config);
  const std::filesystem::path transcript = opts.transcript ? *opts.transcript : dir / config->output.transcript;

  auto providers = detail::providers_for(*config);
  auto run = detail::analyze(transcript, *config, providers.narrative ? &*providers.narrative : nullptr,
                             providers.embedder.get(), err, code);
  if (!run) return code;
  if (!providers.embedder_error.empty()) {
    run->metrics.alignment_status = {false, "embedder unavailable: " + providers.embedder_error};
    run->metrics.metadata["status"]["alignment"] = run->metrics.alignment_status.describe();
  }

  std::vector<std::filesystem::path> files;
  try {
    files = write_metrics(run->metrics, dir);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kIo;
  }
  for (const auto& f : files) out << "wrote " << f.string() << '\n';
  for (const auto& [name, status] : run->metrics.metadata["status"].items())
    out << name << ": " << status.get<std::string>() << '\n';
  if (opts.strict && run->metrics.any_skipped()) {
    err << "error: metrics skipped under --strict\n";
    return kInvalid;
  }
  return kOk;
}

/// Concatenates the per-run metric tables of several transcripts, with a
/// leading run column, for side-by-side comparison.
inline int cmd_report(const Options& opts, std::ostream& out, std::ostream& err) {
  int code = kOk;
  auto config = detail::load_or_report(opts, err, code);
  if (!config) return code;
  if (opts.transcripts.empty()) {
    err << "error: report needs at least one transcript\n";
    return kInvalid;
  }
  auto providers = detail::providers_for(*config);

  std::vector<detail::LoadedRun> runs;
  std::map<std::string, int> label_uses;
  for (const auto& path : opts.transcripts) {
    auto run = detail::analyze(path, *config, providers.narrative ? &*providers.narrative : nullptr,
                               providers.embedder.get(), err, code);
    if (!run) return code;
    if (int uses = label_uses[run->label]++; uses > 0) run->label += "_" + std::to_string(uses + 1);
    runs.push_back(std::move(*run));
  }

  std::string entropy = "run,round,value\n", dominant = entropy, perplexity = entropy;
  std::string rac = "run,rank,hashtag,count\n", alignment = "run,event,count\n";
  bool any_perplexity = false, any_alignment = false, skipped = false;
  nlohmann::ordered_json meta;
  meta["runs"] = nlohmann::ordered_json::array();
  for (const auto& r : runs) {
    const std::string label = csv_cell(r.label);
    for (const auto& [round, v] : r.metrics.entropy.values)
      entropy += label + "," + std::to_string(round) + "," + format_real(v) + "\n";
    for (const auto& [round, v] : r.metrics.dominant.values)
      dominant += label + "," + std::to_string(round) + "," + format_real(v) + "\n";
    if (r.metrics.perplexity) {
      any_perplexity = true;
      for (const auto& [round, v] : r.metrics.perplexity->values)
        perplexity += label + "," + std::to_string(round) + "," + format_real(v) + "\n";
    }
    for (std::size_t i = 0; i < r.metrics.rac.top.size(); ++i)
      rac += label + "," + std::to_string(i + 1) + "," + csv_cell(r.metrics.rac.top[i].first) + "," +
             std::to_string(r.metrics.rac.top[i].second) + "\n";
    if (r.metrics.alignment) {
      any_alignment = true;
      for (const auto& [event, c] : r.metrics.alignment->counts)
        alignment += label + "," + csv_cell(event) + "," + std::to_string(c) + "\n";
    }
    skipped = skipped || r.metrics.any_skipped();
    nlohmann::ordered_json entry;
    entry["run"] = r.label;
    entry["metadata"] = r.metrics.metadata;
    meta["runs"].push_back(std::move(entry));
  }

  const std::filesystem::path dir = detail::output_dir(opts, *config);
  try {
    std::filesystem::create_directories(dir);
    write_text(dir / "report_entropy.csv", entropy);
    write_text(dir / "report_dominant_share.csv", dominant);
    if (any_perplexity) write_text(dir / "report_perplexity.csv", perplexity);
    write_text(dir / "report_rac.csv", rac);
    if (any_alignment) write_text(dir / "report_alignment.csv", alignment);
    write_text(dir / "report_metadata.json", meta.dump(2) + "\n");
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kIo;
  }
  out << "report over " << runs.size() << " run(s) written to " << dir.string() << '\n';
  if (opts.strict && skipped) {
    err << "error: metrics skipped under --strict\n";
    return kInvalid;
  }
  return kOk;
}

}  // namespace hashnet::cli
