#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hashnet/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"hashnet: networked hashtag matching game simulator and metrics"};
  app.require_subcommand(1);

  hashnet::cli::Options opts;
  std::string config, out, transcript;
  std::uint64_t seed = 0;
  int parallelism = 0;
  std::vector<std::string> transcripts;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config, "configuration document (JSON)")->required();
    sub->add_option("--out", out, "output directory (overrides output.dir)");
    sub->add_option("--seed", seed, "root seed (overrides seed)");
    sub->add_option("--parallelism", parallelism, "concurrent backend calls (overrides parallelism)");
    sub->add_flag("--exclude-fallbacks", opts.exclude_fallbacks, "drop fallback-flagged responses from metrics");
    sub->add_flag("--strict", opts.strict, "fail when any metric is skipped");
  };

  auto* validate = app.add_subcommand("validate", "check a configuration document");
  common(validate);
  auto* simulate = app.add_subcommand("simulate", "run the game and write a JSONL transcript");
  common(simulate);
  auto* metrics = app.add_subcommand("metrics", "compute metric CSVs for one transcript");
  common(metrics);
  metrics->add_option("--transcript", transcript, "transcript to analyze (default: <out>/<output.transcript>)");
  auto* report = app.add_subcommand("report", "combine metrics of several transcripts");
  common(report);
  report->add_option("transcripts", transcripts, "transcript files")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : hashnet::cli::kInvalid;
  }

  opts.config = config;
  if (!out.empty()) opts.out = out;
  if (!transcript.empty()) opts.transcript = transcript;
  for (const auto& t : transcripts) opts.transcripts.emplace_back(t);
  auto* active = app.get_subcommands().front();
  if (active->count("--seed")) opts.seed = seed;
  if (active->count("--parallelism")) opts.parallelism = parallelism;

  if (*validate) return hashnet::cli::cmd_validate(opts, std::cout, std::cerr);
  if (*simulate) return hashnet::cli::cmd_simulate(opts, std::cout, std::cerr);
  if (*metrics) return hashnet::cli::cmd_metrics(opts, std::cout, std::cerr);
  return hashnet::cli::cmd_report(opts, std::cout, std::cerr);
}
