#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "hashnet/agents.hpp"
#include "hashnet/backends.hpp"
#include "hashnet/csv.hpp"
#include "hashnet/digest.hpp"
#include "hashnet/hashtag.hpp"
#include "hashnet/narrative.hpp"
#include "hashnet/topology.hpp"
#include "hashnet/transcript.hpp"

namespace hashnet {

inline constexpr const char* kNoResponseHashtag = "#noresponse";

struct RunConfig {
  TopologySpec topology;
  int rounds = 40;
  std::vector<AgentSpec> agents;
  std::filesystem::path narrative;
  DecodeParams decode;
  int parallelism = 1;
  std::uint64_t seed = 0;
  std::optional<std::string> timestamp;
};

/// Throws ConfigError on the first violated invariant.
inline void validate(const RunConfig& config) {
  validate(config.topology);
  if (config.rounds < 1) throw ConfigError("rounds", "must be >= 1, got " + std::to_string(config.rounds));
  if (static_cast<int>(config.agents.size()) != config.topology.n)
    throw ConfigError("agents", "expected " + std::to_string(config.topology.n) + " agent specs, got " +
                                    std::to_string(config.agents.size()));
  for (std::size_t i = 0; i < config.agents.size(); ++i)
    if (config.agents[i].agent_id != static_cast<int>(i))
      throw ConfigError("agents[" + std::to_string(i) + "].agent_id", "agent ids must be 0..n-1 in order");
  if (config.decode.temperature < 0.0) throw ConfigError("decode.temperature", "must be >= 0");
  if (config.decode.max_tokens < 1) throw ConfigError("decode.max_tokens", "must be >= 1");
  if (config.parallelism < 1) throw ConfigError("parallelism", "must be >= 1");
}

/// Everything that determines a run's output. Parallelism is excluded since
/// it must not change the transcript. Files are identified by content digest
/// rather than location.
inline nlohmann::ordered_json config_snapshot(const RunConfig& c, const FocalNarrative& narrative) {
  nlohmann::ordered_json j;
  nlohmann::ordered_json topo;
  topo["kind"] = std::string(to_string(c.topology.kind));
  topo["n"] = c.topology.n;
  if (c.topology.kind == TopologyKind::watts_strogatz) {
    topo["k"] = c.topology.k;
    topo["p"] = c.topology.p;
  } else if (c.topology.kind == TopologyKind::edges) {
    topo["edges"] = nlohmann::ordered_json::array();
    for (const Edge& e : c.topology.edges) topo["edges"].push_back({e.first, e.second});
  }
  j["topology"] = std::move(topo);
  j["rounds"] = c.rounds;
  j["seed"] = c.seed;
  j["narrative"] = {{"id", narrative.id}, {"sha256", sha256_hex(narrative_to_json(narrative).dump())}};
  j["decode"] = {{"temperature", c.decode.temperature}, {"max_tokens", c.decode.max_tokens}};
  j["agents"] = nlohmann::ordered_json::array();
  for (const auto& a : c.agents) {
    nlohmann::ordered_json spec;
    spec["agent_id"] = a.agent_id;
    spec["backend"] = std::string(to_string(a.backend));
    spec["backend_params"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : a.params) {
      if (a.backend == BackendKind::replay && k == "transcript" && std::filesystem::exists(v))
        spec["backend_params"][k] = "sha256:" + sha256_file(v);
      else
        spec["backend_params"][k] = v;
    }
    j["agents"].push_back(std::move(spec));
  }
  return j;
}

// ---------------------------------------------------------------------------
// Prompt construction

/// CSV of an agent's past rounds: header plus one row per paired round.
inline std::string interaction_table(std::span<const HistoryRow> history) {
  std::string out = "round,your_guess,neighbor_guess";
  for (const auto& row : history) {
    out += '\n';
    out += std::to_string(row.round) + ',' + csv_cell(row.your_guess) + ',' +
           csv_cell(row.neighbor_guess);
  }
  return out;
}

/// Instantiates the game prompt for round `round`. The interaction table and
/// the sentence introducing it are present only when the agent has history.
inline std::string build_prompt(int round, std::span<const HistoryRow> history, const FocalNarrative& narrative) {
  std::string p =
      "In this experiment, you are awarded 1 point if you guess the same hashtag as your randomly assigned "
      "neighbor, and 0 points if you do not. Your goal is to earn as many points as possible.\n\n";
  p += "You are in round " + std::to_string(round) + " of the experiment.";
  if (!history.empty()) {
    p += " Your guesses and your neighbor's guesses have been as follows, represented in the CSV below:\n\n";
    p += interaction_table(history);
  }
  p += "\n\nBased on this information and the event provided in round 1:\n\n";
  p += narrative.full_text;
  p +=
      "\n\nPlease guess a short (max 5 words) hashtag for this event. Try to match your neighbor while staying "
      "relevant to the event. You may reuse your previous hashtag, but don't always do so\xE2\x80\x94"
      "especially if you believe your next neighbor might choose something different.\n";
  return p;
}

inline std::string build_prompt(AgentIndex agent, int round, const std::vector<InteractionRecord>& so_far,
                                const FocalNarrative& narrative) {
  const auto history = history_for(agent, so_far, round);
  return build_prompt(round, history, narrative);
}

// ---------------------------------------------------------------------------
// Simulation

struct RunSummary {
  int rounds_completed = 0;
  std::size_t records = 0;
  std::size_t matches = 0;
  std::size_t fallbacks = 0;
  bool aborted = false;

  double match_rate() const { return records ? static_cast<double>(matches) / static_cast<double>(records) : 0.0; }
};

inline RunSummary summarize(const Transcript& t) {
  RunSummary s;
  s.rounds_completed = t.last_round();
  s.records = t.records.size();
  for (const auto& r : t.records) {
    s.matches += r.match ? 1 : 0;
    s.fallbacks += (r.fallback_a ? 1 : 0) + (r.fallback_b ? 1 : 0);
  }
  s.aborted = t.abort.has_value();
  return s;
}

struct RunOptions {
  std::ostream* sink = nullptr;         // receives JSONL lines as rounds commit
  BackendRegistry* registry = nullptr;  // optional; a private one is used otherwise
};

namespace detail {

struct Dispatch {
  AgentIndex agent = 0;
  std::optional<BackendResponse> response;
  std::string error;
};

inline Hashtag fallback_hashtag(AgentIndex agent, const std::vector<InteractionRecord>& records) {
  for (auto it = records.rbegin(); it != records.rend(); ++it) {
    if (it->agent_a == agent) return it->hashtag_a;
    if (it->agent_b == agent) return it->hashtag_b;
  }
  return {kNoResponseHashtag, normalize_hashtag(kNoResponseHashtag)};
}

/// Runs every job, at most `cap` at a time. Results land in their own slot,
/// so completion order is irrelevant.
template <typename Fn>
void run_bounded(std::size_t jobs, int cap, Fn&& fn) {
  const std::size_t workers = std::min<std::size_t>(jobs, static_cast<std::size_t>(std::max(cap, 1)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < jobs; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < jobs;) fn(i);
    });
}

}  // namespace detail

/// Plays `config.rounds` rounds of the matching game.
///
/// Each round: pair agents on the network, prompt both members of every pair,
/// call the backends (concurrently up to `config.parallelism`), then parse,
/// score and commit records in pair order. A side whose backend fails or
/// whose output cannot be parsed gets its previous hashtag ("#noresponse" if
/// none) and is flagged. When more than half of a round's pairs had a backend
/// failure the round is discarded and an abort marker ends the transcript.
inline Transcript run_simulation(const RunConfig& config, const FocalNarrative& narrative, RunOptions options = {}) {
  validate(config);
  TopologySpec topo = config.topology;
  topo.seed = config.seed;
  const Network net = generate_network(topo);

  BackendRegistry local_registry;
  BackendRegistry& registry = options.registry ? *options.registry : local_registry;
  std::vector<std::shared_ptr<Backend>> backends;
  backends.reserve(config.agents.size());
  for (const auto& spec : config.agents) backends.push_back(registry.make(spec));

  Transcript out;
  out.header.config = config_snapshot(config, narrative);
  out.header.run_id = sha256_hex(out.header.config.dump()).substr(0, 16);
  out.header.seed = config.seed;
  out.header.narrative_id = narrative.id;
  out.header.n = net.size();
  out.header.edges = net.edges();
  out.header.timestamp = config.timestamp;

  std::optional<TranscriptWriter> writer;
  if (options.sink) {
    writer.emplace(*options.sink);
    writer->header(out.header);
    writer->end_round();
  }

  for (int t = 1; t <= config.rounds; ++t) {
    const Pairing pairing = pair_round(net, t, config.seed);

    std::vector<detail::Dispatch> slots;
    std::vector<BackendRequest> requests;
    for (const Edge& e : pairing.pairs) {
      for (AgentIndex agent : {e.first, e.second}) {
        BackendRequest req;
        req.history = history_for(agent, out.records, t);
        req.prompt = build_prompt(t, req.history, narrative);
        req.round = t;
        req.agent_id = agent;
        req.decode = config.decode;
        requests.push_back(std::move(req));
        slots.push_back({agent, std::nullopt, {}});
      }
    }

    detail::run_bounded(requests.size(), config.parallelism, [&](std::size_t i) {
      const BackendRequest& req = requests[i];
      Rng rng = Rng::substream(config.seed, "agent",
                               {static_cast<std::uint64_t>(req.agent_id), static_cast<std::uint64_t>(t)});
      try {
        slots[i].response = backends[static_cast<std::size_t>(req.agent_id)]->respond(req, rng);
      } catch (const std::exception& e) {
        slots[i].error = e.what();
      }
    });

    std::vector<InteractionRecord> committed;
    int failed_pairs = 0;
    std::string first_error;
    for (std::size_t p = 0; p < pairing.pairs.size(); ++p) {
      InteractionRecord rec;
      rec.round = t;
      rec.agent_a = pairing.pairs[p].first;
      rec.agent_b = pairing.pairs[p].second;
      bool unavailable = false;
      auto resolve = [&](const detail::Dispatch& d, std::string& raw, Hashtag& tag, bool& flag) {
        if (!d.response) {
          unavailable = true;
          if (first_error.empty()) first_error = d.error;
          tag = detail::fallback_hashtag(d.agent, out.records);
          flag = true;
          return;
        }
        raw = d.response->raw_text;
        try {
          tag = parse_response(raw);
        } catch (const ParseError&) {
          tag = detail::fallback_hashtag(d.agent, out.records);
          flag = true;
        }
      };
      resolve(slots[2 * p], rec.raw_a, rec.hashtag_a, rec.fallback_a);
      resolve(slots[2 * p + 1], rec.raw_b, rec.hashtag_b, rec.fallback_b);
      score(rec);
      if (unavailable) ++failed_pairs;
      committed.push_back(std::move(rec));
    }

    if (2 * failed_pairs > static_cast<int>(pairing.pairs.size())) {
      out.abort = AbortMarker{t, failed_pairs, static_cast<int>(pairing.pairs.size()),
                              "backend unavailable: " + first_error};
      if (writer) writer->abort(*out.abort);
      break;
    }
    for (auto& rec : committed) {
      if (writer) writer->record(rec);
      out.records.push_back(std::move(rec));
    }
    if (writer) writer->end_round();
  }
  return out;
}

inline Transcript run_simulation(const RunConfig& config, RunOptions options = {}) {
  return run_simulation(config, load_narrative(config.narrative), options);
}

}  // namespace hashnet
