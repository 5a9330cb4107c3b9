#pragma once

#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hashnet/errors.hpp"
#include "hashnet/rng.hpp"
#include "hashnet/transcript.hpp"

namespace hashnet {

enum class BackendKind { remote, mock, replay };

inline std::string_view to_string(BackendKind k) {
  switch (k) {
    case BackendKind::remote: return "remote";
    case BackendKind::mock: return "mock";
    case BackendKind::replay: return "replay";
  }
  return "?";
}

inline BackendKind backend_kind_from_string(std::string_view s, const std::string& field) {
  if (s == "remote") return BackendKind::remote;
  if (s == "mock") return BackendKind::mock;
  if (s == "replay") return BackendKind::replay;
  throw ConfigError(field, "unknown backend \"" + std::string(s) + "\" (expected remote, mock or replay)");
}

using BackendParams = std::map<std::string, std::string>;

struct AgentSpec {
  int agent_id = 0;
  BackendKind backend = BackendKind::mock;
  BackendParams params;
};

struct DecodeParams {
  double temperature = 0.7;
  int max_tokens = 64;
};

struct BackendRequest {
  std::string prompt;
  int round = 1;
  int agent_id = 0;
  DecodeParams decode;
  // Structured form of the table embedded in the prompt; used by the mock.
  std::vector<HistoryRow> history;
};

struct BackendResponse {
  std::string raw_text;
  double latency_ms = 0.0;
  int attempt = 1;
};

/// Produces one raw response per request. Implementations must tolerate
/// concurrent calls; randomness comes only from the caller's Rng.
class Backend {
public:
  virtual ~Backend() = default;
  virtual BackendResponse respond(const BackendRequest& req, Rng& rng) = 0;
};

/// Picks the partner guess seen most often across the agent's history.
///
/// Ties go to the guess seen most recently, then to the lexicographically
/// smaller string. With no history the guess is a uniform draw from the
/// lexicon.
inline std::string mock_imitate(std::span<const HistoryRow> history, std::span<const std::string> lexicon, Rng& rng) {
  if (history.empty()) {
    if (lexicon.empty()) throw ConfigError("lexicon", "must not be empty");
    return lexicon[static_cast<std::size_t>(rng.below(lexicon.size()))];
  }
  struct Tally {
    int count = 0;
    int last_seen = 0;
  };
  std::map<std::string, Tally> tally;
  for (const HistoryRow& row : history) {
    Tally& t = tally[row.neighbor_guess];
    ++t.count;
    t.last_seen = std::max(t.last_seen, row.round);
  }
  const std::string* best = nullptr;
  Tally best_tally;
  for (const auto& [guess, t] : tally) {  // map order makes the final tie lexicographic
    if (!best || t.count > best_tally.count || (t.count == best_tally.count && t.last_seen > best_tally.last_seen)) {
      best = &guess;
      best_tally = t;
    }
  }
  return *best;
}

inline std::vector<std::string> split_lexicon(std::string_view csv) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= csv.size()) {
    std::size_t comma = csv.find(',', start);
    std::string item = detail::trim(csv.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (!item.empty()) out.push_back(std::move(item));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

/// Rule-based stand-in for a language model.
///
/// strategy "constant:<text>" always answers <text>; "imitate" follows
/// mock_imitate; "random" draws uniformly from the lexicon every round.
/// The lexicon is a comma-separated list.
class MockBackend final : public Backend {
public:
  enum class Strategy { constant, imitate, random };

  explicit MockBackend(const BackendParams& params, const std::string& field = "backend_params") {
    auto it = params.find("strategy");
    if (it == params.end()) throw ConfigError(field + ".strategy", "missing");
    const std::string& s = it->second;
    if (s.rfind("constant:", 0) == 0) {
      strategy_ = Strategy::constant;
      constant_ = s.substr(9);
      if (constant_.empty()) throw ConfigError(field + ".strategy", "constant strategy needs a value");
      return;
    }
    if (s == "imitate")
      strategy_ = Strategy::imitate;
    else if (s == "random")
      strategy_ = Strategy::random;
    else
      throw ConfigError(field + ".strategy", "unknown mock strategy \"" + s + "\"");
    auto lex = params.find("lexicon");
    if (lex != params.end()) lexicon_ = split_lexicon(lex->second);
    if (lexicon_.empty()) throw ConfigError(field + ".lexicon", "must list at least one hashtag");
  }

  BackendResponse respond(const BackendRequest& req, Rng& rng) override {
    switch (strategy_) {
      case Strategy::constant: return {constant_, 0.0, 1};
      case Strategy::imitate: return {mock_imitate(req.history, lexicon_, rng), 0.0, 1};
      case Strategy::random: return {lexicon_[static_cast<std::size_t>(rng.below(lexicon_.size()))], 0.0, 1};
    }
    return {};
  }

private:
  Strategy strategy_ = Strategy::constant;
  std::string constant_;
  std::vector<std::string> lexicon_;
};

/// Serves the raw text recorded for (agent, round) in an earlier transcript.
class ReplayBackend final : public Backend {
public:
  explicit ReplayBackend(const Transcript& source) {
    for (const auto& r : source.records) {
      recorded_[{r.agent_a, r.round}] = r.raw_a;
      recorded_[{r.agent_b, r.round}] = r.raw_b;
    }
  }

  BackendResponse respond(const BackendRequest& req, Rng&) override {
    auto it = recorded_.find({req.agent_id, req.round});
    if (it == recorded_.end()) throw ReplayGap(req.agent_id, req.round);
    return {it->second, 0.0, 1};
  }

private:
  std::map<std::pair<int, int>, std::string> recorded_;
};

}  // namespace hashnet
