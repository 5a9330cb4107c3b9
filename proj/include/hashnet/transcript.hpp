#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hashnet/errors.hpp"
#include "hashnet/hashtag.hpp"
#include "hashnet/topology.hpp"

namespace hashnet {

/// Outcome of one pair in one round. agent_a < agent_b.
struct InteractionRecord {
  int round = 1;
  AgentIndex agent_a = 0;
  AgentIndex agent_b = 0;
  std::string raw_a;
  std::string raw_b;
  Hashtag hashtag_a;
  Hashtag hashtag_b;
  bool match = false;
  int points_a = 0;
  int points_b = 0;
  bool fallback_a = false;
  bool fallback_b = false;

  friend bool operator==(const InteractionRecord&, const InteractionRecord&) = default;
};

/// Scores a pair: one point each on a normalized match, none otherwise.
inline void score(InteractionRecord& rec) {
  rec.match = rec.hashtag_a.normalized == rec.hashtag_b.normalized;
  rec.points_a = rec.points_b = rec.match ? 1 : 0;
}

struct TranscriptHeader {
  std::string run_id;
  nlohmann::ordered_json config = nlohmann::ordered_json::object();
  std::uint64_t seed = 0;
  std::string narrative_id;
  int n = 0;
  std::vector<Edge> edges;
  std::optional<std::string> timestamp;

  friend bool operator==(const TranscriptHeader&, const TranscriptHeader&) = default;
};

/// Written after the last committed round when a run gives up.
struct AbortMarker {
  int round = 0;
  int failed_pairs = 0;
  int total_pairs = 0;
  std::string reason;

  friend bool operator==(const AbortMarker&, const AbortMarker&) = default;
};

struct Transcript {
  TranscriptHeader header;
  std::vector<InteractionRecord> records;  // ordered by (round, agent_a)
  std::optional<AbortMarker> abort;

  int last_round() const { return records.empty() ? 0 : records.back().round; }
};

/// One line of an agent's interaction table: what it and its partner
/// guessed in a past round (raw hashtags).
struct HistoryRow {
  int round = 0;
  std::string your_guess;
  std::string neighbor_guess;

  friend bool operator==(const HistoryRow&, const HistoryRow&) = default;
};

/// Rows for `agent` from every record before `before_round`, in round order.
/// Rounds where the agent sat out contribute nothing.
inline std::vector<HistoryRow> history_for(AgentIndex agent, const std::vector<InteractionRecord>& records,
                                           int before_round) {
  std::vector<HistoryRow> rows;
  for (const auto& r : records) {
    if (r.round >= before_round) continue;
    if (r.agent_a == agent)
      rows.push_back({r.round, r.hashtag_a.raw, r.hashtag_b.raw});
    else if (r.agent_b == agent)
      rows.push_back({r.round, r.hashtag_b.raw, r.hashtag_a.raw});
  }
  return rows;
}

// ---------------------------------------------------------------------------
// JSON Lines encoding. Field order is fixed by ordered_json insertion order.

inline nlohmann::ordered_json to_json(const Hashtag& h) {
  nlohmann::ordered_json j;
  j["raw"] = h.raw;
  j["normalized"] = h.normalized;
  return j;
}

inline nlohmann::ordered_json to_json(const TranscriptHeader& h) {
  nlohmann::ordered_json j;
  j["run_id"] = h.run_id;
  j["config"] = h.config;
  j["seed"] = h.seed;
  j["narrative_id"] = h.narrative_id;
  nlohmann::ordered_json net;
  net["n"] = h.n;
  net["edges"] = nlohmann::ordered_json::array();
  for (const Edge& e : h.edges) net["edges"].push_back({e.first, e.second});
  j["network"] = std::move(net);
  j["timestamp"] = h.timestamp ? nlohmann::ordered_json(*h.timestamp) : nlohmann::ordered_json(nullptr);
  return j;
}

inline nlohmann::ordered_json to_json(const InteractionRecord& r) {
  nlohmann::ordered_json j;
  j["round"] = r.round;
  j["agent_a"] = r.agent_a;
  j["agent_b"] = r.agent_b;
  j["raw_a"] = r.raw_a;
  j["raw_b"] = r.raw_b;
  j["hashtag_a"] = to_json(r.hashtag_a);
  j["hashtag_b"] = to_json(r.hashtag_b);
  j["match"] = r.match;
  j["points_a"] = r.points_a;
  j["points_b"] = r.points_b;
  j["fallback_a"] = r.fallback_a;
  j["fallback_b"] = r.fallback_b;
  return j;
}

inline nlohmann::ordered_json to_json(const AbortMarker& a) {
  nlohmann::ordered_json inner;
  inner["round"] = a.round;
  inner["failed_pairs"] = a.failed_pairs;
  inner["total_pairs"] = a.total_pairs;
  inner["reason"] = a.reason;
  nlohmann::ordered_json j;
  j["abort"] = std::move(inner);
  return j;
}

inline std::string dump_line(const nlohmann::ordered_json& j) {
  // Invalid UTF-8 from a model is replaced rather than aborting the run.
  return j.dump(-1, ' ', false, nlohmann::ordered_json::error_handler_t::replace);
}

/// Appends transcript lines to a stream, flushing after each round so a
/// crash keeps every completed round on disk.
class TranscriptWriter {
public:
  explicit TranscriptWriter(std::ostream& out) : out_(&out) {}

  void header(const TranscriptHeader& h) { *out_ << dump_line(to_json(h)) << '\n'; }
  void record(const InteractionRecord& r) { *out_ << dump_line(to_json(r)) << '\n'; }
  void abort(const AbortMarker& a) {
    *out_ << dump_line(to_json(a)) << '\n';
    out_->flush();
  }
  void end_round() { out_->flush(); }

private:
  std::ostream* out_;
};

inline void write_transcript(const Transcript& t, std::ostream& out) {
  TranscriptWriter w(out);
  w.header(t.header);
  for (const auto& r : t.records) w.record(r);
  if (t.abort) w.abort(*t.abort);
  w.end_round();
}

namespace detail {

template <typename T, typename Json>
T field(const Json& j, const char* key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) throw LoadError(where + key, "missing field");
  try {
    return it->template get<T>();
  } catch (const nlohmann::json::exception&) {
    throw LoadError(where + key, "wrong type");
  }
}

inline Hashtag hashtag_from_json(const nlohmann::json& j, const std::string& where) {
  if (!j.is_object()) throw LoadError(where, "expected an object");
  return {field<std::string>(j, "raw", where + "."), field<std::string>(j, "normalized", where + ".")};
}

}  // namespace detail

/// Key order inside `config` is kept, so its digest survives a round trip.
inline TranscriptHeader header_from_json(const nlohmann::ordered_json& j) {
  TranscriptHeader h;
  h.run_id = detail::field<std::string>(j, "run_id", "header.");
  if (auto it = j.find("config"); it != j.end()) h.config = *it;
  h.seed = detail::field<std::uint64_t>(j, "seed", "header.");
  h.narrative_id = detail::field<std::string>(j, "narrative_id", "header.");
  auto net = j.find("network");
  if (net == j.end() || !net->is_object()) throw LoadError("header.network", "missing or not an object");
  h.n = detail::field<int>(*net, "n", "header.network.");
  for (const auto& e : detail::field<std::vector<std::vector<int>>>(*net, "edges", "header.network.")) {
    if (e.size() != 2) throw LoadError("header.network.edges", "edge must have two endpoints");
    h.edges.emplace_back(e[0], e[1]);
  }
  if (auto it = j.find("timestamp"); it != j.end() && it->is_string()) h.timestamp = it->get<std::string>();
  return h;
}

inline InteractionRecord record_from_json(const nlohmann::json& j, const std::string& where) {
  InteractionRecord r;
  r.round = detail::field<int>(j, "round", where);
  r.agent_a = detail::field<int>(j, "agent_a", where);
  r.agent_b = detail::field<int>(j, "agent_b", where);
  r.raw_a = detail::field<std::string>(j, "raw_a", where);
  r.raw_b = detail::field<std::string>(j, "raw_b", where);
  r.hashtag_a = detail::hashtag_from_json(j.at("hashtag_a"), where + "hashtag_a");
  r.hashtag_b = detail::hashtag_from_json(j.at("hashtag_b"), where + "hashtag_b");
  r.match = detail::field<bool>(j, "match", where);
  r.points_a = detail::field<int>(j, "points_a", where);
  r.points_b = detail::field<int>(j, "points_b", where);
  r.fallback_a = detail::field<bool>(j, "fallback_a", where);
  r.fallback_b = detail::field<bool>(j, "fallback_b", where);
  if (r.round < 1) throw LoadError(where + "round", "must be >= 1");
  if (r.match != (r.hashtag_a.normalized == r.hashtag_b.normalized))
    throw LoadError(where + "match", "inconsistent with normalized hashtags");
  const int expected = r.match ? 1 : 0;
  if (r.points_a != expected || r.points_b != expected) throw LoadError(where + "points_a", "inconsistent with match");
  return r;
}

/// Parses a JSON Lines transcript. The first line must be the header.
inline Transcript read_transcript(std::istream& in) {
  Transcript t;
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = "line " + std::to_string(lineno) + ": ";
    nlohmann::json j;
    try {
      if (!have_header) {
        const auto header = nlohmann::ordered_json::parse(line);
        if (!header.is_object()) throw LoadError("", where + "expected a JSON object");
        t.header = header_from_json(header);
        have_header = true;
        continue;
      }
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw LoadError("", where + "malformed JSON: " + e.what());
    }
    if (!j.is_object()) throw LoadError("", where + "expected a JSON object");
    if (t.abort) throw LoadError("", where + "content after abort marker");
    if (auto it = j.find("abort"); it != j.end()) {
      AbortMarker a;
      a.round = detail::field<int>(*it, "round", where + "abort.");
      a.failed_pairs = detail::field<int>(*it, "failed_pairs", where + "abort.");
      a.total_pairs = detail::field<int>(*it, "total_pairs", where + "abort.");
      a.reason = detail::field<std::string>(*it, "reason", where + "abort.");
      t.abort = a;
      continue;
    }
    InteractionRecord r = record_from_json(j, where);
    if (!t.records.empty()) {
      const auto& prev = t.records.back();
      if (r.round < prev.round || (r.round == prev.round && r.agent_a <= prev.agent_a))
        throw LoadError("", where + "records out of canonical order");
      if (r.round > prev.round + 1) throw LoadError("", where + "round " + std::to_string(r.round) + " skips a round");
    } else if (r.round != 1) {
      throw LoadError("", where + "first record must be round 1");
    }
    t.records.push_back(std::move(r));
  }
  if (!have_header) throw LoadError("", "transcript is empty");
  return t;
}

inline Transcript read_transcript(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("", "cannot open transcript " + path.string());
  try {
    return read_transcript(in);
  } catch (const LoadError& e) {
    throw LoadError(e.field(), path.string() + ": " + e.what());
  }
}

}  // namespace hashnet
