#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hashnet/engine.hpp"
#include "hashnet/metrics.hpp"
#include "hashnet/remote.hpp"

namespace hashnet {

enum class EmbeddingProvider { none, hashed, table, remote };

struct EmbeddingSettings {
  EmbeddingProvider provider = EmbeddingProvider::none;
  std::filesystem::path table;  // provider == table
  EndpointConfig endpoint;      // provider == remote
};

struct MetricsSettings {
  std::optional<std::filesystem::path> reference_corpus;
  Tokenization tokenization = Tokenization::hashtag;
  int entropy_base = 2;
  bool exclude_fallbacks = false;
  std::size_t rac_top_k = 10;
  EmbeddingSettings embedding;
};

struct OutputSettings {
  std::filesystem::path dir = "out";
  std::string transcript = "transcript.jsonl";
};

/// The whole configuration document: the run plus metrics and output
/// settings. Relative paths are resolved against the document's directory.
struct CliConfig {
  RunConfig run;
  MetricsSettings metrics;
  OutputSettings output;
  std::filesystem::path source;
};

struct Violation {
  std::string field;
  std::string message;
};

/// Result of loading a configuration document. `config` is only meaningful
/// when `violations` is empty.
struct ConfigLoad {
  CliConfig config;
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
};

namespace detail {

/// "line L, column C" plus the offending line, for a byte offset into text.
inline std::string line_context(const std::string& text, std::size_t byte) {
  if (byte > text.size()) byte = text.size();
  std::size_t line = 1, line_start = 0;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i)
    if (text[i] == '\n') {
      ++line;
      line_start = i + 1;
    }
  std::size_t line_end = text.find('\n', line_start);
  std::string excerpt = text.substr(line_start, line_end == std::string::npos ? std::string::npos : line_end - line_start);
  const std::size_t column = byte >= line_start ? byte - line_start + 1 : 1;
  return "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + excerpt;
}

class ConfigReader {
public:
  ConfigReader(std::vector<Violation>& out, std::filesystem::path base) : out_(out), base_(std::move(base)) {}

  void fail(const std::string& field, const std::string& msg) { out_.push_back({field, msg}); }

  const nlohmann::json* object(const nlohmann::json& parent, const char* key, const std::string& field) {
    auto it = parent.find(key);
    if (it == parent.end()) return nullptr;
    if (!it->is_object()) {
      fail(field, "expected an object");
      return nullptr;
    }
    return &*it;
  }

  template <typename T>
  std::optional<T> get(const nlohmann::json& parent, const char* key, const std::string& field) {
    auto it = parent.find(key);
    if (it == parent.end()) return std::nullopt;
    if constexpr (std::is_same_v<T, std::string>) {
      if (!it->is_string()) {
        fail(field, "expected a string");
        return std::nullopt;
      }
    } else if constexpr (std::is_same_v<T, bool>) {
      if (!it->is_boolean()) {
        fail(field, "expected true or false");
        return std::nullopt;
      }
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!it->is_number()) {
        fail(field, "expected a number");
        return std::nullopt;
      }
    } else {
      if (!it->is_number_integer()) {
        fail(field, "expected an integer");
        return std::nullopt;
      }
      if constexpr (std::is_unsigned_v<T>) {
        if (it->is_number_integer() && !it->is_number_unsigned()) {
          fail(field, "expected a non-negative integer");
          return std::nullopt;
        }
      }
    }
    return it->get<T>();
  }

  std::filesystem::path resolve(const std::string& p) const {
    std::filesystem::path path(p);
    return path.is_absolute() ? path : (base_ / path).lexically_normal();
  }

  std::optional<std::filesystem::path> existing_path(const nlohmann::json& parent, const char* key,
                                                     const std::string& field, bool required) {
    auto s = get<std::string>(parent, key, field);
    if (!s) {
      if (required && parent.find(key) == parent.end()) fail(field, "missing");
      return std::nullopt;
    }
    auto path = resolve(*s);
    if (!std::filesystem::exists(path)) {
      fail(field, "file not found: " + path.string());
      return std::nullopt;
    }
    return path;
  }

private:
  std::vector<Violation>& out_;
  std::filesystem::path base_;
};

inline BackendParams params_from_json(const nlohmann::json& j, const std::string& field, ConfigReader& r) {
  BackendParams params;
  if (!j.is_object()) {
    r.fail(field, "expected an object of string values");
    return params;
  }
  for (const auto& [k, v] : j.items()) {
    if (v.is_string())
      params[k] = v.get<std::string>();
    else if (v.is_number() || v.is_boolean())
      params[k] = v.dump();
    else
      r.fail(field + "." + k, "expected a string, number or boolean");
  }
  return params;
}

}  // namespace detail

/// Parses and validates a configuration document, collecting every
/// violation rather than stopping at the first.
inline ConfigLoad parse_config(const std::string& text, const std::filesystem::path& source) {
  ConfigLoad load;
  load.config.source = source;
  auto& v = load.violations;
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    v.push_back({"", "parse error at " + detail::line_context(text, e.byte == 0 ? 0 : e.byte - 1) + " (" + e.what() + ")"});
    return load;
  }
  if (!doc.is_object()) {
    v.push_back({"", "configuration must be a JSON object"});
    return load;
  }

  detail::ConfigReader r(v, source.has_parent_path() ? source.parent_path() : std::filesystem::path("."));
  CliConfig& c = load.config;
  RunConfig& run = c.run;

  if (auto s = r.get<std::uint64_t>(doc, "seed", "seed")) run.seed = *s;
  if (auto s = r.get<int>(doc, "rounds", "rounds")) run.rounds = *s;
  if (run.rounds < 1) r.fail("rounds", "must be >= 1, got " + std::to_string(run.rounds));
  if (auto s = r.get<int>(doc, "parallelism", "parallelism")) run.parallelism = *s;
  if (run.parallelism < 1) r.fail("parallelism", "must be >= 1");
  if (auto s = r.get<std::string>(doc, "timestamp", "timestamp")) run.timestamp = *s;

  if (const auto* topo = r.object(doc, "topology", "topology")) {
    if (auto s = r.get<std::string>(*topo, "kind", "topology.kind")) {
      if (*s == "watts_strogatz") run.topology.kind = TopologyKind::watts_strogatz;
      else if (*s == "complete") run.topology.kind = TopologyKind::complete;
      else if (*s == "edges") run.topology.kind = TopologyKind::edges;
      else r.fail("topology.kind", "expected watts_strogatz, complete or edges, got \"" + *s + "\"");
    }
    if (auto s = r.get<int>(*topo, "n", "topology.n")) run.topology.n = *s;
    if (auto s = r.get<int>(*topo, "k", "topology.k")) run.topology.k = *s;
    if (auto s = r.get<double>(*topo, "p", "topology.p")) run.topology.p = *s;
    if (auto e = topo->find("edges"); e != topo->end()) {
      bool ok = e->is_array();
      for (std::size_t i = 0; ok && i < e->size(); ++i) {
        const auto& pair = (*e)[i];
        ok = pair.is_array() && pair.size() == 2 && pair[0].is_number_integer() && pair[1].is_number_integer();
        if (ok) run.topology.edges.emplace_back(pair[0].get<int>(), pair[1].get<int>());
      }
      if (!ok) r.fail("topology.edges", "expected an array of [a, b] integer pairs");
    }
  }
  const TopologySpec& t = run.topology;
  try {
    validate(t);
  } catch (const ConfigError& e) {
    r.fail("topology." + e.field(), e.message());
  }
  if (t.kind == TopologyKind::edges && t.edges.empty()) r.fail("topology.edges", "edges topology needs at least one edge");

  if (const auto* dec = r.object(doc, "decode", "decode")) {
    if (auto s = r.get<double>(*dec, "temperature", "decode.temperature")) run.decode.temperature = *s;
    if (auto s = r.get<int>(*dec, "max_tokens", "decode.max_tokens")) run.decode.max_tokens = *s;
  }
  if (run.decode.temperature < 0.0) r.fail("decode.temperature", "must be >= 0");
  if (run.decode.max_tokens < 1) r.fail("decode.max_tokens", "must be >= 1");

  if (auto p = r.existing_path(doc, "narrative", "narrative", true)) {
    run.narrative = *p;
    try {
      (void)load_narrative(*p);
    } catch (const LoadError& e) {
      r.fail("narrative" + (e.field().empty() ? std::string() : "." + e.field()), e.what());
    }
  }

  // Agents: a list of specs, each optionally replicated.
  auto agents = doc.find("agents");
  if (agents == doc.end()) {
    r.fail("agents", "missing");
  } else if (!agents->is_array() || agents->empty()) {
    r.fail("agents", "expected a non-empty array");
  } else {
    for (std::size_t i = 0; i < agents->size(); ++i) {
      const std::string field = "agents[" + std::to_string(i) + "]";
      const auto& a = (*agents)[i];
      if (!a.is_object()) {
        r.fail(field, "expected an object");
        continue;
      }
      auto backend = r.get<std::string>(a, "backend", field + ".backend");
      if (!backend) {
        if (a.find("backend") == a.end()) r.fail(field + ".backend", "missing");
        continue;
      }
      AgentSpec spec;
      try {
        spec.backend = backend_kind_from_string(*backend, field + ".backend");
      } catch (const ConfigError& e) {
        r.fail(e.field(), "unknown backend \"" + *backend + "\"");
        continue;
      }
      if (auto p = a.find("backend_params"); p != a.end())
        spec.params = detail::params_from_json(*p, field + ".backend_params", r);
      if (spec.backend == BackendKind::replay) {
        auto it = spec.params.find("transcript");
        if (it != spec.params.end()) {
          auto path = r.resolve(it->second);
          if (!std::filesystem::exists(path))
            r.fail(field + ".backend_params.transcript", "file not found: " + path.string());
          it->second = path.string();
        }
      }
      int replicate = 1;
      if (auto s = r.get<int>(a, "replicate", field + ".replicate")) replicate = *s;
      if (replicate < 1) {
        r.fail(field + ".replicate", "must be >= 1");
        continue;
      }
      // Construct once to surface parameter errors under this entry's path.
      try {
        spec.agent_id = 0;
        if (spec.backend == BackendKind::mock)
          (void)MockBackend(spec.params, field + ".backend_params");
        else if (spec.backend == BackendKind::remote)
          (void)EndpointConfig::from_params(spec.params, field + ".backend_params");
        else if (spec.params.find("transcript") == spec.params.end())
          r.fail(field + ".backend_params.transcript", "missing");
      } catch (const ConfigError& e) {
        r.fail(e.field(), e.message());
      }
      for (int k = 0; k < replicate; ++k) {
        spec.agent_id = static_cast<int>(run.agents.size());
        run.agents.push_back(spec);
      }
    }
    if (static_cast<int>(run.agents.size()) != t.n)
      r.fail("agents", "topology.n is " + std::to_string(t.n) + " but " + std::to_string(run.agents.size()) +
                           " agents are specified");
  }

  if (const auto* m = r.object(doc, "metrics", "metrics")) {
    MetricsSettings& ms = c.metrics;
    if (m->contains("reference_corpus") && !(*m)["reference_corpus"].is_null())
      ms.reference_corpus = r.existing_path(*m, "reference_corpus", "metrics.reference_corpus", false);
    if (auto s = r.get<std::string>(*m, "tokenization", "metrics.tokenization")) {
      try {
        ms.tokenization = tokenization_from_string(*s, "metrics.tokenization");
      } catch (const ConfigError& e) {
        r.fail(e.field(), e.message());
      }
    }
    if (auto s = r.get<int>(*m, "entropy_base", "metrics.entropy_base")) ms.entropy_base = *s;
    if (ms.entropy_base != 2) r.fail("metrics.entropy_base", "only base 2 (bits) is supported");
    if (auto s = r.get<bool>(*m, "exclude_fallbacks", "metrics.exclude_fallbacks")) ms.exclude_fallbacks = *s;
    if (auto s = r.get<int>(*m, "rac_top_k", "metrics.rac_top_k")) {
      if (*s < 1) r.fail("metrics.rac_top_k", "must be >= 1");
      else ms.rac_top_k = static_cast<std::size_t>(*s);
    }
    if (const auto* e = r.object(*m, "embedding", "metrics.embedding")) {
      auto provider = r.get<std::string>(*e, "provider", "metrics.embedding.provider").value_or("none");
      if (provider == "none") {
        ms.embedding.provider = EmbeddingProvider::none;
      } else if (provider == "hashed") {
        ms.embedding.provider = EmbeddingProvider::hashed;
      } else if (provider == "table") {
        ms.embedding.provider = EmbeddingProvider::table;
        if (auto p = r.existing_path(*e, "path", "metrics.embedding.path", true)) ms.embedding.table = *p;
      } else if (provider == "remote") {
        ms.embedding.provider = EmbeddingProvider::remote;
        BackendParams params = detail::params_from_json(*e, "metrics.embedding", r);
        params.erase("provider");
        try {
          ms.embedding.endpoint = EndpointConfig::from_params(params, "metrics.embedding");
        } catch (const ConfigError& err) {
          r.fail(err.field(), err.what());
        }
      } else {
        r.fail("metrics.embedding.provider", "unknown provider \"" + provider + "\" (none, hashed, table, remote)");
      }
    }
  }

  if (const auto* o = r.object(doc, "output", "output")) {
    if (auto s = r.get<std::string>(*o, "dir", "output.dir")) c.output.dir = r.resolve(*s);
    if (auto s = r.get<std::string>(*o, "transcript", "output.transcript")) c.output.transcript = *s;
  } else {
    c.output.dir = r.resolve("out");
  }
  return load;
}

inline ConfigLoad load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    ConfigLoad load;
    load.violations.push_back({"", "cannot read configuration file " + path.string()});
    return load;
  }
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path);
}

}  // namespace hashnet
