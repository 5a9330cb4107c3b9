#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <string>

#include "hashnet/agents.hpp"
#include "hashnet/remote.hpp"
#include "hashnet/transcript.hpp"

namespace hashnet {

/// Builds backends from agent specs. Remote agents that share an endpoint
/// also share its in-flight cap; replay agents reading the same transcript
/// share one loaded copy.
class BackendRegistry {
public:
  std::shared_ptr<Backend> make(const AgentSpec& spec) {
    const std::string field = "agents[" + std::to_string(spec.agent_id) + "].backend_params";
    switch (spec.backend) {
      case BackendKind::mock: return std::make_shared<MockBackend>(spec.params, field);
      case BackendKind::replay: {
        auto it = spec.params.find("transcript");
        if (it == spec.params.end()) throw ConfigError(field + ".transcript", "missing");
        return replay_for(it->second);
      }
      case BackendKind::remote: {
        EndpointConfig cfg = EndpointConfig::from_params(spec.params, field);
        return std::make_shared<RemoteBackend>(endpoint_for(cfg));
      }
    }
    throw ConfigError(field, "unsupported backend");
  }

  /// Registers an in-memory transcript under `key` for replay agents.
  void add_replay_source(const std::string& key, const Transcript& t) {
    std::lock_guard lock(mutex_);
    replays_[key] = std::make_shared<ReplayBackend>(t);
  }

private:
  std::shared_ptr<Backend> replay_for(const std::string& path) {
    std::lock_guard lock(mutex_);
    auto& slot = replays_[path];
    if (!slot) slot = std::make_shared<ReplayBackend>(read_transcript(std::filesystem::path(path)));
    return slot;
  }

  std::shared_ptr<JsonEndpoint> endpoint_for(const EndpointConfig& cfg) {
    std::lock_guard lock(mutex_);
    const std::string key = cfg.base_url + '\n' + cfg.model + '\n' + cfg.api_key_env;
    auto& slot = endpoints_[key];
    if (!slot) slot = std::make_shared<JsonEndpoint>(cfg);
    return slot;
  }

  std::mutex mutex_;
  std::map<std::string, std::shared_ptr<ReplayBackend>> replays_;
  std::map<std::string, std::shared_ptr<JsonEndpoint>> endpoints_;
};

/// One-shot convenience: builds a backend for `spec` and asks it once.
inline BackendResponse respond(const AgentSpec& spec, const BackendRequest& req, Rng& rng,
                               BackendRegistry& registry) {
  return registry.make(spec)->respond(req, rng);
}

}  // namespace hashnet
