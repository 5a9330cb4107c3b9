#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdlib>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "hashnet/agents.hpp"
#include "hashnet/alignment.hpp"
#include "hashnet/errors.hpp"

namespace hashnet {

/// Connection settings for an OpenAI-compatible HTTP API.
struct EndpointConfig {
  std::string base_url = "http://localhost:8000/v1";  // scheme://host[:port][/prefix]
  std::string model;
  std::string api_key_env = "HASHNET_API_KEY";
  int attempts = 3;
  std::chrono::milliseconds backoff{1000};  // doubled after every failed attempt
  std::chrono::milliseconds timeout{60000};
  int max_in_flight = 8;

  static EndpointConfig from_params(const BackendParams& params, const std::string& field) {
    EndpointConfig c;
    auto get = [&](const char* key) -> std::optional<std::string> {
      auto it = params.find(key);
      return it == params.end() ? std::nullopt : std::optional<std::string>(it->second);
    };
    auto as_int = [&](const char* key, long long lo) -> std::optional<long long> {
      auto v = get(key);
      if (!v) return std::nullopt;
      try {
        std::size_t used = 0;
        long long x = std::stoll(*v, &used);
        if (used != v->size() || x < lo) throw std::invalid_argument("range");
        return x;
      } catch (const std::exception&) {
        throw ConfigError(field + "." + key, "expected an integer >= " + std::to_string(lo) + ", got \"" + *v + "\"");
      }
    };
    if (auto v = get("base_url")) c.base_url = *v;
    if (auto v = get("model")) c.model = *v;
    if (auto v = get("api_key_env")) c.api_key_env = *v;
    if (auto v = as_int("attempts", 1)) c.attempts = static_cast<int>(*v);
    if (auto v = as_int("backoff_ms", 0)) c.backoff = std::chrono::milliseconds(*v);
    if (auto v = as_int("timeout_ms", 1)) c.timeout = std::chrono::milliseconds(*v);
    if (auto v = as_int("max_in_flight", 1)) c.max_in_flight = static_cast<int>(*v);
    if (c.model.empty()) throw ConfigError(field + ".model", "missing");
    if (c.base_url.find("://") == std::string::npos)
      throw ConfigError(field + ".base_url", "expected scheme://host[:port][/path], got \"" + c.base_url + "\"");
    return c;
  }
};

/// Counting gate on concurrent requests.
class InFlightLimiter {
public:
  explicit InFlightLimiter(int cap) : available_(cap > 0 ? cap : 1) {}

  void acquire() {
    std::unique_lock lock(mutex_);
    cv_.wait(lock, [&] { return available_ > 0; });
    --available_;
  }
  void release() {
    {
      std::lock_guard lock(mutex_);
      ++available_;
    }
    cv_.notify_one();
  }

private:
  std::mutex mutex_;
  std::condition_variable cv_;
  int available_;
};

struct HttpFailure : std::runtime_error {
  HttpFailure(const std::string& what, bool retryable) : std::runtime_error(what), retryable(retryable) {}
  bool retryable;
};

/// POSTs JSON to endpoint paths with bounded retries and a shared in-flight
/// cap. Safe to use from several threads.
class JsonEndpoint {
public:
  explicit JsonEndpoint(EndpointConfig config) : config_(std::move(config)), limiter_(config_.max_in_flight) {
    const std::size_t scheme = config_.base_url.find("://");
    const std::size_t slash = config_.base_url.find('/', scheme + 3);
    host_ = config_.base_url.substr(0, slash);
    prefix_ = slash == std::string::npos ? "" : config_.base_url.substr(slash);
    while (!prefix_.empty() && prefix_.back() == '/') prefix_.pop_back();
  }

  const EndpointConfig& config() const { return config_; }

  struct Result {
    nlohmann::json body;
    int attempt = 1;
    double latency_ms = 0.0;
  };

  /// Throws HttpFailure carrying the last error once every attempt failed.
  Result post(const std::string& path, const nlohmann::json& body) {
    std::string last_error = "no attempt made";
    auto backoff = config_.backoff;
    for (int attempt = 1; attempt <= config_.attempts; ++attempt) {
      if (attempt > 1) {
        std::this_thread::sleep_for(backoff);
        backoff *= 2;
      }
      const auto start = std::chrono::steady_clock::now();
      try {
        nlohmann::json reply = post_once(path, body);
        const std::chrono::duration<double, std::milli> elapsed = std::chrono::steady_clock::now() - start;
        return {std::move(reply), attempt, elapsed.count()};
      } catch (const HttpFailure& e) {
        last_error = e.what();
        if (!e.retryable) break;
      }
    }
    throw HttpFailure(last_error, false);
  }

private:
  nlohmann::json post_once(const std::string& path, const nlohmann::json& body) {
    limiter_.acquire();
    struct Release {
      InFlightLimiter& l;
      ~Release() { l.release(); }
    } release{limiter_};

    httplib::Client client(host_);
    const auto secs = config_.timeout.count() / 1000;
    const auto usecs = (config_.timeout.count() % 1000) * 1000;
    client.set_connection_timeout(secs, usecs);
    client.set_read_timeout(secs, usecs);
    client.set_write_timeout(secs, usecs);

    httplib::Headers headers;
    if (const char* key = std::getenv(config_.api_key_env.c_str()); key && *key)
      headers.emplace("Authorization", std::string("Bearer ") + key);

    auto res = client.Post(prefix_ + path, headers, body.dump(), "application/json");
    if (!res) throw HttpFailure("transport error: " + httplib::to_string(res.error()), true);
    if (res->status == 429 || res->status >= 500)
      throw HttpFailure("HTTP " + std::to_string(res->status), true);
    if (res->status < 200 || res->status >= 300)
      throw HttpFailure("HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200), false);
    try {
      return nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::parse_error&) {
      throw HttpFailure("response is not JSON", true);
    }
  }

  EndpointConfig config_;
  InFlightLimiter limiter_;
  std::string host_;
  std::string prefix_;
};

/// Chat-completions backend. The prompt goes out unmodified as the only user
/// message; the first choice's content comes back byte-exact.
class RemoteBackend final : public Backend {
public:
  explicit RemoteBackend(std::shared_ptr<JsonEndpoint> endpoint) : endpoint_(std::move(endpoint)) {}

  static nlohmann::json request_body(const std::string& model, const BackendRequest& req) {
    nlohmann::json body;
    body["model"] = model;
    body["messages"] = nlohmann::json::array({{{"role", "user"}, {"content", req.prompt}}});
    body["temperature"] = req.decode.temperature;
    body["max_tokens"] = req.decode.max_tokens;
    return body;
  }

  BackendResponse respond(const BackendRequest& req, Rng&) override {
    JsonEndpoint::Result result;
    try {
      result = endpoint_->post("/chat/completions", request_body(endpoint_->config().model, req));
    } catch (const HttpFailure& e) {
      throw BackendUnavailable(req.agent_id, req.round, e.what());
    }
    const auto& choices = result.body.find("choices");
    if (choices == result.body.end() || !choices->is_array() || choices->empty())
      throw BackendUnavailable(req.agent_id, req.round, "response has no choices");
    const auto& message = (*choices)[0].value("message", nlohmann::json::object());
    auto content = message.find("content");
    if (content == message.end() || !content->is_string())
      throw BackendUnavailable(req.agent_id, req.round, "first choice has no text content");
    return {content->get<std::string>(), result.latency_ms, result.attempt};
  }

private:
  std::shared_ptr<JsonEndpoint> endpoint_;
};

/// Embeddings from an OpenAI-compatible /embeddings endpoint.
class RemoteEmbedder final : public Embedder {
public:
  explicit RemoteEmbedder(EndpointConfig config) : endpoint_(std::move(config)) {}

  std::vector<Embedding> embed(const std::vector<std::string>& texts) override {
    nlohmann::json body;
    body["model"] = endpoint_.config().model;
    body["input"] = texts;
    JsonEndpoint::Result result;
    try {
      result = endpoint_.post("/embeddings", body);
    } catch (const HttpFailure& e) {
      throw EmbedderUnavailable(std::string("embedding endpoint: ") + e.what());
    }
    std::vector<Embedding> out(texts.size());
    try {
      const auto& data = result.body.at("data");
      if (data.size() != texts.size()) throw EmbedderUnavailable("embedding endpoint returned a different count");
      for (std::size_t i = 0; i < data.size(); ++i) {
        const std::size_t index = data[i].value("index", i);
        if (index >= out.size()) throw EmbedderUnavailable("embedding index out of range");
        out[index] = data[i].at("embedding").get<Embedding>();
      }
    } catch (const nlohmann::json::exception& e) {
      throw EmbedderUnavailable(std::string("malformed embedding response: ") + e.what());
    }
    return out;
  }
  std::string name() const override { return "remote:" + endpoint_.config().model; }

private:
  JsonEndpoint endpoint_;
};

}  // namespace hashnet
