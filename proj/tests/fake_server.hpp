#pragma once

// In-process OpenAI-compatible server for exercising the HTTP backends.

#include <atomic>
#include <chrono>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <json.hpp>

namespace testing_support {

class FakeChatServer {
public:
  struct Seen {
    nlohmann::json body;
    std::string authorization;
    std::string path;
  };

  // Replies with the given content; `fail_first` requests get HTTP 503.
  std::function<std::string(const nlohmann::json&)> reply = [](const nlohmann::json&) { return std::string("#Fukushima"); };
  std::atomic<int> fail_first{0};
  std::atomic<int> status_override{0};
  std::chrono::milliseconds delay{0};

  FakeChatServer() {
    auto handler = [this](const httplib::Request& req, httplib::Response& res) {
      const int now = ++in_flight_;
      for (int seen = max_in_flight_.load(); now > seen && !max_in_flight_.compare_exchange_weak(seen, now);) {
      }
      if (delay.count() > 0) std::this_thread::sleep_for(delay);
      {
        std::lock_guard lock(mutex_);
        seen_.push_back({nlohmann::json::parse(req.body, nullptr, false), req.get_header_value("Authorization"), req.path});
      }
      const int n = ++hits_;
      if (status_override.load() != 0) {
        res.status = status_override.load();
        res.set_content("{\"error\":\"forced\"}", "application/json");
      } else if (n <= fail_first.load()) {
        res.status = 503;
        res.set_content("busy", "text/plain");
      } else if (req.path == "/v1/embeddings") {
        res.set_content(embeddings(nlohmann::json::parse(req.body)).dump(), "application/json");
      } else {
        nlohmann::json body = nlohmann::json::parse(req.body);
        nlohmann::json out;
        out["choices"] = nlohmann::json::array({{{"index", 0}, {"message", {{"role", "assistant"}, {"content", reply(body)}}}}});
        res.set_content(out.dump(), "application/json");
      }
      --in_flight_;
    };
    server_.Post("/v1/chat/completions", handler);
    server_.Post("/v1/embeddings", handler);
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  ~FakeChatServer() {
    server_.stop();
    thread_.join();
  }

  std::string base_url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1"; }
  int hits() const { return hits_.load(); }
  int max_in_flight() const { return max_in_flight_.load(); }
  std::vector<Seen> seen() {
    std::lock_guard lock(mutex_);
    return seen_;
  }

private:
  // Deterministic toy embedding: letter histogram over a-z.
  static nlohmann::json embeddings(const nlohmann::json& req) {
    nlohmann::json out;
    out["data"] = nlohmann::json::array();
    std::size_t i = 0;
    for (const auto& text : req.at("input")) {
      std::vector<double> v(26, 0.0);
      for (char c : text.get<std::string>())
        if (c >= 'a' && c <= 'z') v[static_cast<std::size_t>(c - 'a')] += 1.0;
        else if (c >= 'A' && c <= 'Z') v[static_cast<std::size_t>(c - 'A')] += 1.0;
      out["data"].push_back({{"index", i++}, {"embedding", v}});
    }
    return out;
  }

  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<int> hits_{0};
  std::atomic<int> in_flight_{0};
  std::atomic<int> max_in_flight_{0};
  std::mutex mutex_;
  std::vector<Seen> seen_;
};

/// A base URL nothing listens on.
inline std::string unreachable_base_url() { return "http://127.0.0.1:1/v1"; }

}  // namespace testing_support
