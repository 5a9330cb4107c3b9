#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace hashnet {

/// Invalid configuration value. `field()` holds the dotted path of the
/// offending field, e.g. "topology.k".
class ConfigError : public std::runtime_error {
public:
  ConfigError(std::string field, const std::string& what)
      : std::runtime_error(field + ": " + what), field_(std::move(field)), message_(what) {}

  const std::string& field() const noexcept { return field_; }
  /// The message without the field prefix.
  const std::string& message() const noexcept { return message_; }

private:
  std::string field_;
  std::string message_;
};

/// Failure reading a document from disk (missing file, malformed content,
/// invariant violations).
class LoadError : public std::runtime_error {
public:
  LoadError(std::string field, const std::string& what)
      : std::runtime_error(field.empty() ? what : field + ": " + what),
        field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

private:
  std::string field_;
};

/// Model output contained nothing usable as a hashtag.
class ParseError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Metric evaluated outside its domain (empty distribution, empty input).
class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

class BackendUnavailable : public std::runtime_error {
public:
  BackendUnavailable(int agent_id, int round, const std::string& what)
      : std::runtime_error("agent " + std::to_string(agent_id) + " round " +
                           std::to_string(round) + ": " + what),
        agent_id_(agent_id), round_(round) {}

  int agent_id() const noexcept { return agent_id_; }
  int round() const noexcept { return round_; }

private:
  int agent_id_;
  int round_;
};

class ReplayGap : public std::runtime_error {
public:
  ReplayGap(int agent_id, int round)
      : std::runtime_error("no recorded response for agent " +
                           std::to_string(agent_id) + " in round " +
                           std::to_string(round)),
        agent_id_(agent_id), round_(round) {}

  int agent_id() const noexcept { return agent_id_; }
  int round() const noexcept { return round_; }

private:
  int agent_id_;
  int round_;
};

/// The embedding provider could not produce vectors.
class EmbedderUnavailable : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace hashnet
