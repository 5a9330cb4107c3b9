#pragma once

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hashnet/errors.hpp"

namespace hashnet {

/// One author-segmented causal event of a narrative, used as an alignment
/// target.
struct NarrativeEvent {
  std::string label;
  std::string description;

  friend bool operator==(const NarrativeEvent&, const NarrativeEvent&) = default;
};

/// The shared event account every agent reads. `full_text` is inserted into
/// prompts verbatim; `events` may be empty, in which case alignment is not
/// available.
struct FocalNarrative {
  std::string id;
  std::string title;
  std::string full_text;
  std::vector<NarrativeEvent> events;

  bool has_events() const { return !events.empty(); }

  friend bool operator==(const FocalNarrative&, const FocalNarrative&) = default;
};

namespace detail {

inline std::string require_string(const nlohmann::json& obj, const std::string& key, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end()) throw LoadError(path + key, "missing field");
  if (!it->is_string()) throw LoadError(path + key, "expected a string");
  return it->get<std::string>();
}

inline bool is_blank(const std::string& s) {
  return s.find_first_not_of(" \t\r\n") == std::string::npos;
}

}  // namespace detail

/// Validates and converts a parsed narrative document.
inline FocalNarrative narrative_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw LoadError("", "narrative document must be a JSON object");
  FocalNarrative out;
  out.id = detail::require_string(doc, "id", "");
  out.title = detail::require_string(doc, "title", "");
  out.full_text = detail::require_string(doc, "full_text", "");
  if (detail::is_blank(out.full_text)) throw LoadError("full_text", "must not be empty");

  if (auto it = doc.find("events"); it != doc.end()) {
    if (!it->is_array()) throw LoadError("events", "expected an array");
    std::set<std::string> seen;
    for (std::size_t i = 0; i < it->size(); ++i) {
      const std::string path = "events[" + std::to_string(i) + "].";
      const auto& ev = (*it)[i];
      if (!ev.is_object()) throw LoadError(path.substr(0, path.size() - 1), "expected an object");
      NarrativeEvent e{detail::require_string(ev, "label", path), detail::require_string(ev, "description", path)};
      if (detail::is_blank(e.label)) throw LoadError(path + "label", "must not be empty");
      if (detail::is_blank(e.description)) throw LoadError(path + "description", "must not be empty");
      if (!seen.insert(e.label).second) throw LoadError(path + "label", "duplicate event label \"" + e.label + "\"");
      out.events.push_back(std::move(e));
    }
  }
  return out;
}

inline nlohmann::ordered_json narrative_to_json(const FocalNarrative& n) {
  nlohmann::ordered_json doc;
  doc["id"] = n.id;
  doc["title"] = n.title;
  doc["full_text"] = n.full_text;
  doc["events"] = nlohmann::ordered_json::array();
  for (const auto& e : n.events) {
    nlohmann::ordered_json ev;
    ev["label"] = e.label;
    ev["description"] = e.description;
    doc["events"].push_back(std::move(ev));
  }
  return doc;
}

inline FocalNarrative load_narrative(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("", "cannot open narrative file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(buf.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw LoadError("", path.string() + ": malformed narrative document: " + e.what());
  }
  return narrative_from_json(doc);
}

inline void save_narrative(const FocalNarrative& n, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw LoadError("", "cannot write " + path.string());
  out << narrative_to_json(n).dump(2) << '\n';
}

}  // namespace hashnet
