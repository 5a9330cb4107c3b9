#include <gtest/gtest.h>

#include <algorithm>

#include "hashnet/narrative.hpp"
#include "support.hpp"

using namespace hashnet;
using testing_support::source_path;

namespace {

bool has_label(const FocalNarrative& n, const std::string& label) {
  return std::any_of(n.events.begin(), n.events.end(), [&](const NarrativeEvent& e) { return e.label == label; });
}

std::string load_error_field(const std::string& doc) {
  try {
    narrative_from_json(nlohmann::json::parse(doc));
  } catch (const LoadError& e) {
    return e.field();
  }
  return "<no error>";
}

}  // namespace

TEST(Narrative, BundledFukushima) {
  const FocalNarrative n = load_narrative(source_path("data/narratives/fukushima.json"));
  EXPECT_EQ(n.id, "fukushima");
  EXPECT_EQ(n.full_text.rfind("The Fukushima Nuclear Disaster was a 2011 nuclear accident", 0), 0u);
  EXPECT_NE(n.full_text.find("Tōhoku earthquake on March 11, 2011"), std::string::npos);
  EXPECT_NE(n.full_text.find("\n\n"), std::string::npos);
  for (const char* label : {"Earthquake", "Tsunami", "Displacement", "Setsuden"})
    EXPECT_TRUE(has_label(n, label)) << label;
  for (const auto& e : n.events) EXPECT_FALSE(e.description.empty()) << e.label;
}

TEST(Narrative, BundledPhilippinesHasNoEvents) {
  const FocalNarrative n = load_narrative(source_path("data/narratives/philippines.json"));
  EXPECT_FALSE(n.has_events());
  EXPECT_EQ(n.full_text.rfind("In 2022, the Philippines held a national election", 0), 0u);
  EXPECT_NE(n.full_text.find("Ernesto Abella"), std::string::npos);
}

TEST(Narrative, DuplicateLabelIsRejected) {
  const std::string doc = R"({"id":"x","title":"t","full_text":"text","events":[
      {"label":"Tsunami","description":"a"},{"label":"Tsunami","description":"b"}]})";
  EXPECT_EQ(load_error_field(doc), "events[1].label");
}

TEST(Narrative, ValidationNamesFields) {
  EXPECT_EQ(load_error_field(R"({"id":"x","title":"t","full_text":"   "})"), "full_text");
  EXPECT_EQ(load_error_field(R"({"title":"t","full_text":"a"})"), "id");
  EXPECT_EQ(load_error_field(R"({"id":"x","title":"t","full_text":"a","events":[{"label":"L"}]})"),
            "events[0].description");
  EXPECT_EQ(load_error_field(R"({"id":"x","title":"t","full_text":"a","events":{}})"), "events");
  EXPECT_EQ(load_error_field(R"([1,2])"), "");
}

TEST(Narrative, MissingAndMalformedFiles) {
  EXPECT_THROW(load_narrative(source_path("data/narratives/does_not_exist.json")), LoadError);
  const auto dir = testing_support::scratch_dir("narrative");
  std::ofstream(dir / "bad.json") << "{\"id\": ";
  EXPECT_THROW(load_narrative(dir / "bad.json"), LoadError);
}

TEST(Narrative, SaveLoadRoundTrip) {
  const FocalNarrative original = load_narrative(source_path("data/narratives/fukushima.json"));
  const auto dir = testing_support::scratch_dir("narrative_rt");
  save_narrative(original, dir / "copy.json");
  EXPECT_EQ(load_narrative(dir / "copy.json"), original);
}
