#include <gtest/gtest.h>

#include <random>

#include <json.hpp>

#include "hashnet/hashtag.hpp"
#include "support.hpp"

using namespace hashnet;

TEST(Parse, SentenceWithHashtag) {
  const Hashtag h = parse_response("Sure! I'll go with #FukushimaDisaster");
  EXPECT_EQ(h.raw, "#FukushimaDisaster");
  EXPECT_EQ(h.normalized, "fukushimadisaster");
}

TEST(Parse, CapsAtFiveWords) {
  EXPECT_EQ(parse_response("#Bongbong Marcos 2022 landslide victory imminent").raw,
            "#Bongbong Marcos 2022 landslide victory");
}

TEST(Parse, ReasoningBlockRemoved) {
  EXPECT_EQ(parse_response("<think>long deliberation about #Tsunami</think>\n#Setsuden").raw, "#Setsuden");
}

TEST(Parse, HandLabeledReasoningOutputs) {
  const auto cases = nlohmann::json::parse(testing_support::read_text(testing_support::source_path("tests/data/reasoning_outputs.json")));
  ASSERT_EQ(cases.size(), 20u);
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const std::string text = cases[i]["text"];
    const std::string expected = cases[i]["expected"];
    EXPECT_EQ(parse_response(text).raw, expected) << "case " << i << ": " << text;
  }
}

TEST(Parse, PlainTextWithoutHash) {
  const Hashtag h = parse_response("  Fukushima Disaster  \n");
  EXPECT_EQ(h.raw, "Fukushima Disaster");
  EXPECT_EQ(h.normalized, "fukushimadisaster");
}

TEST(Parse, TrailingPunctuationDropped) {
  EXPECT_EQ(parse_response("#NoNukes!").raw, "#NoNukes");
  EXPECT_EQ(parse_response("(#Tsunami)").raw, "#Tsunami");
  EXPECT_EQ(parse_response("'#Tsunami'").raw, "#Tsunami");
}

TEST(Parse, HashInsideWordIsNotAHashtag) {
  EXPECT_EQ(parse_response("C#major then #Music").raw, "#Music");
}

TEST(Parse, SecondHashtagStopsTheFirst) { EXPECT_EQ(parse_response("#Tohoku #Earthquake").raw, "#Tohoku"); }

TEST(Parse, UnclosedReasoningDropsTheRest) {
  EXPECT_EQ(parse_response("#Fukushima\n<think>maybe #Tsunami instead").raw, "#Fukushima");
}

TEST(Parse, OrphanCloseTagDropsThePrefix) {
  EXPECT_EQ(parse_response("weighing #Japan vs #Tsunami</thinking>\n#Tsunami").raw, "#Tsunami");
}

TEST(Parse, EmptyOutputIsAnError) {
  EXPECT_THROW(parse_response(""), ParseError);
  EXPECT_THROW(parse_response("   \n\t "), ParseError);
  EXPECT_THROW(parse_response("<think>only thoughts</think>"), ParseError);
  EXPECT_THROW(parse_response("<think>never finished"), ParseError);
  EXPECT_THROW(parse_response("!!!"), ParseError);
}

TEST(Normalize, Examples) {
  EXPECT_EQ(normalize_hashtag("#FukushimaDisaster"), "fukushimadisaster");
  EXPECT_EQ(normalize_hashtag("#Fukushima Disaster"), "fukushimadisaster");
  EXPECT_EQ(normalize_hashtag("#fukushima!"), "fukushima");
  EXPECT_EQ(normalize_hashtag("#Save_Energy-2011"), "saveenergy2011");
  EXPECT_EQ(normalize_hashtag("#Tōhoku"), "tōhoku");
  EXPECT_EQ(normalize_hashtag("#ÉNERGIE"), "énergie");
  EXPECT_EQ(normalize_hashtag("#節電"), "節電");
  EXPECT_EQ(normalize_hashtag("#Pray\xE2\x80\x94Japan\xF0\x9F\x99\x8F"), "prayjapan");
}

TEST(Normalize, Idempotent) {
  std::mt19937_64 gen(17);
  const std::vector<std::string> alphabet = {"a", "Z", "7", "#", " ", "-", "_", "!", "é", "É", "ō", "節",
                                             "\xE2\x80\x94", "\xF0\x9F\x94\xA5", "\xC2\xA0", "\xFF", "\x01"};
  std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
  for (int i = 0; i < 5000; ++i) {
    std::string s;
    const int len = static_cast<int>(gen() % 24);
    for (int j = 0; j < len; ++j) s += alphabet[pick(gen)];
    const std::string once = normalize_hashtag(s);
    ASSERT_EQ(normalize_hashtag(once), once) << "input: " << s;
    ASSERT_EQ(once.find('#'), std::string::npos);
  }
}

TEST(Normalize, ParsedHashtagsMatchTheirNormalForm) {
  for (const char* text : {"#Fukushima", "I pick #Setsuden.", "> **#Radiation**", "Fukushima Disaster"}) {
    const Hashtag h = parse_response(text);
    EXPECT_EQ(h.normalized, normalize_hashtag(h.raw));
    EXPECT_FALSE(h.normalized.empty());
  }
}
