#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include "parrot/error.hpp"
#include "parrot/lang.hpp"

using namespace parrot;

TEST(LangCode, RegistryDisplayNames) {
  EXPECT_EQ(LangCode("en").display_name(), "English");
  EXPECT_EQ(LangCode("zh").display_name(), "Chinese");
  EXPECT_EQ(LangCode("de").display_name(), "German");
  EXPECT_EQ(LangCode("ro").display_name(), "Romanian");
  for (const auto& code : registered_languages()) EXPECT_FALSE(LangCode(code).display_name().empty());
}

TEST(LangCode, UnknownRejectedUntilRegistered) {
  EXPECT_THROW(LangCode("xx"), ValidationError);
  EXPECT_FALSE(is_registered_language("xx"));
  register_language("xx", "Testish");
  EXPECT_EQ(LangCode("xx").display_name(), "Testish");
}

TEST(Direction, ParseForms) {
  const auto d = Direction::parse("de-en");
  EXPECT_EQ(d.src.code(), "de");
  EXPECT_EQ(d.tgt.code(), "en");
  EXPECT_EQ(Direction::parse("zh2en").str(), "zh-en");
  EXPECT_EQ(Direction::parse("en_zh").str(), "en-zh");
  EXPECT_THROW(Direction::parse("en-en"), ValidationError);
  EXPECT_THROW(Direction::parse("english"), ValidationError);
  EXPECT_THROW(Direction::parse("en-qq"), ValidationError);
}

TEST(Direction, JsonRoundTrip) {
  const auto d = Direction::parse("zh-en");
  nlohmann::json j = d;
  EXPECT_EQ(j.dump(), R"({"src":"zh","tgt":"en"})");
  EXPECT_EQ(direction_from_json(j), d);
}
