#include <gtest/gtest.h>

#include "mock_endpoint.hpp"
#include "parrot/corpus.hpp"
#include "parrot/error.hpp"
#include "parrot/scorer_client.hpp"
#include "test_util.hpp"

using namespace parrot;
using namespace parrot::scoring;
using parrot::testing::fixture;
using parrot::testing::MockEndpoint;
using parrot::testing::MockReply;
using parrot::testing::scratch_dir;
using parrot::testing::spit;

namespace {

const Direction kDeEn = Direction::parse("de-en");

ScoreRequest fixture_request(bool with_refs = false) {
  const auto pairs = load_parallel(fixture("newstest.de"), fixture("newstest.en"), kDeEn, "newstest");
  const auto translations = load_system_translations(fixture("systems.tsv"), kDeEn);
  const auto sources = index_sources(pairs);
  SourceIndex refs;
  for (const auto& p : pairs) refs.emplace(p.id, SourceSegment{p.target, p.direction});
  return make_request(translations, sources, with_refs ? &refs : nullptr);
}

nlohmann::json reply_for(const nlohmann::json& request, double base) {
  nlohmann::json items = nlohmann::json::array();
  double v = base;
  for (const auto& item : request.at("items")) items.push_back({{"id", item.at("id")}, {"score", v++}});
  return {{"items", items}, {"model", request.at("model")}};
}

}  // namespace

TEST(ScoreRequest, WireFormat) {
  const auto req = fixture_request();
  ASSERT_EQ(req.items.size(), 6u);
  const auto j = to_json(req);
  EXPECT_EQ(j["model"], "Unbabel/wmt22-comet-da");
  EXPECT_EQ(j["items"][0]["id"], "0");
  EXPECT_EQ(j["items"][5]["id"], "5");
  EXPECT_FALSE(j["items"][0].contains("reference"));
  EXPECT_EQ(j["items"][0]["hypothesis"], "The government presented new rules for the housing market on Monday.");
  EXPECT_TRUE(j["items"][0]["source"].get<std::string>().starts_with("Die Regierung"));

  const auto with_refs = to_json(fixture_request(true));
  EXPECT_TRUE(with_refs["items"][3].contains("reference"));
  EXPECT_EQ(score_item_from_json(with_refs["items"][3]).reference, fixture_request(true).items[3].reference);
}

TEST(ScoreRequest, Validation) {
  ScoreRequest req;
  EXPECT_THROW(req.validate(), ValidationError);
  req.items = {{"a", "s", "h", std::nullopt}, {"a", "s", "h", std::nullopt}};
  EXPECT_THROW(req.validate(), ValidationError);
  req.items[1].id = "";
  EXPECT_THROW(req.validate(), ValidationError);
  req.items[1].id = "b";
  req.validate();
  req.model.clear();
  EXPECT_THROW(req.validate(), ValidationError);

  const auto translations = load_system_translations(fixture("systems.tsv"), kDeEn);
  EXPECT_THROW(make_request(translations, SourceIndex{}, nullptr), ValidationError);
}

TEST(ScoreResponse, ValidatesAgainstTheRequest) {
  const auto req = fixture_request();
  const auto good = reply_for(to_json(req), 50);
  EXPECT_EQ(response_from_json(good, req).items.size(), 6u);

  auto missing = good;
  missing["items"].erase(missing["items"].begin());
  EXPECT_THROW(response_from_json(missing, req), ValidationError);
  auto duplicate = good;
  duplicate["items"][1]["id"] = "0";
  EXPECT_THROW(response_from_json(duplicate, req), ValidationError);
  auto unknown = good;
  unknown["items"].push_back({{"id", "99"}, {"score", 1.0}});
  EXPECT_THROW(response_from_json(unknown, req), ValidationError);
  auto neither = good;
  neither["items"][2].erase("score");
  EXPECT_THROW(response_from_json(neither, req), ValidationError);
  EXPECT_THROW(response_from_json(nlohmann::json::array(), req), ValidationError);
  EXPECT_THROW(response_from_json({{"error", "model not loaded"}}, req), EndpointError);

  auto partial = good;
  partial["items"][2] = {{"id", "2"}, {"error", "too long"}};
  const auto r = response_from_json(partial, req);
  EXPECT_FALSE(r.items[2].score.has_value());
  EXPECT_EQ(*r.items[2].error, "too long");
}

TEST(OfflineScores, FixtureJoinsOntoTranslations) {
  const auto req = fixture_request();
  const auto resp = read_offline_scores(fixture("scores.jsonl"), req);
  const auto translations = load_system_translations(fixture("systems.tsv"), kDeEn);
  const auto scored = join_scores(translations, resp);
  ASSERT_EQ(scored.size(), 6u);
  EXPECT_DOUBLE_EQ(scored[0].score, 93.12);
  EXPECT_EQ(scored[0].system, "Online-A");
  EXPECT_DOUBLE_EQ(scored[5].score, 55.3);
  EXPECT_EQ(scored[5].segment_id, "newstest:1");
}

TEST(OfflineScores, FailedItemsAreReported) {
  const auto dir = scratch_dir("scorer_offline");
  spit(dir / "s.jsonl",
       "{\"id\":\"0\",\"score\":1}\n{\"id\":\"1\",\"error\":\"oom\"}\n{\"id\":\"2\",\"score\":3}\n"
       "{\"id\":\"3\",\"score\":4}\n{\"id\":\"4\",\"score\":5}\n{\"id\":\"5\",\"score\":6}\n");
  const auto translations = load_system_translations(fixture("systems.tsv"), kDeEn);
  std::vector<std::string> failed;
  const auto scored = join_scores(translations, read_offline_scores(dir / "s.jsonl", fixture_request()), &failed);
  EXPECT_EQ(scored.size(), 5u);
  ASSERT_EQ(failed.size(), 1u);
  EXPECT_EQ(failed[0], "newstest:0/Online-B: oom");

  spit(dir / "bad.jsonl", "{\"id\":\"0\",\"score\":\"high\"}\n");
  EXPECT_THROW(read_offline_scores(dir / "bad.jsonl", fixture_request()), ValidationError);
}

TEST(RemoteScores, PostsToScoreRoute) {
  MockEndpoint mock([](const nlohmann::json& req, std::size_t) { return MockReply{200, reply_for(req, 70).dump()}; });
  const auto req = fixture_request(true);
  const auto resp = score_remote(mock.url(), req, std::chrono::seconds(5));
  ASSERT_EQ(resp.items.size(), 6u);
  EXPECT_DOUBLE_EQ(*resp.items[4].score, 74.0);
  ASSERT_EQ(mock.paths().size(), 1u);
  EXPECT_EQ(mock.paths()[0], "/v1/score");
  EXPECT_EQ(mock.requests()[0], nlohmann::json::parse(to_json(req).dump()));
}

TEST(RemoteScores, ErrorsSurfaceAsEndpointErrors) {
  MockEndpoint mock([](const nlohmann::json&, std::size_t) { return MockReply{503, "{\"error\":\"busy\"}"}; });
  EXPECT_THROW(score_remote(mock.url(), fixture_request(), std::chrono::seconds(5)), EndpointError);
  mock.set_handler([](const nlohmann::json&, std::size_t) { return MockReply{200, "{\"error\":\"no model\"}"}; });
  EXPECT_THROW(score_remote(mock.url(), fixture_request(), std::chrono::seconds(5)), EndpointError);
  EXPECT_THROW(score_remote("http://127.0.0.1:1", fixture_request(), std::chrono::milliseconds(500)), EndpointError);
}
