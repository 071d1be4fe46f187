#include <gtest/gtest.h>

#include "parrot/bleu.hpp"
#include "parrot/error.hpp"
#include "parrot/io.hpp"
#include "parrot/prompt.hpp"
#include "parrot/report.hpp"
#include "test_util.hpp"

using namespace parrot;
using namespace parrot::eval;
using parrot::testing::fixture;
using parrot::testing::scratch_dir;
using parrot::testing::spit;

namespace {

std::string join(const std::vector<std::string>& lines) {
  std::string out;
  for (const auto& l : lines) out += l + "\n";
  return out;
}

}  // namespace

TEST(HintCondition, ParseAndName) {
  for (auto c : {HintCondition::none, HintCondition::no_error, HintCondition::minor, HintCondition::major,
                 HintCondition::preferred, HintCondition::unpreferred}) {
    EXPECT_EQ(parse_hint_condition(to_string(c)), c);
  }
  EXPECT_EQ(parse_hint_condition("no-error"), HintCondition::no_error);
  EXPECT_THROW(parse_hint_condition("best"), ValidationError);
}

TEST(HintSweep, RowsScoresAndDeltas) {
  const auto dir = scratch_dir("report_sweep");
  const auto refs = io::read_lines(fixture("newstest.en"));
  auto degraded = refs;
  degraded[0] = "Completely different words here.";
  degraded[3] = "";
  spit(dir / "none.txt", join(degraded));
  spit(dir / "major.txt", join(refs));
  spit(dir / "none.comet", join(std::vector<std::string>(refs.size(), "0.5")));
  spit(dir / "major.comet", join(std::vector<std::string>(refs.size(), "{\"score\": 0.75}")));

  const auto report = hint_sweep_report(
      {{HintCondition::major, {dir / "major.txt", dir / "major.comet"}},
       {HintCondition::none, {dir / "none.txt", dir / "none.comet"}}},
      fixture("newstest.en"), Direction::parse("de-en"));

  ASSERT_EQ(report.rows.size(), 2u);
  EXPECT_EQ(report.rows[0].condition, HintCondition::none);
  EXPECT_EQ(report.rows[1].condition, HintCondition::major);
  const double base = corpus_bleu(degraded, refs, TokenizerKind::intl_13a).score;
  EXPECT_DOUBLE_EQ(report.rows[0].bleu.score, base);
  EXPECT_EQ(report.rows[1].bleu.score, 100.0);
  EXPECT_EQ(report.rows[0].n, refs.size());
  EXPECT_DOUBLE_EQ(*report.rows[0].delta_bleu, 0.0);
  EXPECT_DOUBLE_EQ(*report.rows[1].delta_bleu, 100.0 - base);
  EXPECT_DOUBLE_EQ(*report.rows[1].comet, 0.75);
  EXPECT_DOUBLE_EQ(*report.rows[1].delta_comet, 0.25);

  const auto md = to_markdown(report);
  EXPECT_NE(md.find("| None |"), std::string::npos);
  EXPECT_NE(md.find("| Major Err. | 100.00 |"), std::string::npos);
  const auto j = to_json(report);
  EXPECT_EQ(j["rows"][1]["condition"], "major");
  EXPECT_EQ(j["tokenizer"], "13a");
}

TEST(HintSweep, ZhTargetSelectsCharTokenizer) {
  const auto dir = scratch_dir("report_zh");
  spit(dir / "ref.zh", "检查情况显示\n");
  spit(dir / "hyp.zh", "检查情况显示\n");
  const auto report = hint_sweep_report({{HintCondition::none, {dir / "hyp.zh", std::nullopt}}}, dir / "ref.zh",
                                        Direction::parse("en-zh"));
  EXPECT_EQ(report.tokenizer, TokenizerKind::char_zh);
  EXPECT_FALSE(report.rows[0].comet.has_value());
}

TEST(HintSweep, LineMismatchNamesTheRun) {
  const auto dir = scratch_dir("report_mismatch");
  spit(dir / "short.txt", "one line\n");
  try {
    hint_sweep_report({{HintCondition::minor, {dir / "short.txt", std::nullopt}}}, fixture("newstest.en"),
                      Direction::parse("de-en"));
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("minor"), std::string::npos) << e.what();
  }
}

TEST(HintSweep, CometCountMismatchAndBadScores) {
  const auto dir = scratch_dir("report_comet");
  const auto refs = io::read_lines(fixture("newstest.en"));
  spit(dir / "hyp.txt", join(refs));
  spit(dir / "few.comet", "0.1\n");
  EXPECT_THROW(hint_sweep_report({{HintCondition::none, {dir / "hyp.txt", dir / "few.comet"}}}, fixture("newstest.en"),
                                 Direction::parse("de-en")),
               ValidationError);
  spit(dir / "bad.comet", "abc\n");
  EXPECT_THROW(read_segment_scores(dir / "bad.comet"), ValidationError);
  spit(dir / "nan.comet", "nan\n");
  EXPECT_THROW(read_segment_scores(dir / "nan.comet"), ValidationError);
}

TEST(PreferenceReport, SplitsBothHalvesAgainstReferences) {
  const std::vector<std::string> refs = {"the cat sat on the mat", "a dog ran home today", "plain text only"};
  const std::vector<std::string> responses = {join_preferred("the cat sat on the mat", "a cat sits"),
                                              join_preferred("a dog ran home", "the dog ran home today"),
                                              "plain text only"};
  const auto r = preference_lexical_report(responses, refs, TokenizerKind::intl_13a);
  EXPECT_EQ(r.n_preferred, 3u);
  EXPECT_EQ(r.n_unpreferred, 2u);
  EXPECT_DOUBLE_EQ(r.preferred.score,
                   corpus_bleu({"the cat sat on the mat", "a dog ran home", "plain text only"}, refs,
                               TokenizerKind::intl_13a).score);
  ASSERT_TRUE(r.unpreferred.has_value());
  EXPECT_DOUBLE_EQ(r.unpreferred->score, corpus_bleu({"a cat sits", "the dog ran home today"},
                                                     {refs[0], refs[1]}, TokenizerKind::intl_13a).score);
  EXPECT_NE(to_markdown(r).find("| Unprefer. |"), std::string::npos);
  EXPECT_EQ(to_json(r)["unpreferred"]["n"], 2);
}

TEST(PreferenceReport, NoRejectedHalves) {
  const auto r = preference_lexical_report(std::vector<std::string>{"x y z"}, std::vector<std::string>{"x y z"}, TokenizerKind::intl_13a);
  EXPECT_FALSE(r.unpreferred.has_value());
  EXPECT_TRUE(to_json(r)["unpreferred"]["bleu"].is_null());
  EXPECT_THROW(preference_lexical_report(std::vector<std::string>{"a"}, std::vector<std::string>{"a", "b"}, TokenizerKind::intl_13a), ValidationError);
}
