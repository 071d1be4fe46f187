#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <set>
#include <random>

#include "parrot/corpus.hpp"
#include "parrot/error.hpp"
#include "parrot/instructions.hpp"
#include "parrot/mqm.hpp"
#include "parrot/prompt.hpp"
#include "test_util.hpp"

using namespace parrot;

namespace {

const char* kZhSource =
    "检查情况显示，市场销售的粮油、肉类、水果、蔬菜、蛋奶等生活必需品供应充足，商品价格基本稳定，未发现严重违法违规行为，市场经营秩序总体平稳。";
const char* kPreferred =
    "The inspection results showed that there was an adequate supply of daily necessities, including grain, oil, "
    "meat, fruit, vegetable, milk, and eggs in the market and commodity prices basically remain stable, the "
    "administration found no serious offensive and noncompliant conducts, and the market order remains stable on "
    "the whole.";
const char* kRejected =
    "The results of the inspection indicate the sufficient supply of living necessities on marketing including "
    "cereals and oils, meat, fruits, vegetables, eggs and milk, and the basically stabilized commodity price. The "
    "inspection hasn’t found serious violation of laws and regulations. The market order is stable on an overall "
    "basis.";

const Direction kZhEn = Direction::parse("zh-en");

std::vector<SentencePair> corpus(std::size_t n) {
  std::vector<SentencePair> pairs;
  for (std::size_t i = 0; i < n; ++i) {
    pairs.push_back({"c:" + std::to_string(i), kZhEn, "源" + std::to_string(i), "target " + std::to_string(i % 7), "c"});
  }
  return pairs;
}

std::uint64_t replay_below(std::mt19937_64& eng, std::uint64_t n) {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x = eng();
  while (x >= limit) x = eng();
  return x % n;
}

}  // namespace

TEST(InstructionPool, DefaultsAndInvariant) {
  const auto pool = InstructionPool::defaults();
  ASSERT_EQ(pool.size(), InstructionPool::kSeedCount);
  EXPECT_EQ(pool.instantiate(0, kZhEn), "Translate the following sentences from Chinese to English.");
  EXPECT_EQ(pool.instantiate(1, Direction::parse("en-de")),
            "Please provide the German translation for the following sentences.");
  EXPECT_THROW(InstructionPool({}), ValidationError);
  EXPECT_THROW(InstructionPool({"Translate it."}), ValidationError);
  EXPECT_THROW(InstructionPool({"{SRC} to {TGT} and {TGT}"}), ValidationError);
  EXPECT_NO_THROW(InstructionPool({"Into {TGT}, please."}));
}

TEST(InstructionPool, FromFileSkipsCommentsAndDigestTracksContent) {
  const auto dir = parrot::testing::scratch_dir("pool");
  parrot::testing::spit(dir / "pool.txt", "# pool\n\nTranslate from {SRC} to {TGT}.\n  Give the {TGT} version.  \n");
  const auto pool = InstructionPool::from_file(dir / "pool.txt");
  ASSERT_EQ(pool.size(), 2u);
  EXPECT_EQ(pool.entries()[1], "Give the {TGT} version.");
  EXPECT_NE(pool.digest(), InstructionPool::defaults().digest());
  EXPECT_EQ(pool.digest(), InstructionPool::from_file(dir / "pool.txt").digest());
}

TEST(BuildTranslation, WorkedExampleRow) {
  const std::vector<SentencePair> pairs = {{"t1", kZhEn, kZhSource, kPreferred, "ref"}};
  const InstructionPool pool({"Translate the following sentences from {SRC} to {TGT}."});
  const auto ex = build_translation(pairs, pool, 1);
  ASSERT_EQ(ex.size(), 1u);
  EXPECT_EQ(ex[0].instruction, "Translate the following sentences from Chinese to English.");
  EXPECT_EQ(ex[0].input, kZhSource);
  EXPECT_EQ(ex[0].response, kPreferred);
  EXPECT_FALSE(ex[0].hint.has_value());
  EXPECT_EQ(ex[0].kind, InstructionKind::translation);
  EXPECT_TRUE(build_translation({}, pool, 1).empty());
}

TEST(BuildTranslation, PoolUsageMatchesIndependentReplay) {
  const auto pool = InstructionPool::defaults();
  const auto ex = build_translation(corpus(100), pool, 77);
  std::map<std::string, int> usage;
  for (const auto& e : ex) ++usage[e.instruction];

  std::mt19937_64 eng(77);
  std::map<std::string, int> expected;
  for (int i = 0; i < 100; ++i) ++expected[pool.instantiate(replay_below(eng, 3), kZhEn)];
  EXPECT_EQ(usage, expected);
}

TEST(BuildTranslation, MultisetOfInputResponseEqualsCorpus) {
  const auto pairs = corpus(40);
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto ex = build_translation(pairs, InstructionPool::defaults(), seed);
    std::multiset<std::pair<std::string, std::string>> a, b;
    for (const auto& e : ex) a.emplace(e.input, e.response);
    for (const auto& p : pairs) b.emplace(p.source, p.target);
    EXPECT_EQ(a, b);
  }
}

TEST(BuildContrastive, WorkedExampleRow) {
  SourceIndex sources;
  sources.emplace("t1", SourceSegment{kZhSource, kZhEn});
  const quality::ContrastivePair pair{"t1", {"t1", "good", kPreferred, 92, quality::ScoreSource::automatic},
                                      {"t1", "bad", kRejected, 80, quality::ScoreSource::automatic}};
  const auto ex = build_contrastive({pair}, sources, InstructionPool::defaults(), {}, 0);
  ASSERT_EQ(ex.size(), 1u);
  EXPECT_EQ(ex[0].hint, "We prefer to translate it to");
  EXPECT_EQ(ex[0].response, std::string("<p>") + kPreferred + "</p> rather than <p>" + kRejected + "</p>");
  EXPECT_EQ(ex[0].kind, InstructionKind::contrastive);
  EXPECT_EQ(ex[0].meta.systems, (std::vector<std::string>{"good", "bad"}));
  const auto split = extract_preferred(ex[0].response);
  EXPECT_EQ(split.preferred, kPreferred);
  EXPECT_EQ(split.rejected, kRejected);
}

TEST(BuildContrastive, TrivialTemplate) {
  SourceIndex sources;
  sources.emplace("s", SourceSegment{"src", kZhEn});
  const quality::ContrastivePair pair{"s", {"s", "x", "A", 9, quality::ScoreSource::automatic},
                                      {"s", "y", "B", 1, quality::ScoreSource::automatic}};
  EXPECT_EQ(build_contrastive({pair}, sources, InstructionPool::defaults(), {}, 0)[0].response,
            "<p>A</p> rather than <p>B</p>");
  auto bad = pair;
  std::swap(bad.preferred, bad.rejected);
  EXPECT_THROW(build_contrastive({bad}, sources, InstructionPool::defaults(), {}, 0), ValidationError);
  SourceIndex empty;
  EXPECT_THROW(build_contrastive({pair}, empty, InstructionPool::defaults(), {}, 0), ValidationError);
}

TEST(BuildErrorGuided, WorkedExampleRows) {
  const std::string header = "system\tdoc\tdoc_id\tseg_id\trater\tsource\ttarget\tcategory\tseverity\n";
  std::string major_target = kRejected;
  major_target.replace(major_target.find("on marketing"), 12, "<v>on marketing</v>");
  std::string minor_target = kRejected;
  minor_target.replace(minor_target.find("inspection indicate"), 10, "<v>inspection</v>");
  const auto anns = mqm::parse_mqm_tsv_text(
      header + "sys\td\t1\t1\tr1\t" + kZhSource + "\t" + major_target + "\tAccuracy/Mistranslation\tMajor\n" +
          "sys\td\t1\t1\tr2\t" + kZhSource + "\t" + minor_target + "\tFluency/Grammar\tMinor\n" +
          "sys\td\t1\t1\tr3\t" + kZhSource + "\t" + kPreferred + "\tNo-error\tNo-error\n",
      kZhEn);
  const auto ex = build_error_guided(anns, InstructionPool::defaults(), {}, 0);
  ASSERT_EQ(ex.size(), 3u);
  EXPECT_EQ(ex[0].hint, "A translation with major accuracy/mistranslation errors could be");
  EXPECT_EQ(ex[0].response, major_target);
  EXPECT_NE(ex[0].response.find("<v>on marketing</v>"), std::string::npos);
  EXPECT_EQ(ex[0].meta.error_level, quality::ErrorLevel::major);
  EXPECT_EQ(ex[1].hint, "A translation with minor fluency/grammar errors could be");
  EXPECT_EQ(ex[1].response, minor_target);
  EXPECT_EQ(ex[2].hint, "A translation with no errors could be");
  EXPECT_EQ(ex[2].response.find("<v>"), std::string::npos);
  for (std::size_t i = 0; i < ex.size(); ++i) EXPECT_EQ(mqm::split_markup(ex[i].response).plain, anns[i].target_plain);
}

TEST(BuildErrorGuided, WorstSeverityNamesTheHint) {
  mqm::AnnotatedTranslation a{"1", "s", "r", kZhEn, "src", "a b c d e", {}};
  a.spans = {{0, 1, mqm::ErrorCategory("Fluency/Grammar"), mqm::Severity::minor},
             {2, 3, mqm::ErrorCategory("Accuracy/Addition"), mqm::Severity::major}};
  const auto ex = build_error_guided({a}, InstructionPool::defaults(), {}, 0);
  EXPECT_EQ(ex[0].hint, "A translation with major accuracy/addition errors could be");
  EXPECT_EQ(ex[0].meta.span_count, 2u);
}

TEST(BuildErrorGuided, AutomaticRoute) {
  SourceIndex sources;
  sources.emplace("s", SourceSegment{"源", kZhEn});
  const auto levels = quality::assign_levels({{"s", "A", "minor text", 87.0, quality::ScoreSource::automatic},
                                              {"s", "B", "major text", 40.0, quality::ScoreSource::automatic},
                                              {"s", "C", "clean text", 95.0, quality::ScoreSource::automatic}});
  const auto ex = build_error_guided(levels, sources, InstructionPool::defaults(), {}, 0);
  ASSERT_EQ(ex.size(), 3u);
  EXPECT_EQ(ex[0].hint, "A translation with minor errors could be");
  EXPECT_EQ(ex[1].hint, "A translation with major errors could be");
  EXPECT_EQ(ex[2].hint, "A translation with no errors could be");
  for (const auto& e : ex) EXPECT_EQ(e.response.find("<v>"), std::string::npos);
  EXPECT_EQ(ex[0].response, "minor text");
}

TEST(BuildErrorGuided, CleanHintIsConfigurable) {
  HintTemplate hints;
  hints.clean = "A perfect translation could be";
  mqm::AnnotatedTranslation a{"1", "s", "r", kZhEn, "src", "fine", {}};
  EXPECT_EQ(build_error_guided({a}, InstructionPool::defaults(), hints, 0)[0].hint, "A perfect translation could be");
}

TEST(Validate, KindShapes) {
  InstructionExample ex{"i", "in", std::nullopt, "", InstructionKind::translation, {}};
  EXPECT_THROW(validate(ex), ValidationError);
  ex.response = "plain";
  ex.kind = InstructionKind::contrastive;
  EXPECT_THROW(validate(ex), ValidationError);
  ex.response = "<p>a</p> rather than <p>b</p>";
  EXPECT_NO_THROW(validate(ex));
  ex.kind = InstructionKind::error_guided;
  ex.response = "a <v>b</v>";
  ex.meta.span_count = 2;
  EXPECT_THROW(validate(ex), ValidationError);
  ex.meta.span_count = 1;
  EXPECT_NO_THROW(validate(ex));
}

TEST(MixDataset, SizesAndMultiset) {
  const auto a = build_translation(corpus(3), InstructionPool::defaults(), 1);
  const auto b = build_translation(corpus(2), InstructionPool::defaults(), 2);
  const auto mixed = mix_dataset({{a, 1.0}, {b, 1.0}}, 5);
  ASSERT_EQ(mixed.size(), 5u);
  auto expected = a;
  expected.insert(expected.end(), b.begin(), b.end());
  const auto key = [](const InstructionExample& e) { return to_json(e).dump(); };
  std::multiset<std::string> got, want;
  for (const auto& e : mixed) got.insert(key(e));
  for (const auto& e : expected) want.insert(key(e));
  EXPECT_EQ(got, want);
  EXPECT_EQ(mix_dataset({{a, 1.0}}, 9).size(), 3u);
}

TEST(MixDataset, WeightsScaleCounts) {
  const auto a = build_translation(corpus(10), InstructionPool::defaults(), 1);
  EXPECT_EQ(mix_dataset({{a, 2.5}}, 1).size(), 25u);
  EXPECT_EQ(mix_dataset({{a, 0.0}}, 1).size(), 0u);
  EXPECT_EQ(mix_dataset({{a, 0.34}}, 1).size(), 3u);
  EXPECT_THROW(mix_dataset({{a, -1.0}}, 1), ValidationError);
}

TEST(MixDataset, DeterministicJsonl) {
  const auto a = build_translation(corpus(30), InstructionPool::defaults(), 1);
  EXPECT_EQ(examples_jsonl(mix_dataset({{a, 1.0}}, 5)), examples_jsonl(mix_dataset({{a, 1.0}}, 5)));
  EXPECT_NE(examples_jsonl(mix_dataset({{a, 1.0}}, 5)), examples_jsonl(mix_dataset({{a, 1.0}}, 6)));
}

TEST(ExamplesJsonl, RoundTripAndAlpacaRecords) {
  const auto dir = parrot::testing::scratch_dir("examples");
  const auto ex = build_translation(corpus(5), InstructionPool::defaults(), 3);
  write_examples_jsonl(dir / "d.jsonl", ex);
  EXPECT_EQ(read_examples_jsonl(dir / "d.jsonl"), ex);

  parrot::testing::spit(dir / "alpaca.jsonl", R"({"instruction":"Give three tips.","input":"","output":"Eat well."})" "\n");
  const auto general = read_examples_jsonl(dir / "alpaca.jsonl");
  ASSERT_EQ(general.size(), 1u);
  EXPECT_EQ(general[0].kind, InstructionKind::general);
  EXPECT_EQ(general[0].response, "Eat well.");
  EXPECT_EQ(count_by_kind(general).at("general"), 1u);
}
