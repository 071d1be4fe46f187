#include <gtest/gtest.h>

#include <random>
#include <set>

#include "parrot/error.hpp"
#include "parrot/prompt.hpp"
#include "test_util.hpp"

using namespace parrot;
using parrot::testing::fixture;
using parrot::testing::slurp;

namespace {

const char* kInstruction = "Translate the following sentences from Chinese to English.";
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

std::string train_text(const InstructionExample& ex) {
  const auto p = render(ex, PromptFormat{}, RenderMode::train);
  return p.text + *p.completion;
}

InstructionExample example(std::optional<std::string> hint, std::string response) {
  return {kInstruction, kZhSource, std::move(hint), std::move(response), InstructionKind::translation, {}};
}

}  // namespace

TEST(Render, GoldenTranslation) {
  EXPECT_EQ(train_text(example(std::nullopt, kPreferred)), slurp(fixture("golden/translation.txt")));
}

TEST(Render, GoldenContrastive) {
  EXPECT_EQ(train_text(example("We prefer to translate it to", join_preferred(kPreferred, kRejected))),
            slurp(fixture("golden/contrastive.txt")));
}

TEST(Render, GoldenErrorGuided) {
  std::string major = kRejected;
  major.replace(major.find("on marketing"), 12, "<v>on marketing</v>");
  EXPECT_EQ(train_text(example("A translation with major accuracy/mistranslation errors could be", major)),
            slurp(fixture("golden/error_guided_major.txt")));
  std::string minor = kRejected;
  minor.replace(minor.find("inspection indicate"), 10, "<v>inspection</v>");
  EXPECT_EQ(train_text(example("A translation with minor fluency/grammar errors could be", minor)),
            slurp(fixture("golden/error_guided_minor.txt")));
}

TEST(Render, InferModeEndsAtResponseMarker) {
  const auto p = render(example("A translation with no errors could be", "x"), PromptFormat{}, RenderMode::infer);
  EXPECT_FALSE(p.completion.has_value());
  EXPECT_TRUE(p.text.ends_with("### Hint: A translation with no errors could be\n\n### Response:"));
}

TEST(Render, NoInputVariant) {
  PromptFormat fmt;
  fmt.variant = PromptVariant::no_input;
  InstructionExample ex{"Give three tips.", "", std::nullopt, "Eat well.", InstructionKind::general, {}};
  EXPECT_EQ(render(ex, fmt, RenderMode::infer).text,
            "Below is an instruction that describes a task. Write a response that appropriately completes the "
            "request.\n\n### Instruction:\nGive three tips.\n\n### Response:");
  ex.input = "源";
  EXPECT_EQ(render(ex, fmt, RenderMode::infer).text,
            "Below is an instruction that describes a task. Write a response that appropriately completes the "
            "request.\n\n### Instruction:\nGive three tips.\n源\n\n### Response:");
}

TEST(Render, Rejections) {
  auto ex = example(std::nullopt, "r");
  ex.input = "";
  EXPECT_THROW(render(ex, PromptFormat{}, RenderMode::train), ValidationError);
  ex = example("### Response: sneaky", "r");
  EXPECT_THROW(render(ex, PromptFormat{}, RenderMode::train), ValidationError);
}

TEST(Render, InjectiveOverGeneratedExamples) {
  std::mt19937_64 rng(8);
  std::set<std::string> seen;
  std::set<std::string> keys;
  for (int i = 0; i < 400; ++i) {
    InstructionExample ex{parrot::testing::random_utf8(rng, 6) + "i", parrot::testing::random_utf8(rng, 6) + "s",
                          std::nullopt, "r", InstructionKind::translation, {}};
    if (rng() % 2) ex.hint = parrot::testing::random_utf8(rng, 4);
    const auto key = ex.instruction + '\x01' + ex.input + '\x01' + (ex.hint ? "1" + *ex.hint : "0");
    if (!keys.insert(key).second) continue;
    EXPECT_TRUE(seen.insert(render(ex, PromptFormat{}, RenderMode::infer).text).second) << key;
  }
}

TEST(ExtractResponse, Cases) {
  EXPECT_EQ(extract_response("prompt ### Response: hello world \n"), "hello world");
  EXPECT_EQ(extract_response(" just text "), "just text");
  EXPECT_EQ(extract_response("answer\n\n### Instruction:\nmore junk"), "answer");
  EXPECT_EQ(extract_response("### Response:a ### Response: b"), "b");
}

TEST(ExtractPreferred, RoundTripProperty) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 500; ++i) {
    const auto a = parrot::testing::random_utf8(rng, 30);
    const auto b = parrot::testing::random_utf8(rng, 30);
    if (a.find("</p> rather than <p>") != std::string::npos) continue;
    const auto split = extract_preferred(join_preferred(a, b));
    EXPECT_EQ(split.preferred, a);
    EXPECT_EQ(split.rejected, b);
  }
}

TEST(ExtractPreferred, LooseOutputs) {
  auto s = extract_preferred("  <p>A</p> rather than <p>B</p>\n");
  EXPECT_EQ(s.preferred, "A");
  EXPECT_EQ(s.rejected, "B");
  s = extract_preferred("<p>only one</p>");
  EXPECT_EQ(s.preferred, "only one");
  EXPECT_FALSE(s.rejected.has_value());
  s = extract_preferred("no tags");
  EXPECT_EQ(s.preferred, "no tags");
}

TEST(StripErrorMarkup, Lenient) {
  auto s = strip_error_markup("a <v>b</v> c");
  EXPECT_EQ(s.clean, "a b c");
  EXPECT_EQ(s.spans, (std::vector<std::pair<std::size_t, std::size_t>>{{2, 3}}));
  EXPECT_FALSE(s.warning);
  s = strip_error_markup("a </v>b <v>c");
  EXPECT_EQ(s.clean, "a b c");
  EXPECT_TRUE(s.warning);
  EXPECT_TRUE(s.spans.empty());
}

TEST(PromptVariantParse, Names) {
  EXPECT_EQ(parse_prompt_variant("input"), PromptVariant::with_input);
  EXPECT_EQ(parse_prompt_variant("no-input"), PromptVariant::no_input);
  EXPECT_THROW(parse_prompt_variant("chat"), ValidationError);
}
