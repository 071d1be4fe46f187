#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "parrot/instructions.hpp"

namespace parrot {

enum class PromptVariant { with_input, no_input };

std::string_view to_string(PromptVariant v);
PromptVariant parse_prompt_variant(std::string_view s);

/// Alpaca-style layout. The defaults match the training prompts byte for byte.
struct PromptFormat {
  PromptVariant variant = PromptVariant::with_input;
  std::string preface_input =
      "Below is an instruction that describes a task, paired with an input that provides "
      "further context. Write a response that appropriately completes the request.";
  std::string preface_no_input =
      "Below is an instruction that describes a task. Write a response that appropriately "
      "completes the request.";
  std::string instruction_marker = "### Instruction:";
  std::string input_marker = "### Input:";
  std::string hint_marker = "### Hint:";
  std::string response_marker = "### Response:";
  // Separators following each marker.
  std::string after_instruction = "\n";
  std::string after_input = "\n";
  std::string after_hint = " ";
  std::string block_separator = "\n\n";
  /// Joins instruction and input in the no-input variant.
  std::string no_input_joiner = "\n";
};

enum class RenderMode { train, infer };

struct RenderedPrompt {
  std::string text;
  std::optional<std::string> completion;
};

/// Throws ValidationError when the with-input variant gets an empty input, or when a
/// field contains one of the section markers.
RenderedPrompt render(const InstructionExample& ex, const PromptFormat& fmt, RenderMode mode);

/// Text after the last response marker (or the whole output), cut at a hallucinated
/// "### Instruction:" and trimmed.
std::string extract_response(std::string_view model_output,
                             std::string_view response_marker = "### Response:",
                             std::string_view stop_marker = "### Instruction:");

struct PreferenceSplit {
  std::string preferred;
  std::optional<std::string> rejected;
};

/// Splits "<p>X</p> rather than <p>Y</p>"; anything else is returned whole with
/// stray <p> tags removed.
PreferenceSplit extract_preferred(std::string_view response);

/// Builds the contrastive response shape.
std::string join_preferred(std::string_view preferred, std::string_view rejected);

struct StrippedMarkup {
  std::string clean;
  std::vector<std::pair<std::size_t, std::size_t>> spans;  // scalar-value offsets
  bool warning = false;  // orphan or nested tags were dropped
};

/// Lenient counterpart of mqm::split_markup for model outputs.
StrippedMarkup strip_error_markup(std::string_view response);

}  // namespace parrot
