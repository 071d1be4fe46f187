#include "parrot/prompt.hpp"

#include "parrot/error.hpp"
#include "parrot/text.hpp"

namespace parrot {

namespace {

constexpr std::string_view kPOpen = "<p>";
constexpr std::string_view kPClose = "</p>";
constexpr std::string_view kRatherThan = "</p> rather than <p>";

void check_markers(std::string_view field, std::string_view name, const PromptFormat& fmt) {
  for (const auto& marker : {fmt.instruction_marker, fmt.input_marker, fmt.hint_marker, fmt.response_marker}) {
    if (!marker.empty() && field.find(marker) != std::string_view::npos) {
      throw ValidationError(std::string(name) + " contains the section marker '" + marker + "'");
    }
  }
}

std::optional<PreferenceSplit> split_exact(std::string_view s) {
  if (!s.starts_with(kPOpen) || !s.ends_with(kPClose)) return std::nullopt;
  const auto mid = s.find(kRatherThan, kPOpen.size());
  if (mid == std::string_view::npos || mid + kRatherThan.size() > s.size() - kPClose.size()) return std::nullopt;
  PreferenceSplit out;
  out.preferred = std::string(s.substr(kPOpen.size(), mid - kPOpen.size()));
  const auto second = mid + kRatherThan.size();
  out.rejected = std::string(s.substr(second, s.size() - kPClose.size() - second));
  return out;
}

void erase_all(std::string& s, std::string_view what) {
  for (auto pos = s.find(what); pos != std::string::npos; pos = s.find(what, pos)) s.erase(pos, what.size());
}

}  // namespace

std::string_view to_string(PromptVariant v) { return v == PromptVariant::with_input ? "input" : "no-input"; }

PromptVariant parse_prompt_variant(std::string_view s) {
  if (s == "input" || s == "with_input" || s == "prompt-input") return PromptVariant::with_input;
  if (s == "no-input" || s == "no_input" || s == "prompt-no-input") return PromptVariant::no_input;
  throw ValidationError("unknown prompt format '" + std::string(s) + "' (expected input or no-input)");
}

RenderedPrompt render(const InstructionExample& ex, const PromptFormat& fmt, RenderMode mode) {
  check_markers(ex.instruction, "instruction", fmt);
  check_markers(ex.input, "input", fmt);
  if (ex.hint) check_markers(*ex.hint, "hint", fmt);

  const auto& sep = fmt.block_separator;
  std::string text;
  text.reserve(512 + ex.instruction.size() + ex.input.size());
  if (fmt.variant == PromptVariant::with_input) {
    if (ex.input.empty()) throw ValidationError("with-input prompt format needs a non-empty input; use no-input");
    text += fmt.preface_input;
    text += sep;
    text += fmt.instruction_marker + fmt.after_instruction + ex.instruction + sep;
    text += fmt.input_marker + fmt.after_input + ex.input + sep;
  } else {
    text += fmt.preface_no_input;
    text += sep;
    text += fmt.instruction_marker + fmt.after_instruction + ex.instruction;
    if (!ex.input.empty()) text += fmt.no_input_joiner + ex.input;
    text += sep;
  }
  if (ex.hint) text += fmt.hint_marker + fmt.after_hint + *ex.hint + sep;
  text += fmt.response_marker;

  RenderedPrompt out{std::move(text), std::nullopt};
  if (mode == RenderMode::train) out.completion = ex.response;
  return out;
}

std::string extract_response(std::string_view model_output, std::string_view response_marker,
                             std::string_view stop_marker) {
  std::string_view rest = model_output;
  if (!response_marker.empty()) {
    if (const auto pos = rest.rfind(response_marker); pos != std::string_view::npos) {
      rest = rest.substr(pos + response_marker.size());
    }
  }
  if (!stop_marker.empty()) {
    if (const auto pos = rest.find(stop_marker); pos != std::string_view::npos) rest = rest.substr(0, pos);
  }
  return std::string(text::trim(rest));
}

PreferenceSplit extract_preferred(std::string_view response) {
  if (auto exact = split_exact(response)) return *exact;
  const auto trimmed = text::trim(response);
  if (auto exact = split_exact(trimmed)) return *exact;
  std::string whole(trimmed);
  erase_all(whole, kPOpen);
  erase_all(whole, kPClose);
  return PreferenceSplit{std::string(text::trim(whole)), std::nullopt};
}

std::string join_preferred(std::string_view preferred, std::string_view rejected) {
  std::string out;
  out.reserve(preferred.size() + rejected.size() + 32);
  out += kPOpen;
  out += preferred;
  out += kRatherThan;
  out += rejected;
  out += kPClose;
  return out;
}

StrippedMarkup strip_error_markup(std::string_view response) {
  static constexpr std::string_view kOpen = "<v>";
  static constexpr std::string_view kClose = "</v>";
  StrippedMarkup out;
  out.clean.reserve(response.size());
  std::size_t length = 0;
  std::optional<std::size_t> open;
  std::size_t i = 0;
  while (i < response.size()) {
    if (response.compare(i, kOpen.size(), kOpen) == 0) {
      if (open) {
        out.warning = true;  // nested open: drop the inner tag
      } else {
        open = length;
      }
      i += kOpen.size();
    } else if (response.compare(i, kClose.size(), kClose) == 0) {
      if (open) {
        out.spans.emplace_back(*open, length);
        open.reset();
      } else {
        out.warning = true;  // orphan close
      }
      i += kClose.size();
    } else {
      const char c = response[i++];
      out.clean.push_back(c);
      if ((static_cast<unsigned char>(c) & 0xC0) != 0x80) ++length;
    }
  }
  if (open) out.warning = true;  // unclosed: the span is discarded
  return out;
}

}  // namespace parrot
