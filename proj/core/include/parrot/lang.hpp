#pragma once

#include <compare>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace parrot {

/// A language identifier drawn from the process-wide registry.
///
/// The registry ships en, de, zh and ro; more languages can be added with
/// register_language() before any LangCode for them is constructed.
class LangCode {
 public:
  /// Throws ValidationError for codes that are not registered.
  explicit LangCode(std::string_view code);

  const std::string& code() const { return code_; }
  std::string display_name() const;

  auto operator<=>(const LangCode&) const = default;

 private:
  std::string code_;
};

/// Adds (or renames) a language. Thread-safe.
void register_language(std::string_view code, std::string_view display_name);
bool is_registered_language(std::string_view code);
std::vector<std::string> registered_languages();

struct Direction {
  LangCode src;
  LangCode tgt;

  /// Throws ValidationError when src == tgt.
  Direction(LangCode src_lang, LangCode tgt_lang);

  /// Parses "de-en" (also accepts "de2en" and "de_en").
  static Direction parse(std::string_view pair);

  std::string str() const { return src.code() + "-" + tgt.code(); }

  auto operator<=>(const Direction&) const = default;
};

void to_json(nlohmann::json& j, const Direction& d);
void to_json(nlohmann::ordered_json& j, const Direction& d);
Direction direction_from_json(const nlohmann::json& j);

}  // namespace parrot
