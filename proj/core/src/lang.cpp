#include "parrot/lang.hpp"

#include <map>
#include <mutex>
#include <shared_mutex>

#include "parrot/error.hpp"

namespace parrot {

namespace {

struct Registry {
  std::shared_mutex mutex;
  std::map<std::string, std::string, std::less<>> names{
      {"de", "German"}, {"en", "English"}, {"ro", "Romanian"}, {"zh", "Chinese"}};
};

Registry& registry() {
  static Registry r;
  return r;
}

}  // namespace

LangCode::LangCode(std::string_view code) : code_(code) {
  if (!is_registered_language(code)) {
    throw ValidationError("unknown language code '" + std::string(code) + "'");
  }
}

std::string LangCode::display_name() const {
  auto& r = registry();
  std::shared_lock lock(r.mutex);
  return r.names.find(code_)->second;
}

void register_language(std::string_view code, std::string_view display_name) {
  if (code.empty() || display_name.empty()) throw ValidationError("language code and name must be non-empty");
  if (code.find_first_of("-_ \t") != std::string_view::npos) {
    throw ValidationError("language code '" + std::string(code) + "' contains a separator");
  }
  auto& r = registry();
  std::unique_lock lock(r.mutex);
  r.names.insert_or_assign(std::string(code), std::string(display_name));
}

bool is_registered_language(std::string_view code) {
  auto& r = registry();
  std::shared_lock lock(r.mutex);
  return r.names.find(code) != r.names.end();
}

std::vector<std::string> registered_languages() {
  auto& r = registry();
  std::shared_lock lock(r.mutex);
  std::vector<std::string> out;
  for (const auto& [code, _] : r.names) out.push_back(code);
  return out;
}

Direction::Direction(LangCode src_lang, LangCode tgt_lang)
    : src(std::move(src_lang)), tgt(std::move(tgt_lang)) {
  if (src == tgt) throw ValidationError("direction source and target are both '" + src.code() + "'");
}

Direction Direction::parse(std::string_view pair) {
  auto sep = pair.find('-');
  std::size_t sep_len = 1;
  if (sep == std::string_view::npos) sep = pair.find('_');
  if (sep == std::string_view::npos) {
    sep = pair.find('2');
  }
  if (sep == std::string_view::npos || sep == 0 || sep + sep_len >= pair.size()) {
    throw ValidationError("malformed language pair '" + std::string(pair) + "' (expected e.g. de-en)");
  }
  return Direction(LangCode(pair.substr(0, sep)), LangCode(pair.substr(sep + sep_len)));
}

void to_json(nlohmann::json& j, const Direction& d) {
  j = nlohmann::json{{"src", d.src.code()}, {"tgt", d.tgt.code()}};
}

void to_json(nlohmann::ordered_json& j, const Direction& d) {
  j = nlohmann::ordered_json{{"src", d.src.code()}, {"tgt", d.tgt.code()}};
}

Direction direction_from_json(const nlohmann::json& j) {
  if (j.is_string()) return Direction::parse(j.get<std::string>());
  if (!j.is_object() || !j.contains("src") || !j.contains("tgt")) {
    throw ValidationError("direction must be {\"src\",\"tgt\"}");
  }
  return Direction(LangCode(j.at("src").get<std::string>()), LangCode(j.at("tgt").get<std::string>()));
}

}  // namespace parrot
