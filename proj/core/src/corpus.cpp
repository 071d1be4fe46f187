#include "parrot/corpus.hpp"

#include <set>
#include <utility>

#include "parrot/error.hpp"
#include "parrot/io.hpp"
#include "parrot/text.hpp"

namespace parrot {

std::string normalize_text(std::string_view raw, std::string_view what) {
  text::require_utf8(raw, what);
  return std::string(text::trim_right(text::nfc(raw)));
}

std::vector<SentencePair> load_parallel(const std::filesystem::path& src_file,
                                        const std::filesystem::path& tgt_file,
                                        const Direction& direction, const std::string& origin) {
  const auto src_lines = io::read_lines(src_file);
  const auto tgt_lines = io::read_lines(tgt_file);
  if (src_lines.size() != tgt_lines.size()) {
    throw ValidationError("line count " + std::to_string(src_lines.size()) + " ≠ " +
                          std::to_string(tgt_lines.size()) + " (" + src_file.string() + " vs " +
                          tgt_file.string() + ")");
  }
  std::vector<SentencePair> pairs;
  pairs.reserve(src_lines.size());
  for (std::size_t i = 0; i < src_lines.size(); ++i) {
    const auto where = [&](const std::filesystem::path& f) {
      return f.string() + ":" + std::to_string(i + 1);
    };
    auto source = normalize_text(src_lines[i], where(src_file));
    auto target = normalize_text(tgt_lines[i], where(tgt_file));
    if (text::trim(source).empty()) throw ValidationError("empty line " + std::to_string(i + 1) + " in " + src_file.string());
    if (text::trim(target).empty()) throw ValidationError("empty line " + std::to_string(i + 1) + " in " + tgt_file.string());
    pairs.push_back(SentencePair{origin + ":" + std::to_string(i), direction, std::move(source),
                                 std::move(target), origin});
  }
  return pairs;
}

std::vector<SystemTranslation> load_system_translations(const std::filesystem::path& file,
                                                        const Direction& direction) {
  const auto lines = io::read_lines(file);
  std::vector<SystemTranslation> out;
  std::set<std::pair<std::string, std::string>> seen;
  for (std::size_t row = 0; row < lines.size(); ++row) {
    std::string_view line = lines[row];
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    std::vector<std::string_view> cols;
    std::size_t pos = 0;
    while (true) {
      const auto tab = line.find('\t', pos);
      cols.push_back(line.substr(pos, tab == std::string_view::npos ? std::string_view::npos : tab - pos));
      if (tab == std::string_view::npos) break;
      pos = tab + 1;
    }
    const auto where = file.string() + ":" + std::to_string(row + 1);
    if (cols.size() != 3) {
      throw ValidationError(where + ": expected 3 tab-separated columns, found " + std::to_string(cols.size()));
    }
    auto segment_id = normalize_text(cols[0], where);
    auto system = normalize_text(cols[1], where);
    auto translation = normalize_text(cols[2], where);
    if (segment_id.empty() || system.empty()) throw ValidationError(where + ": empty segment id or system");
    if (text::trim(translation).empty()) throw ValidationError(where + ": empty translation");
    if (!seen.emplace(segment_id, system).second) {
      throw ValidationError(where + ": duplicate key (" + segment_id + ", " + system + ")");
    }
    out.push_back(SystemTranslation{std::move(segment_id), std::move(system), direction, std::move(translation)});
  }
  return out;
}

nlohmann::ordered_json to_json(const SentencePair& pair) {
  nlohmann::ordered_json j;
  j["id"] = pair.id;
  j["direction"] = pair.direction;
  j["source"] = pair.source;
  j["target"] = pair.target;
  j["origin"] = pair.origin;
  return j;
}

SentencePair sentence_pair_from_json(const nlohmann::json& j) {
  SentencePair p{j.at("id").get<std::string>(), direction_from_json(j.at("direction")),
                 normalize_text(j.at("source").get<std::string>(), "source"),
                 normalize_text(j.at("target").get<std::string>(), "target"),
                 j.value("origin", std::string{})};
  if (text::trim(p.source).empty() || text::trim(p.target).empty()) {
    throw ValidationError("pair '" + p.id + "' has an empty side");
  }
  return p;
}

std::string corpus_jsonl(const std::vector<SentencePair>& pairs) {
  std::string out;
  for (const auto& p : pairs) {
    out += io::dump_line(to_json(p));
    out += '\n';
  }
  return out;
}

void write_corpus_jsonl(const std::filesystem::path& path, const std::vector<SentencePair>& pairs) {
  io::write_file_atomic(path, corpus_jsonl(pairs));
}

std::vector<SentencePair> read_corpus_jsonl(const std::filesystem::path& path) {
  std::vector<SentencePair> pairs;
  std::set<std::string, std::less<>> ids;
  io::for_each_jsonl(path, [&](const nlohmann::json& j, std::size_t line) {
    auto p = sentence_pair_from_json(j);
    if (!ids.insert(p.id).second) {
      throw ValidationError(path.string() + ":" + std::to_string(line) + ": duplicate id '" + p.id + "'");
    }
    pairs.push_back(std::move(p));
  });
  return pairs;
}

}  // namespace parrot
