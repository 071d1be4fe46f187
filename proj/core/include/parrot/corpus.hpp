#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "parrot/lang.hpp"

namespace parrot {

/// A human-written source/target pair.
struct SentencePair {
  std::string id;
  Direction direction;
  std::string source;
  std::string target;
  std::string origin;

  bool operator==(const SentencePair&) const = default;
};

/// One system's output for one segment, as submitted to a shared task.
struct SystemTranslation {
  std::string segment_id;
  std::string system;
  Direction direction;
  std::string text;

  bool operator==(const SystemTranslation&) const = default;
};

/// Normalizes ingested text: validates UTF-8, applies NFC and trims trailing whitespace.
std::string normalize_text(std::string_view raw, std::string_view what);

/// Line-aligned plain-text files to pairs with ids "{origin}:{i}" (zero-based).
std::vector<SentencePair> load_parallel(const std::filesystem::path& src_file,
                                        const std::filesystem::path& tgt_file,
                                        const Direction& direction,
                                        const std::string& origin);

/// Three-column TSV "segment_id<TAB>system<TAB>text", no header.
std::vector<SystemTranslation> load_system_translations(const std::filesystem::path& file,
                                                        const Direction& direction);

nlohmann::ordered_json to_json(const SentencePair& pair);
SentencePair sentence_pair_from_json(const nlohmann::json& j);

void write_corpus_jsonl(const std::filesystem::path& path, const std::vector<SentencePair>& pairs);
std::string corpus_jsonl(const std::vector<SentencePair>& pairs);
std::vector<SentencePair> read_corpus_jsonl(const std::filesystem::path& path);

}  // namespace parrot
