#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "parrot/corpus.hpp"
#include "parrot/mqm.hpp"
#include "parrot/quality.hpp"

namespace parrot {

enum class InstructionKind { translation, contrastive, error_guided, general };

std::string_view to_string(InstructionKind kind);
InstructionKind parse_instruction_kind(std::string_view s);

struct ExampleMeta {
  std::optional<std::string> segment_id;
  std::vector<std::string> systems;
  std::optional<Direction> direction;
  std::optional<quality::ErrorLevel> error_level;
  std::optional<std::size_t> span_count;

  bool operator==(const ExampleMeta&) const = default;
};

struct InstructionExample {
  std::string instruction;
  std::string input;
  std::optional<std::string> hint;
  std::string response;
  InstructionKind kind = InstructionKind::translation;
  ExampleMeta meta;

  bool operator==(const InstructionExample&) const = default;
};

/// Checks the kind-specific shape; throws ValidationError describing the first violation.
void validate(const InstructionExample& ex);

/// Instruction wordings with "{SRC}"/"{TGT}" placeholders.
///
/// Each entry names the target language exactly once and the source language at
/// most once; the shipped seed pool holds the "from X to Y" wording,
/// the "[TGT] translation" variant and one neutral paraphrase.
class InstructionPool {
 public:
  explicit InstructionPool(std::vector<std::string> entries);

  static InstructionPool defaults();
  /// One template per line; blank lines and lines starting with '#' are skipped.
  static InstructionPool from_file(const std::filesystem::path& path);

  const std::vector<std::string>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

  std::string instantiate(std::size_t index, const Direction& direction) const;
  std::string digest() const;

  static constexpr std::size_t kSeedCount = 3;

 private:
  std::vector<std::string> entries_;
};

struct HintTemplate {
  std::string preference = "We prefer to translate it to";
  std::string errored = "A translation with {severity} {category} errors could be";
  std::string leveled = "A translation with {severity} errors could be";
  std::string clean = "A translation with no errors could be";

  std::string errored_hint(mqm::Severity severity, std::string_view category) const;
  std::string leveled_hint(quality::ErrorLevel level) const;
};

/// Source sentence and direction for a segment id, used for examples built from
/// system translations.
struct SourceSegment {
  std::string source;
  Direction direction;
};
using SourceIndex = std::map<std::string, SourceSegment, std::less<>>;

SourceIndex index_sources(const std::vector<SentencePair>& pairs);
SourceIndex index_sources(const std::vector<mqm::AnnotatedTranslation>& anns);

std::vector<InstructionExample> build_translation(const std::vector<SentencePair>& pairs,
                                                  const InstructionPool& pool, std::uint64_t seed);

std::vector<InstructionExample> build_contrastive(const std::vector<quality::ContrastivePair>& pairs,
                                                  const SourceIndex& sources,
                                                  const InstructionPool& pool,
                                                  const HintTemplate& hints, std::uint64_t seed);

/// Human-annotated route: the response carries the `<v>` spans.
std::vector<InstructionExample> build_error_guided(const std::vector<mqm::AnnotatedTranslation>& anns,
                                                   const InstructionPool& pool,
                                                   const HintTemplate& hints, std::uint64_t seed);

/// Automatic route: only the hint encodes the level.
std::vector<InstructionExample> build_error_guided(
    const std::vector<std::pair<quality::ScoredTranslation, quality::ErrorLevel>>& levels,
    const SourceIndex& sources, const InstructionPool& pool, const HintTemplate& hints,
    std::uint64_t seed);

struct DatasetPart {
  std::vector<InstructionExample> examples;
  double weight = 1.0;
};

/// Each part contributes round(weight * size) examples (whole copies plus a seeded
/// sample for the fraction); the concatenation is then shuffled with `seed`.
std::vector<InstructionExample> mix_dataset(const std::vector<DatasetPart>& parts, std::uint64_t seed);

std::map<std::string, std::size_t> count_by_kind(const std::vector<InstructionExample>& examples);

nlohmann::ordered_json to_json(const InstructionExample& ex);
/// Accepts the native schema and plain Alpaca records ({"instruction","input","output"},
/// read as kind "general").
InstructionExample example_from_json(const nlohmann::json& j);

std::string examples_jsonl(const std::vector<InstructionExample>& examples);
void write_examples_jsonl(const std::filesystem::path& path,
                          const std::vector<InstructionExample>& examples);
std::vector<InstructionExample> read_examples_jsonl(const std::filesystem::path& path);

}  // namespace parrot
