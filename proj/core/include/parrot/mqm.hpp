#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "parrot/lang.hpp"

namespace parrot::mqm {

enum class Severity { neutral = 0, minor = 1, major = 2 };

/// Case-insensitive; "no-error" maps to neutral. Throws ValidationError otherwise.
Severity parse_severity(std::string_view s);
std::string_view to_string(Severity s);

/// The marker the public MQM release uses for rows without an error.
inline constexpr std::string_view kNoErrorCategory = "No-error";

struct ErrorCategory {
  std::string raw;

  explicit ErrorCategory(std::string raw_category);

  /// Text before the first '/', e.g. "Accuracy" for "Accuracy/Mistranslation".
  std::string top_level() const;
  bool no_error() const;

  bool operator==(const ErrorCategory&) const = default;
};

/// Offsets count Unicode scalar values in the markup-free target, end exclusive.
struct ErrorSpan {
  std::size_t start = 0;
  std::size_t end = 0;
  ErrorCategory category;
  Severity severity = Severity::neutral;

  bool operator==(const ErrorSpan&) const = default;
};

struct AnnotatedTranslation {
  std::string segment_id;
  std::string system;
  std::string rater;
  Direction direction;
  std::string source;
  std::string target_plain;
  std::vector<ErrorSpan> spans;  // sorted by start, non-overlapping
  ErrorCategory category{std::string(kNoErrorCategory)};
  Severity severity = Severity::neutral;

  bool operator==(const AnnotatedTranslation&) const = default;
};

struct MqmWeights {
  double major = 5.0;
  double minor = 1.0;
  double minor_fluency_punct = 0.1;
  double nontranslation = 25.0;
};

struct SegmentScore {
  std::string segment_id;
  std::string system;
  double score = 0.0;  // penalty, lower is better

  bool operator==(const SegmentScore&) const = default;
};

/// Marked-up text split into plain text and `<v>...</v>` span offsets.
struct MarkupSplit {
  std::string plain;
  std::vector<std::pair<std::size_t, std::size_t>> spans;
};

/// Strict split: nested, orphan or unclosed markers throw ValidationError.
MarkupSplit split_markup(std::string_view marked);

/// Parses an MQM TSV dump with a header row. Column order is free; extra columns are ignored.
std::vector<AnnotatedTranslation> parse_mqm_tsv(const std::filesystem::path& file,
                                                const Direction& direction);
std::vector<AnnotatedTranslation> parse_mqm_tsv_text(std::string_view content,
                                                     const Direction& direction);

/// Inserts "<v>"/"</v>" at span boundaries. Throws ValidationError on overlapping
/// or out-of-range spans.
std::string reinsert_spans(const AnnotatedTranslation& t);

/// Per (segment_id, system): weighted errors summed per rater, then averaged over raters.
/// Output sorted by (segment_id, system).
std::vector<SegmentScore> score_segments(const std::vector<AnnotatedTranslation>& anns,
                                         const MqmWeights& weights = {});

/// Weight of a single error under `weights`.
double error_weight(const ErrorCategory& category, Severity severity, const MqmWeights& weights);

nlohmann::ordered_json to_json(const AnnotatedTranslation& t);
AnnotatedTranslation annotation_from_json(const nlohmann::json& j);

void write_annotations_jsonl(const std::filesystem::path& path,
                             const std::vector<AnnotatedTranslation>& anns);
std::vector<AnnotatedTranslation> read_annotations_jsonl(const std::filesystem::path& path);

}  // namespace parrot::mqm
