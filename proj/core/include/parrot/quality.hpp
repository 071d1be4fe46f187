#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "parrot/mqm.hpp"

namespace parrot::quality {

/// Ordered by quality: major < minor < no_error.
enum class ErrorLevel { major = 0, minor = 1, no_error = 2 };

std::string_view to_string(ErrorLevel level);
ErrorLevel parse_error_level(std::string_view s);

/// Where a score came from. Automatic scores are COMET-style (higher is better);
/// human scores are MQM penalties (lower is better).
enum class ScoreSource { automatic, human };

std::string_view to_string(ScoreSource s);
ScoreSource parse_score_source(std::string_view s);

struct ScoredTranslation {
  std::string segment_id;
  std::string system;
  std::string text;
  double score = 0.0;
  ScoreSource source = ScoreSource::automatic;

  bool operator==(const ScoredTranslation&) const = default;
};

struct ContrastivePair {
  std::string segment_id;
  ScoredTranslation preferred;
  ScoredTranslation rejected;

  bool operator==(const ContrastivePair&) const = default;
};

/// Thresholds on the 0-100 scale: (-inf, 85] major, (85, 90] minor, (90, inf) no error.
inline constexpr double kMajorUpperBound = 85.0;
inline constexpr double kMinorUpperBound = 90.0;

/// Throws ValidationError for NaN or infinite scores.
ErrorLevel bucket(double score);

std::vector<std::pair<ScoredTranslation, ErrorLevel>> assign_levels(
    const std::vector<ScoredTranslation>& scored);

/// True when `a` is strictly better than `b` under their (shared) source's comparator.
bool better(const ScoredTranslation& a, const ScoredTranslation& b);

/// 0 for human MQM penalties, 1 COMET point for automatic scores.
double default_min_gap(ScoreSource source);

/// Contrastive pairs per segment: every 2-combination whose scores differ by at
/// least `min_gap` (ties dropped), preferred first, then at most `max_per_segment`
/// sampled uniformly with a per-segment seed. Segments are emitted in id order and
/// pairs keep their enumeration order.
std::vector<ContrastivePair> make_pairs(const std::vector<ScoredTranslation>& scored,
                                        double min_gap, std::size_t max_per_segment,
                                        std::uint64_t seed);

/// Converts MQM segment penalties to scored translations, pulling text from the annotations.
std::vector<ScoredTranslation> from_segment_scores(const std::vector<mqm::SegmentScore>& scores,
                                                   const std::vector<mqm::AnnotatedTranslation>& anns);

nlohmann::ordered_json to_json(const ScoredTranslation& s);
ScoredTranslation scored_from_json(const nlohmann::json& j);

std::vector<ScoredTranslation> read_scored_jsonl(const std::filesystem::path& path);
void write_scored_jsonl(const std::filesystem::path& path, const std::vector<ScoredTranslation>& scored);

/// Level-annotated records: the scored fields plus "level".
void write_levels_jsonl(const std::filesystem::path& path,
                        const std::vector<std::pair<ScoredTranslation, ErrorLevel>>& levels);
std::vector<std::pair<ScoredTranslation, ErrorLevel>> read_levels_jsonl(
    const std::filesystem::path& path);

}  // namespace parrot::quality
