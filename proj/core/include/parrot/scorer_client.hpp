#pragma once

#include <chrono>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "parrot/corpus.hpp"
#include "parrot/instructions.hpp"
#include "parrot/quality.hpp"

namespace parrot::scoring {

inline constexpr const char* kDefaultMetric = "Unbabel/wmt22-comet-da";

struct ScoreItem {
  std::string id;
  std::string source;
  std::string hypothesis;
  std::optional<std::string> reference;
};

struct ScoreRequest {
  std::vector<ScoreItem> items;
  std::string model = kDefaultMetric;

  /// Non-empty, unique ids.
  void validate() const;
};

struct ItemScore {
  std::string id;
  std::optional<double> score;  // 0..100
  std::optional<std::string> error;
};

struct ScoreResponse {
  std::vector<ItemScore> items;
  std::string model;
};

nlohmann::ordered_json to_json(const ScoreRequest& req);
nlohmann::ordered_json to_json(const ScoreItem& item);
ScoreItem score_item_from_json(const nlohmann::json& j);

/// Validates a reply against the request: one entry per id, finite scores.
ScoreResponse response_from_json(const nlohmann::json& j, const ScoreRequest& req);

/// POST {endpoint}/score.
ScoreResponse score_remote(const std::string& endpoint, const ScoreRequest& req,
                           std::chrono::milliseconds timeout = std::chrono::seconds(600));

/// Reads the scorer's offline output (JSONL of {"id","score"} or {"id","error"}).
ScoreResponse read_offline_scores(const std::filesystem::path& path, const ScoreRequest& req);

/// One item per system translation; ids are the zero-based positions.
ScoreRequest make_request(const std::vector<SystemTranslation>& translations, const SourceIndex& sources,
                          const SourceIndex* references, const std::string& model = kDefaultMetric);

/// Joins scores back onto the translations. Items that failed to score are skipped
/// and reported through `failed`.
std::vector<quality::ScoredTranslation> join_scores(const std::vector<SystemTranslation>& translations,
                                                    const ScoreResponse& response,
                                                    std::vector<std::string>* failed = nullptr);

}  // namespace parrot::scoring
