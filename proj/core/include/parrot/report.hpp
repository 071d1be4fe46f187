#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "parrot/bleu.hpp"
#include "parrot/lang.hpp"

namespace parrot::eval {

/// Hint conditions appearing in the sweep tables, in display order.
enum class HintCondition { none, no_error, minor, major, preferred, unpreferred };

std::string_view to_string(HintCondition c);
HintCondition parse_hint_condition(std::string_view s);

struct ReportRow {
  HintCondition condition = HintCondition::none;
  BleuScore bleu;
  std::optional<double> comet;
  std::size_t n = 0;
  std::optional<double> delta_bleu;   // vs. the "none" row
  std::optional<double> delta_comet;
};

struct EvalReport {
  Direction direction;
  TokenizerKind tokenizer = TokenizerKind::intl_13a;
  std::string signature;
  std::vector<ReportRow> rows;  // sorted by condition
};

struct SweepRun {
  std::filesystem::path hyp_file;
  std::optional<std::filesystem::path> comet_file;
};

/// Scores every run against `refs`; throws ValidationError naming the run when its
/// line count (or its COMET file's) differs from the references.
EvalReport hint_sweep_report(const std::map<HintCondition, SweepRun>& runs,
                             const std::filesystem::path& refs, const Direction& direction,
                             std::optional<TokenizerKind> tokenizer = std::nullopt);

/// Per-segment COMET scores: one number per line, or JSONL objects with a "score" field.
std::vector<double> read_segment_scores(const std::filesystem::path& path);

std::string to_markdown(const EvalReport& report);
nlohmann::ordered_json to_json(const EvalReport& report);

struct PreferenceReport {
  TokenizerKind tokenizer = TokenizerKind::intl_13a;
  BleuScore preferred;
  std::size_t n_preferred = 0;
  std::optional<BleuScore> unpreferred;
  std::size_t n_unpreferred = 0;
};

/// Scores both halves of contrastive responses against the references. Rows without a
/// second half only count on the preferred side.
PreferenceReport preference_lexical_report(const std::vector<std::string>& responses,
                                           const std::vector<std::string>& refs,
                                           TokenizerKind kind);
PreferenceReport preference_lexical_report(const std::filesystem::path& outputs,
                                           const std::filesystem::path& refs, TokenizerKind kind);

std::string to_markdown(const PreferenceReport& report);
nlohmann::ordered_json to_json(const PreferenceReport& report);

}  // namespace parrot::eval
