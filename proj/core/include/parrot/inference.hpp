#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <stop_token>
#include <string>
#include <string_view>
#include <vector>

#include "parrot/instructions.hpp"
#include "parrot/prompt.hpp"
#include "parrot/report.hpp"

namespace parrot::inference {

enum class DecodeStrategy { sampling, beam };

struct DecodeConfig {
  DecodeStrategy strategy = DecodeStrategy::beam;
  std::size_t beam_size = 4;
  double temperature = 0.7;
  double top_p = 0.9;
  std::size_t max_new_tokens = 512;
  /// Ask the backend for real beam search and abort the job if it refuses, instead of
  /// approximating beams with best_of.
  bool strict_beam = false;

  /// "beam", "beam:4", "sample", "sample:0.7" or "sample:0.7:0.9".
  static DecodeConfig parse(std::string_view spec);
  void validate() const;
};

using eval::HintCondition;

/// Replaces the example's hint for an inference condition. `unpreferred` is not a
/// prompt condition and is rejected.
InstructionExample apply_hint(InstructionExample ex, HintCondition condition,
                              const HintTemplate& hints);

struct InferenceJob {
  std::vector<InstructionExample> examples;
  PromptFormat format;
  std::optional<HintCondition> hint_override;
  DecodeConfig decode;
  std::string endpoint;
  std::string model;
  HintTemplate hints;
};

struct RetryPolicy {
  std::size_t max_attempts = 4;
  std::chrono::milliseconds initial_backoff{200};
  double multiplier = 2.0;
  std::chrono::milliseconds max_backoff{5000};

  std::chrono::milliseconds backoff_for(std::size_t attempt) const;  // attempt >= 1
};

struct RunOptions {
  std::size_t max_in_flight = 4;
  RetryPolicy retry;
  std::chrono::milliseconds timeout{120000};
  std::optional<std::filesystem::path> journal;
  std::optional<std::string> api_key;
  /// Workers stop picking up new examples once a stop is requested.
  std::stop_token stop;
};

enum class ResultStatus { ok, error, cancelled };
std::string_view to_string(ResultStatus s);

struct Usage {
  std::size_t prompt_tokens = 0;
  std::size_t completion_tokens = 0;
};

struct InferenceResult {
  std::size_t index = 0;
  ResultStatus status = ResultStatus::cancelled;
  std::string raw_output;     // completion text, or the raw reply body on malformed replies
  std::string translation;    // extracted and markup-free
  std::optional<std::string> rejected;  // second half of a contrastive response
  std::string response;       // extracted response before preference splitting
  double latency_ms = 0.0;
  Usage usage;
  int http_status = 0;
  std::size_t attempts = 0;
  std::string error;
  bool from_journal = false;
};

/// The request body for one example: a pure function of its inputs.
std::string request_body(const InstructionExample& ex, const InferenceJob& job);

/// Renders, posts and extracts every example. Results come back in job order.
/// Transport and HTTP failures become per-example error records; only a strict-beam
/// refusal or an invalid job throws.
std::vector<InferenceResult> run_job(const InferenceJob& job, const RunOptions& options = {});

/// Writes one translation per line (newlines folded to spaces, failures as empty lines).
void write_translations(const std::filesystem::path& path, const std::vector<InferenceResult>& results);
void write_responses(const std::filesystem::path& path, const std::vector<InferenceResult>& results);
void write_rejected(const std::filesystem::path& path, const std::vector<InferenceResult>& results);

struct MatrixOutputs {
  std::map<HintCondition, std::filesystem::path> files;
  std::map<HintCondition, std::vector<InferenceResult>> results;
  /// Raw contrastive responses for the preferred condition, for the lexical report.
  std::optional<std::filesystem::path> preferred_responses;
};

/// Runs the job once per condition into `out_dir/{condition}.txt`, with per-condition
/// journals next to them. The preferred condition also yields unpreferred.txt.
MatrixOutputs hint_matrix(const InferenceJob& job, const std::set<HintCondition>& conditions,
                          const std::filesystem::path& out_dir, const RunOptions& options = {});

}  // namespace parrot::inference
