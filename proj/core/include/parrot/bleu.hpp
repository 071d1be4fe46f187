#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "parrot/lang.hpp"

namespace parrot::eval {

enum class TokenizerKind { intl_13a, char_zh };

std::string_view to_string(TokenizerKind kind);  // "13a" / "zh"
/// Accepts "13a", "zh", "intl_13a", "char_zh".
TokenizerKind parse_tokenizer(std::string_view s);
/// char_zh for targets in Chinese, 13a otherwise.
TokenizerKind tokenizer_for(const Direction& direction);

/// Reproduces sacreBLEU's "13a" and "zh" tokenizers.
std::vector<std::string> tokenize(std::string_view text, TokenizerKind kind);

/// True for characters the zh tokenizer isolates as single tokens.
bool is_chinese_char(char32_t c);

enum class Smoothing { none, exp };

std::string_view to_string(Smoothing s);
Smoothing parse_smoothing(std::string_view s);

inline constexpr std::size_t kMaxOrder = 4;

struct BleuStats {
  std::array<std::size_t, kMaxOrder> correct{};
  std::array<std::size_t, kMaxOrder> total{};
  std::size_t hyp_len = 0;
  std::size_t ref_len = 0;

  BleuStats& operator+=(const BleuStats& other);
};

struct BleuScore {
  double score = 0.0;                            // 0..100
  std::array<double, kMaxOrder> precisions{};    // 0..1
  double brevity_penalty = 0.0;                  // 0..1
  std::size_t hyp_len = 0;
  std::size_t ref_len = 0;
  BleuStats stats;
};

/// Clipped n-gram statistics for a single tokenized segment.
BleuStats segment_stats(const std::vector<std::string>& hyp, const std::vector<std::string>& ref);

BleuScore score_from_stats(const BleuStats& stats, Smoothing smoothing = Smoothing::none);

/// Throws ValidationError on length mismatch or an empty corpus.
BleuScore corpus_bleu(const std::vector<std::string>& hyps, const std::vector<std::string>& refs,
                      TokenizerKind kind, Smoothing smoothing = Smoothing::none);

/// sacreBLEU-style signature describing how a score was computed.
std::string signature(TokenizerKind kind, Smoothing smoothing = Smoothing::none);

nlohmann::ordered_json to_json(const BleuScore& s);

}  // namespace parrot::eval
