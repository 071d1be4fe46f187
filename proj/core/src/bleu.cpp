#include "parrot/bleu.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <utility>

#include "parrot/error.hpp"
#include "parrot/text.hpp"

namespace parrot::eval {

namespace {

// sacreBLEU's zh character table after Python's string comparison semantics are
// applied: its five-hex-digit entries (" 0", "⾀0") compare as two-character
// strings, which widens the first range to U+2001..U+2A6D. Merged and sorted.
constexpr std::pair<char32_t, char32_t> kChineseRanges[] = {
    {0x2001, 0x2A6D}, {0x2E80, 0x2FDF}, {0x2FF0, 0x303F}, {0x3100, 0x312F}, {0x31A0, 0x31EF},
    {0x3200, 0x4DB5}, {0x4E00, 0x9FBB}, {0xF900, 0xFA2D}, {0xFA30, 0xFA6A}, {0xFA70, 0xFAD9},
    {0xFE10, 0xFE1F}, {0xFE30, 0xFE4F}, {0xFF00, 0xFFEF},
};

bool is_digit(char32_t c) { return c >= U'0' && c <= U'9'; }

// ([\{-\~\[-\` -\&\(-\+\:-\@\/])
bool is_isolated_symbol(char32_t c) {
  return (c >= 0x7B && c <= 0x7E) || (c >= 0x5B && c <= 0x60) || (c >= 0x20 && c <= 0x26) ||
         (c >= 0x28 && c <= 0x2B) || (c >= 0x3A && c <= 0x40) || c == U'/';
}

bool is_period_or_comma(char32_t c) { return c == U'.' || c == U','; }

/// Applies a two-character rewrite left to right without overlapping matches,
/// mirroring re.sub on a fixed-width pattern.
template <typename Match, typename Emit>
std::u32string rewrite_pairs(const std::u32string& in, Match match, Emit emit) {
  std::u32string out;
  out.reserve(in.size() + in.size() / 2);
  std::size_t i = 0;
  while (i < in.size()) {
    if (i + 1 < in.size() && match(in[i], in[i + 1])) {
      emit(out, in[i], in[i + 1]);
      i += 2;
    } else {
      out.push_back(in[i++]);
    }
  }
  return out;
}

/// sacreBLEU's TokenizerRegexp followed by whitespace splitting.
std::vector<std::string> regexp_tokenize(const std::u32string& line) {
  std::u32string s;
  s.reserve(line.size() * 2);
  for (char32_t c : line) {
    if (is_isolated_symbol(c)) {
      s.push_back(U' ');
      s.push_back(c);
      s.push_back(U' ');
    } else {
      s.push_back(c);
    }
  }
  s = rewrite_pairs(
      s, [](char32_t a, char32_t b) { return !is_digit(a) && is_period_or_comma(b); },
      [](std::u32string& o, char32_t a, char32_t b) { o += a; o += U' '; o += b; o += U' '; });
  s = rewrite_pairs(
      s, [](char32_t a, char32_t b) { return is_period_or_comma(a) && !is_digit(b); },
      [](std::u32string& o, char32_t a, char32_t b) { o += U' '; o += a; o += U' '; o += b; });
  s = rewrite_pairs(
      s, [](char32_t a, char32_t b) { return is_digit(a) && b == U'-'; },
      [](std::u32string& o, char32_t a, char32_t b) { o += a; o += U' '; o += b; o += U' '; });

  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && text::is_space(s[i])) ++i;
    const auto start = i;
    while (i < s.size() && !text::is_space(s[i])) ++i;
    if (i > start) tokens.push_back(text::to_utf8(std::u32string_view(s).substr(start, i - start)));
  }
  return tokens;
}

void replace_all(std::string& s, std::string_view from, std::string_view to) {
  for (auto pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size())) {
    s.replace(pos, from.size(), to);
  }
}

std::vector<std::string> tokenize_13a(std::string_view text) {
  std::string line(text);
  replace_all(line, "<skipped>", "");
  replace_all(line, "-\n", "");
  replace_all(line, "\n", " ");
  if (line.find('&') != std::string::npos) {
    replace_all(line, "&quot;", "\"");
    replace_all(line, "&amp;", "&");
    replace_all(line, "&lt;", "<");
    replace_all(line, "&gt;", ">");
  }
  std::u32string padded = U" ";
  padded += text::to_u32(line);
  padded += U' ';
  return regexp_tokenize(padded);
}

std::vector<std::string> tokenize_zh(std::string_view text) {
  std::u32string line = text::to_u32(text);
  std::size_t b = 0, e = line.size();
  while (b < e && text::is_space(line[b])) ++b;
  while (e > b && text::is_space(line[e - 1])) --e;
  std::u32string spaced;
  spaced.reserve((e - b) * 3);
  for (std::size_t i = b; i < e; ++i) {
    if (is_chinese_char(line[i])) {
      spaced += U' ';
      spaced += line[i];
      spaced += U' ';
    } else {
      spaced += line[i];
    }
  }
  return regexp_tokenize(spaced);
}

/// sacreBLEU strips trailing whitespace from each segment before tokenizing it.
std::vector<std::string> tokenize_segment(std::string_view segment, TokenizerKind kind) {
  auto cps = text::to_u32(segment);
  while (!cps.empty() && text::is_space(cps.back())) cps.pop_back();
  return tokenize(text::to_utf8(cps), kind);
}

using NgramCounts = std::unordered_map<std::string, std::size_t>;

NgramCounts count_ngrams(const std::vector<std::string>& tokens, std::size_t n) {
  NgramCounts counts;
  if (tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    std::string key = tokens[i];
    for (std::size_t k = 1; k < n; ++k) {
      key += ' ';
      key += tokens[i + k];
    }
    ++counts[key];
  }
  return counts;
}

}  // namespace

std::string_view to_string(TokenizerKind kind) { return kind == TokenizerKind::char_zh ? "zh" : "13a"; }

TokenizerKind parse_tokenizer(std::string_view s) {
  if (s == "13a" || s == "intl_13a") return TokenizerKind::intl_13a;
  if (s == "zh" || s == "char_zh") return TokenizerKind::char_zh;
  throw ValidationError("unknown tokenizer '" + std::string(s) + "' (expected 13a or zh)");
}

TokenizerKind tokenizer_for(const Direction& direction) {
  return direction.tgt.code() == "zh" ? TokenizerKind::char_zh : TokenizerKind::intl_13a;
}

bool is_chinese_char(char32_t c) {
  for (const auto& [lo, hi] : kChineseRanges) {
    if (c < lo) return false;
    if (c <= hi) return true;
  }
  return false;
}

std::vector<std::string> tokenize(std::string_view text, TokenizerKind kind) {
  return kind == TokenizerKind::char_zh ? tokenize_zh(text) : tokenize_13a(text);
}

std::string_view to_string(Smoothing s) { return s == Smoothing::exp ? "exp" : "none"; }

Smoothing parse_smoothing(std::string_view s) {
  if (s == "none") return Smoothing::none;
  if (s == "exp") return Smoothing::exp;
  throw ValidationError("unknown smoothing '" + std::string(s) + "' (expected none or exp)");
}

BleuStats& BleuStats::operator+=(const BleuStats& other) {
  for (std::size_t n = 0; n < kMaxOrder; ++n) {
    correct[n] += other.correct[n];
    total[n] += other.total[n];
  }
  hyp_len += other.hyp_len;
  ref_len += other.ref_len;
  return *this;
}

BleuStats segment_stats(const std::vector<std::string>& hyp, const std::vector<std::string>& ref) {
  BleuStats stats;
  stats.hyp_len = hyp.size();
  stats.ref_len = ref.size();
  for (std::size_t n = 1; n <= kMaxOrder; ++n) {
    const auto hyp_counts = count_ngrams(hyp, n);
    const auto ref_counts = count_ngrams(ref, n);
    std::size_t matched = 0;
    for (const auto& [gram, count] : hyp_counts) {
      if (const auto it = ref_counts.find(gram); it != ref_counts.end()) matched += std::min(count, it->second);
    }
    stats.correct[n - 1] = matched;
    stats.total[n - 1] = hyp.size() >= n ? hyp.size() - n + 1 : 0;
  }
  return stats;
}

BleuScore score_from_stats(const BleuStats& stats, Smoothing smoothing) {
  BleuScore out;
  out.stats = stats;
  out.hyp_len = stats.hyp_len;
  out.ref_len = stats.ref_len;
  out.brevity_penalty = 1.0;
  if (stats.hyp_len < stats.ref_len) {
    out.brevity_penalty =
        stats.hyp_len > 0 ? std::exp(1.0 - static_cast<double>(stats.ref_len) / static_cast<double>(stats.hyp_len))
                          : 0.0;
  }

  const bool any_match = std::any_of(stats.correct.begin(), stats.correct.end(), [](auto c) { return c > 0; });
  if (!any_match) return out;

  double smooth = 1.0;
  for (std::size_t n = 0; n < kMaxOrder; ++n) {
    if (stats.total[n] == 0) break;
    const auto total = static_cast<double>(stats.total[n]);
    if (stats.correct[n] == 0) {
      if (smoothing == Smoothing::exp) {
        smooth *= 2.0;
        out.precisions[n] = 1.0 / (smooth * total);
      }
    } else {
      out.precisions[n] = static_cast<double>(stats.correct[n]) / total;
    }
  }

  // A zero precision drives the geometric mean to zero.
  if (std::any_of(out.precisions.begin(), out.precisions.end(), [](double p) { return p == 0.0; })) return out;
  double log_sum = 0.0;
  for (double p : out.precisions) log_sum += std::log(p);
  out.score = out.brevity_penalty * std::exp(log_sum / static_cast<double>(kMaxOrder)) * 100.0;
  return out;
}

BleuScore corpus_bleu(const std::vector<std::string>& hyps, const std::vector<std::string>& refs,
                      TokenizerKind kind, Smoothing smoothing) {
  if (hyps.size() != refs.size()) {
    throw ValidationError("hypothesis/reference count mismatch: " + std::to_string(hyps.size()) + " vs " +
                          std::to_string(refs.size()));
  }
  if (hyps.empty()) throw ValidationError("cannot score an empty corpus");
  BleuStats total;
  for (std::size_t i = 0; i < hyps.size(); ++i) {
    total += segment_stats(tokenize_segment(hyps[i], kind), tokenize_segment(refs[i], kind));
  }
  return score_from_stats(total, smoothing);
}

std::string signature(TokenizerKind kind, Smoothing smoothing) {
  return "nrefs:1|case:mixed|eff:no|tok:" + std::string(to_string(kind)) + "|smooth:" +
         std::string(to_string(smoothing)) + "|version:parrot-" PARROT_VERSION;
}

nlohmann::ordered_json to_json(const BleuScore& s) {
  nlohmann::ordered_json j;
  j["score"] = s.score;
  j["precisions"] = s.precisions;
  j["brevity_penalty"] = s.brevity_penalty;
  j["hyp_len"] = s.hyp_len;
  j["ref_len"] = s.ref_len;
  j["correct"] = s.stats.correct;
  j["total"] = s.stats.total;
  return j;
}

}  // namespace parrot::eval
