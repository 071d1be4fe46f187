#include "parrot/mqm.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <optional>
#include <numeric>

#include "parrot/error.hpp"
#include "parrot/io.hpp"
#include "parrot/text.hpp"

namespace parrot::mqm {

namespace {

constexpr std::string_view kOpen = "<v>";
constexpr std::string_view kClose = "</v>";

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> cols;
  std::size_t pos = 0;
  while (true) {
    const auto tab = line.find('\t', pos);
    if (tab == std::string_view::npos) {
      cols.push_back(line.substr(pos));
      return cols;
    }
    cols.push_back(line.substr(pos, tab - pos));
    pos = tab + 1;
  }
}

/// Byte offset of every scalar value in `s`, plus s.size() at the end.
std::vector<std::size_t> scalar_offsets(std::string_view s) {
  std::vector<std::size_t> offsets;
  offsets.reserve(s.size() + 1);
  for (std::size_t i = 0; i < s.size(); ++i) {
    if ((static_cast<unsigned char>(s[i]) & 0xC0) != 0x80) offsets.push_back(i);
  }
  offsets.push_back(s.size());
  return offsets;
}

}  // namespace

Severity parse_severity(std::string_view s) {
  const auto lower = text::ascii_lower(text::trim(s));
  if (lower == "major") return Severity::major;
  if (lower == "minor") return Severity::minor;
  if (lower == "neutral" || lower == "no-error" || lower == "no_error") return Severity::neutral;
  throw ValidationError("unknown severity '" + std::string(s) + "'");
}

std::string_view to_string(Severity s) {
  switch (s) {
    case Severity::major: return "major";
    case Severity::minor: return "minor";
    case Severity::neutral: return "neutral";
  }
  return "neutral";
}

ErrorCategory::ErrorCategory(std::string raw_category) : raw(std::move(raw_category)) {
  if (text::trim(raw).empty()) throw ValidationError("error category must be non-empty");
}

std::string ErrorCategory::top_level() const { return raw.substr(0, raw.find('/')); }

bool ErrorCategory::no_error() const { return text::iequals(raw, kNoErrorCategory); }

MarkupSplit split_markup(std::string_view marked) {
  MarkupSplit out;
  out.plain.reserve(marked.size());
  std::size_t plain_len = 0;
  std::optional<std::size_t> open;
  std::size_t i = 0;
  while (i < marked.size()) {
    if (marked.compare(i, kOpen.size(), kOpen) == 0) {
      if (open) throw ValidationError("nested <v> marker");
      open = plain_len;
      i += kOpen.size();
    } else if (marked.compare(i, kClose.size(), kClose) == 0) {
      if (!open) throw ValidationError("</v> without matching <v>");
      out.spans.emplace_back(*open, plain_len);
      open.reset();
      i += kClose.size();
    } else {
      const char c = marked[i++];
      out.plain.push_back(c);
      if ((static_cast<unsigned char>(c) & 0xC0) != 0x80) ++plain_len;
    }
  }
  if (open) throw ValidationError("unclosed <v> marker");
  return out;
}

std::vector<AnnotatedTranslation> parse_mqm_tsv_text(std::string_view content, const Direction& direction) {
  auto lines = io::split_lines(content);
  if (lines.empty()) throw ValidationError("MQM TSV is empty (no header)");
  for (auto& line : lines) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
  }

  const auto header = split_tabs(lines.front());
  std::map<std::string, std::size_t, std::less<>> column;
  for (std::size_t i = 0; i < header.size(); ++i) {
    column.emplace(text::ascii_lower(text::trim(header[i])), i);
  }
  static constexpr std::array<std::string_view, 7> kRequired = {
      "system", "seg_id", "rater", "source", "target", "category", "severity"};
  std::array<std::size_t, kRequired.size()> idx{};
  for (std::size_t k = 0; k < kRequired.size(); ++k) {
    const auto it = column.find(kRequired[k]);
    if (it == column.end()) throw ValidationError("MQM TSV is missing column '" + std::string(kRequired[k]) + "'");
    idx[k] = it->second;
  }
  const std::size_t needed = *std::max_element(idx.begin(), idx.end()) + 1;

  std::vector<AnnotatedTranslation> out;
  out.reserve(lines.size() - 1);
  for (std::size_t row = 1; row < lines.size(); ++row) {
    if (lines[row].empty()) continue;
    const auto where = "row " + std::to_string(row + 1);
    const auto cols = split_tabs(lines[row]);
    if (cols.size() < needed) {
      throw ValidationError(where + ": expected at least " + std::to_string(needed) + " columns, found " +
                            std::to_string(cols.size()));
    }
    const auto field = [&](std::size_t k) {
      text::require_utf8(cols[idx[k]], where);
      return text::nfc(cols[idx[k]]);
    };
    AnnotatedTranslation t{field(1), field(0), field(2), direction, field(3), {}, {},
                           ErrorCategory(field(5)), Severity::neutral};
    try {
      t.severity = parse_severity(field(6));
    } catch (const ValidationError& e) {
      throw ValidationError(where + ": " + e.what());
    }

    MarkupSplit split;
    try {
      split = split_markup(field(4));
    } catch (const ValidationError& e) {
      throw ValidationError(where + ": " + e.what());
    }
    if (t.category.no_error() && !split.spans.empty()) {
      throw ValidationError(where + ": no-error row carries <v> markers");
    }
    t.target_plain = std::move(split.plain);
    for (const auto& [start, end] : split.spans) {
      t.spans.push_back(ErrorSpan{start, end, t.category, t.severity});
    }
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<AnnotatedTranslation> parse_mqm_tsv(const std::filesystem::path& file, const Direction& direction) {
  try {
    return parse_mqm_tsv_text(io::read_file(file), direction);
  } catch (const ValidationError& e) {
    throw ValidationError(file.string() + ": " + e.what());
  }
}

std::string reinsert_spans(const AnnotatedTranslation& t) {
  const auto offsets = scalar_offsets(t.target_plain);
  const std::size_t length = offsets.size() - 1;
  std::string out;
  out.reserve(t.target_plain.size() + t.spans.size() * (kOpen.size() + kClose.size()));
  std::size_t cursor = 0;
  for (const auto& span : t.spans) {
    if (span.start > span.end || span.end > length) {
      throw ValidationError("span (" + std::to_string(span.start) + "," + std::to_string(span.end) +
                            ") out of range for text of length " + std::to_string(length));
    }
    if (span.start < cursor) {
      throw ValidationError("overlapping or unsorted span at offset " + std::to_string(span.start));
    }
    out.append(t.target_plain, offsets[cursor], offsets[span.start] - offsets[cursor]);
    out.append(kOpen);
    out.append(t.target_plain, offsets[span.start], offsets[span.end] - offsets[span.start]);
    out.append(kClose);
    cursor = span.end;
  }
  out.append(t.target_plain, offsets[cursor], std::string::npos);
  return out;
}

double error_weight(const ErrorCategory& category, Severity severity, const MqmWeights& weights) {
  if (category.no_error()) return 0.0;
  const auto lower = text::ascii_lower(category.raw);
  switch (severity) {
    case Severity::neutral:
      return 0.0;
    case Severity::major:
      return lower.starts_with("non-translation") ? weights.nontranslation : weights.major;
    case Severity::minor:
      return lower == "fluency/punctuation" ? weights.minor_fluency_punct : weights.minor;
  }
  return 0.0;
}

std::vector<SegmentScore> score_segments(const std::vector<AnnotatedTranslation>& anns, const MqmWeights& weights) {
  for (double w : {weights.major, weights.minor, weights.minor_fluency_punct, weights.nontranslation}) {
    if (!(w >= 0.0)) throw ValidationError("MQM weights must be non-negative");
  }
  // (segment, system) -> rater -> individual error weights
  std::map<std::pair<std::string, std::string>, std::map<std::string, std::vector<double>>> per_key;
  for (const auto& a : anns) {
    auto& terms = per_key[{a.segment_id, a.system}][a.rater];
    // An error row without markers (e.g. an omission) still counts once.
    const std::size_t errors = std::max<std::size_t>(1, a.spans.size());
    const double w = error_weight(a.category, a.severity, weights);
    for (std::size_t i = 0; i < errors; ++i) terms.push_back(w);
  }
  std::vector<SegmentScore> out;
  out.reserve(per_key.size());
  for (auto& [key, raters] : per_key) {
    double total = 0.0;
    for (auto& [rater, terms] : raters) {
      // Sorted summation keeps the score independent of row order.
      std::sort(terms.begin(), terms.end());
      total += std::accumulate(terms.begin(), terms.end(), 0.0);
    }
    out.push_back(SegmentScore{key.first, key.second, total / static_cast<double>(raters.size())});
  }
  return out;
}

nlohmann::ordered_json to_json(const AnnotatedTranslation& t) {
  nlohmann::ordered_json j;
  j["segment_id"] = t.segment_id;
  j["system"] = t.system;
  j["rater"] = t.rater;
  j["direction"] = t.direction;
  j["source"] = t.source;
  j["target_plain"] = t.target_plain;
  j["category"] = t.category.raw;
  j["severity"] = to_string(t.severity);
  auto spans = nlohmann::ordered_json::array();
  for (const auto& s : t.spans) {
    spans.push_back({{"start", s.start}, {"end", s.end}, {"category", s.category.raw},
                     {"severity", to_string(s.severity)}});
  }
  j["spans"] = std::move(spans);
  return j;
}

AnnotatedTranslation annotation_from_json(const nlohmann::json& j) {
  AnnotatedTranslation t{j.at("segment_id").get<std::string>(),
                         j.at("system").get<std::string>(),
                         j.value("rater", std::string{}),
                         direction_from_json(j.at("direction")),
                         j.at("source").get<std::string>(),
                         j.at("target_plain").get<std::string>(),
                         {},
                         ErrorCategory(j.value("category", std::string(kNoErrorCategory))),
                         parse_severity(j.value("severity", std::string("neutral")))};
  for (const auto& s : j.value("spans", nlohmann::json::array())) {
    t.spans.push_back(ErrorSpan{s.at("start").get<std::size_t>(), s.at("end").get<std::size_t>(),
                                ErrorCategory(s.at("category").get<std::string>()),
                                parse_severity(s.at("severity").get<std::string>())});
  }
  std::sort(t.spans.begin(), t.spans.end(), [](const ErrorSpan& a, const ErrorSpan& b) {
    return a.start != b.start ? a.start < b.start : a.end < b.end;
  });
  return t;
}

void write_annotations_jsonl(const std::filesystem::path& path, const std::vector<AnnotatedTranslation>& anns) {
  std::string out;
  for (const auto& a : anns) {
    out += io::dump_line(to_json(a));
    out += '\n';
  }
  io::write_file_atomic(path, out);
}

std::vector<AnnotatedTranslation> read_annotations_jsonl(const std::filesystem::path& path) {
  std::vector<AnnotatedTranslation> out;
  io::for_each_jsonl(path, [&](const nlohmann::json& j, std::size_t) { out.push_back(annotation_from_json(j)); });
  return out;
}

}  // namespace parrot::mqm
