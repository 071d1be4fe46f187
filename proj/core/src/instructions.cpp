#include "parrot/instructions.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "parrot/digest.hpp"
#include "parrot/error.hpp"
#include "parrot/io.hpp"
#include "parrot/prompt.hpp"
#include "parrot/random.hpp"
#include "parrot/text.hpp"

namespace parrot {

namespace {

constexpr std::string_view kSrc = "{SRC}";
constexpr std::string_view kTgt = "{TGT}";

std::size_t count_occurrences(std::string_view haystack, std::string_view needle) {
  std::size_t n = 0;
  for (auto pos = haystack.find(needle); pos != std::string_view::npos; pos = haystack.find(needle, pos + needle.size())) {
    ++n;
  }
  return n;
}

void replace_all(std::string& s, std::string_view from, std::string_view to) {
  for (auto pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size())) {
    s.replace(pos, from.size(), to);
  }
}

quality::ErrorLevel level_for(mqm::Severity s) {
  switch (s) {
    case mqm::Severity::major: return quality::ErrorLevel::major;
    case mqm::Severity::minor: return quality::ErrorLevel::minor;
    case mqm::Severity::neutral: return quality::ErrorLevel::no_error;
  }
  return quality::ErrorLevel::no_error;
}

const SourceSegment& lookup(const SourceIndex& sources, const std::string& segment_id) {
  const auto it = sources.find(segment_id);
  if (it == sources.end()) throw ValidationError("no source sentence for segment '" + segment_id + "'");
  return it->second;
}

}  // namespace

std::string_view to_string(InstructionKind kind) {
  switch (kind) {
    case InstructionKind::translation: return "translation";
    case InstructionKind::contrastive: return "contrastive";
    case InstructionKind::error_guided: return "error_guided";
    case InstructionKind::general: return "general";
  }
  return "general";
}

InstructionKind parse_instruction_kind(std::string_view s) {
  if (s == "translation") return InstructionKind::translation;
  if (s == "contrastive") return InstructionKind::contrastive;
  if (s == "error_guided" || s == "error-guided") return InstructionKind::error_guided;
  if (s == "general") return InstructionKind::general;
  throw ValidationError("unknown instruction kind '" + std::string(s) + "'");
}

void validate(const InstructionExample& ex) {
  if (text::trim(ex.response).empty()) throw ValidationError("example response is empty");
  if (ex.kind == InstructionKind::contrastive) {
    const auto split = extract_preferred(ex.response);
    if (!split.rejected || join_preferred(split.preferred, *split.rejected) != ex.response) {
      throw ValidationError("contrastive response does not have the <p>..</p> rather than <p>..</p> shape");
    }
  }
  if (ex.kind == InstructionKind::error_guided && ex.meta.span_count.value_or(0) > 0) {
    mqm::MarkupSplit split;
    try {
      split = mqm::split_markup(ex.response);
    } catch (const ValidationError& e) {
      throw ValidationError(std::string("error-guided response markup: ") + e.what());
    }
    if (split.spans.size() != *ex.meta.span_count) {
      throw ValidationError("error-guided response has " + std::to_string(split.spans.size()) +
                            " spans, meta says " + std::to_string(*ex.meta.span_count));
    }
  }
}

InstructionPool::InstructionPool(std::vector<std::string> entries) : entries_(std::move(entries)) {
  if (entries_.empty()) throw ValidationError("instruction pool is empty");
  for (const auto& e : entries_) {
    if (count_occurrences(e, kTgt) != 1 || count_occurrences(e, kSrc) > 1) {
      throw ValidationError("pool entry must contain {TGT} once and {SRC} at most once: '" + e + "'");
    }
  }
}

InstructionPool InstructionPool::defaults() {
  return InstructionPool({
      "Translate the following sentences from {SRC} to {TGT}.",
      "Please provide the {TGT} translation for the following sentences.",
      "Translate this {SRC} text into {TGT}.",
  });
}

InstructionPool InstructionPool::from_file(const std::filesystem::path& path) {
  std::vector<std::string> entries;
  for (const auto& line : io::read_lines(path)) {
    const auto t = text::trim(line);
    if (t.empty() || t.front() == '#') continue;
    text::require_utf8(t, path.string());
    entries.emplace_back(t);
  }
  return InstructionPool(std::move(entries));
}

std::string InstructionPool::instantiate(std::size_t index, const Direction& direction) const {
  auto s = entries_.at(index);
  replace_all(s, kSrc, direction.src.display_name());
  replace_all(s, kTgt, direction.tgt.display_name());
  return s;
}

std::string InstructionPool::digest() const {
  std::string joined;
  for (const auto& e : entries_) {
    joined += e;
    joined += '\n';
  }
  return sha256_hex(joined);
}

std::string HintTemplate::errored_hint(mqm::Severity severity, std::string_view category) const {
  const auto cat = text::ascii_lower(text::trim(category));
  if (cat.empty()) throw ValidationError("cannot build an error hint without a category");
  auto s = errored;
  replace_all(s, "{severity}", to_string(severity));
  replace_all(s, "{category}", cat);
  return s;
}

std::string HintTemplate::leveled_hint(quality::ErrorLevel level) const {
  if (level == quality::ErrorLevel::no_error) return clean;
  auto s = leveled;
  replace_all(s, "{severity}", quality::to_string(level));
  return s;
}

SourceIndex index_sources(const std::vector<SentencePair>& pairs) {
  SourceIndex index;
  for (const auto& p : pairs) index.insert_or_assign(p.id, SourceSegment{p.source, p.direction});
  return index;
}

SourceIndex index_sources(const std::vector<mqm::AnnotatedTranslation>& anns) {
  SourceIndex index;
  for (const auto& a : anns) index.emplace(a.segment_id, SourceSegment{a.source, a.direction});
  return index;
}

std::vector<InstructionExample> build_translation(const std::vector<SentencePair>& pairs,
                                                  const InstructionPool& pool, std::uint64_t seed) {
  SeededRng rng(seed);
  std::vector<InstructionExample> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) {
    const auto entry = static_cast<std::size_t>(rng.below(pool.size()));
    InstructionExample ex;
    ex.instruction = pool.instantiate(entry, p.direction);
    ex.input = p.source;
    ex.response = p.target;
    ex.kind = InstructionKind::translation;
    ex.meta.segment_id = p.id;
    ex.meta.direction = p.direction;
    validate(ex);
    out.push_back(std::move(ex));
  }
  return out;
}

std::vector<InstructionExample> build_contrastive(const std::vector<quality::ContrastivePair>& pairs,
                                                  const SourceIndex& sources, const InstructionPool& pool,
                                                  const HintTemplate& hints, std::uint64_t seed) {
  SeededRng rng(seed);
  std::vector<InstructionExample> out;
  out.reserve(pairs.size());
  for (const auto& pair : pairs) {
    if (pair.preferred.segment_id != pair.segment_id || pair.rejected.segment_id != pair.segment_id) {
      throw ValidationError("contrastive pair mixes segments (" + pair.segment_id + ")");
    }
    if (!quality::better(pair.preferred, pair.rejected)) {
      throw ValidationError("contrastive pair for " + pair.segment_id + " is not strictly ordered");
    }
    const auto& src = lookup(sources, pair.segment_id);
    const auto entry = static_cast<std::size_t>(rng.below(pool.size()));
    InstructionExample ex;
    ex.instruction = pool.instantiate(entry, src.direction);
    ex.input = src.source;
    ex.hint = hints.preference;
    ex.response = join_preferred(pair.preferred.text, pair.rejected.text);
    ex.kind = InstructionKind::contrastive;
    ex.meta.segment_id = pair.segment_id;
    ex.meta.systems = {pair.preferred.system, pair.rejected.system};
    ex.meta.direction = src.direction;
    validate(ex);
    out.push_back(std::move(ex));
  }
  return out;
}

std::vector<InstructionExample> build_error_guided(const std::vector<mqm::AnnotatedTranslation>& anns,
                                                   const InstructionPool& pool, const HintTemplate& hints,
                                                   std::uint64_t seed) {
  SeededRng rng(seed);
  std::vector<InstructionExample> out;
  out.reserve(anns.size());
  for (const auto& a : anns) {
    const auto entry = static_cast<std::size_t>(rng.below(pool.size()));
    InstructionExample ex;
    ex.instruction = pool.instantiate(entry, a.direction);
    ex.input = a.source;
    ex.kind = InstructionKind::error_guided;
    ex.meta.segment_id = a.segment_id;
    ex.meta.systems = {a.system};
    ex.meta.direction = a.direction;

    const mqm::ErrorSpan* worst = nullptr;
    for (const auto& s : a.spans) {
      if (!worst || s.severity > worst->severity) worst = &s;
    }
    if (worst && worst->severity != mqm::Severity::neutral) {
      ex.hint = hints.errored_hint(worst->severity, worst->category.raw);
      ex.response = mqm::reinsert_spans(a);
      ex.meta.error_level = level_for(worst->severity);
      ex.meta.span_count = a.spans.size();
    } else if (a.spans.empty() && !a.category.no_error() && a.severity != mqm::Severity::neutral) {
      // Errors without a target span (omissions, source issues): the hint still names them.
      ex.hint = hints.errored_hint(a.severity, a.category.raw);
      ex.response = a.target_plain;
      ex.meta.error_level = level_for(a.severity);
      ex.meta.span_count = 0;
    } else {
      ex.hint = hints.clean;
      ex.response = a.target_plain;
      ex.meta.error_level = quality::ErrorLevel::no_error;
      ex.meta.span_count = 0;
    }
    validate(ex);
    out.push_back(std::move(ex));
  }
  return out;
}

std::vector<InstructionExample> build_error_guided(
    const std::vector<std::pair<quality::ScoredTranslation, quality::ErrorLevel>>& levels,
    const SourceIndex& sources, const InstructionPool& pool, const HintTemplate& hints, std::uint64_t seed) {
  SeededRng rng(seed);
  std::vector<InstructionExample> out;
  out.reserve(levels.size());
  for (const auto& [scored, level] : levels) {
    const auto& src = lookup(sources, scored.segment_id);
    const auto entry = static_cast<std::size_t>(rng.below(pool.size()));
    InstructionExample ex;
    ex.instruction = pool.instantiate(entry, src.direction);
    ex.input = src.source;
    ex.hint = hints.leveled_hint(level);
    ex.response = scored.text;
    ex.kind = InstructionKind::error_guided;
    ex.meta.segment_id = scored.segment_id;
    ex.meta.systems = {scored.system};
    ex.meta.direction = src.direction;
    ex.meta.error_level = level;
    ex.meta.span_count = 0;
    validate(ex);
    out.push_back(std::move(ex));
  }
  return out;
}

std::vector<InstructionExample> mix_dataset(const std::vector<DatasetPart>& parts, std::uint64_t seed) {
  SeededRng rng(seed);
  std::vector<InstructionExample> out;
  for (const auto& part : parts) {
    if (!std::isfinite(part.weight) || part.weight < 0.0) throw ValidationError("mixture weights must be finite and >= 0");
    const auto n = part.examples.size();
    if (n == 0) continue;
    const auto target = static_cast<std::size_t>(std::llround(part.weight * static_cast<double>(n)));
    for (std::size_t copy = 0; copy < target / n; ++copy) {
      out.insert(out.end(), part.examples.begin(), part.examples.end());
    }
    const auto remainder = target % n;
    if (remainder > 0) {
      std::vector<std::size_t> idx(n);
      std::iota(idx.begin(), idx.end(), std::size_t{0});
      for (std::size_t k = 0; k < remainder; ++k) {
        std::swap(idx[k], idx[k + static_cast<std::size_t>(rng.below(n - k))]);
      }
      idx.resize(remainder);
      std::sort(idx.begin(), idx.end());
      for (auto i : idx) out.push_back(part.examples[i]);
    }
  }
  rng.shuffle(std::span<InstructionExample>(out));
  return out;
}

std::map<std::string, std::size_t> count_by_kind(const std::vector<InstructionExample>& examples) {
  std::map<std::string, std::size_t> counts;
  for (const auto& ex : examples) ++counts[std::string(to_string(ex.kind))];
  return counts;
}

nlohmann::ordered_json to_json(const InstructionExample& ex) {
  nlohmann::ordered_json j;
  j["instruction"] = ex.instruction;
  j["input"] = ex.input;
  j["hint"] = ex.hint ? nlohmann::ordered_json(*ex.hint) : nlohmann::ordered_json(nullptr);
  j["response"] = ex.response;
  j["kind"] = to_string(ex.kind);
  nlohmann::ordered_json meta = nlohmann::ordered_json::object();
  if (ex.meta.segment_id) meta["segment_id"] = *ex.meta.segment_id;
  if (!ex.meta.systems.empty()) meta["systems"] = ex.meta.systems;
  if (ex.meta.direction) meta["direction"] = *ex.meta.direction;
  if (ex.meta.error_level) meta["error_level"] = quality::to_string(*ex.meta.error_level);
  if (ex.meta.span_count) meta["span_count"] = *ex.meta.span_count;
  j["meta"] = std::move(meta);
  return j;
}

InstructionExample example_from_json(const nlohmann::json& j) {
  InstructionExample ex;
  ex.instruction = j.at("instruction").get<std::string>();
  ex.input = j.value("input", std::string{});
  if (j.contains("hint") && !j.at("hint").is_null()) ex.hint = j.at("hint").get<std::string>();
  if (j.contains("response")) {
    ex.response = j.at("response").get<std::string>();
    ex.kind = parse_instruction_kind(j.value("kind", std::string("translation")));
  } else {
    ex.response = j.value("output", std::string{});
    ex.kind = InstructionKind::general;
  }
  if (j.contains("meta") && j.at("meta").is_object()) {
    const auto& m = j.at("meta");
    if (m.contains("segment_id")) ex.meta.segment_id = m.at("segment_id").get<std::string>();
    if (m.contains("systems")) ex.meta.systems = m.at("systems").get<std::vector<std::string>>();
    if (m.contains("direction")) ex.meta.direction = direction_from_json(m.at("direction"));
    if (m.contains("error_level")) ex.meta.error_level = quality::parse_error_level(m.at("error_level").get<std::string>());
    if (m.contains("span_count")) ex.meta.span_count = m.at("span_count").get<std::size_t>();
  }
  return ex;
}

std::string examples_jsonl(const std::vector<InstructionExample>& examples) {
  std::string out;
  for (const auto& ex : examples) {
    out += io::dump_line(to_json(ex));
    out += '\n';
  }
  return out;
}

void write_examples_jsonl(const std::filesystem::path& path, const std::vector<InstructionExample>& examples) {
  io::write_file_atomic(path, examples_jsonl(examples));
}

std::vector<InstructionExample> read_examples_jsonl(const std::filesystem::path& path) {
  std::vector<InstructionExample> out;
  io::for_each_jsonl(path, [&](const nlohmann::json& j, std::size_t) { out.push_back(example_from_json(j)); });
  return out;
}

}  // namespace parrot
