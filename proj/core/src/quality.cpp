#include "parrot/quality.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "parrot/error.hpp"
#include "parrot/io.hpp"
#include "parrot/random.hpp"

namespace parrot::quality {

std::string_view to_string(ErrorLevel level) {
  switch (level) {
    case ErrorLevel::major: return "major";
    case ErrorLevel::minor: return "minor";
    case ErrorLevel::no_error: return "no_error";
  }
  return "major";
}

ErrorLevel parse_error_level(std::string_view s) {
  if (s == "major") return ErrorLevel::major;
  if (s == "minor") return ErrorLevel::minor;
  if (s == "no_error" || s == "no-error") return ErrorLevel::no_error;
  throw ValidationError("unknown error level '" + std::string(s) + "'");
}

std::string_view to_string(ScoreSource s) { return s == ScoreSource::human ? "human" : "automatic"; }

ScoreSource parse_score_source(std::string_view s) {
  if (s == "automatic") return ScoreSource::automatic;
  if (s == "human") return ScoreSource::human;
  throw ValidationError("unknown score source '" + std::string(s) + "'");
}

ErrorLevel bucket(double score) {
  if (!std::isfinite(score)) throw ValidationError("quality score must be finite");
  if (score <= kMajorUpperBound) return ErrorLevel::major;
  if (score <= kMinorUpperBound) return ErrorLevel::minor;
  return ErrorLevel::no_error;
}

std::vector<std::pair<ScoredTranslation, ErrorLevel>> assign_levels(const std::vector<ScoredTranslation>& scored) {
  std::vector<std::pair<ScoredTranslation, ErrorLevel>> out;
  out.reserve(scored.size());
  for (const auto& s : scored) out.emplace_back(s, bucket(s.score));
  return out;
}

bool better(const ScoredTranslation& a, const ScoredTranslation& b) {
  return a.source == ScoreSource::human ? a.score < b.score : a.score > b.score;
}

double default_min_gap(ScoreSource source) { return source == ScoreSource::human ? 0.0 : 1.0; }

std::vector<ContrastivePair> make_pairs(const std::vector<ScoredTranslation>& scored, double min_gap,
                                        std::size_t max_per_segment, std::uint64_t seed) {
  if (!(min_gap >= 0.0)) throw ValidationError("min_gap must be >= 0");
  if (max_per_segment < 1) throw ValidationError("max_per_segment must be >= 1");

  std::map<std::string, std::vector<const ScoredTranslation*>> by_segment;
  for (const auto& s : scored) {
    if (!std::isfinite(s.score)) throw ValidationError("non-finite score for " + s.segment_id + "/" + s.system);
    by_segment[s.segment_id].push_back(&s);
  }

  std::vector<ContrastivePair> out;
  for (const auto& [segment, items] : by_segment) {
    if (items.size() < 2) continue;
    const auto source = items.front()->source;
    if (std::any_of(items.begin(), items.end(), [&](const auto* s) { return s->source != source; })) {
      throw ValidationError("segment " + segment + " mixes automatic and human scores");
    }

    std::vector<ContrastivePair> candidates;
    for (std::size_t i = 0; i < items.size(); ++i) {
      for (std::size_t j = i + 1; j < items.size(); ++j) {
        const auto& a = *items[i];
        const auto& b = *items[j];
        if (std::abs(a.score - b.score) < min_gap) continue;
        if (better(a, b)) {
          candidates.push_back(ContrastivePair{segment, a, b});
        } else if (better(b, a)) {
          candidates.push_back(ContrastivePair{segment, b, a});
        }
      }
    }

    if (candidates.size() > max_per_segment) {
      SeededRng rng(derive_seed(seed, segment));
      std::vector<std::size_t> order(candidates.size());
      std::iota(order.begin(), order.end(), std::size_t{0});
      // Partial Fisher-Yates: the first max_per_segment slots form a uniform sample.
      for (std::size_t k = 0; k < max_per_segment; ++k) {
        const auto pick = k + static_cast<std::size_t>(rng.below(order.size() - k));
        std::swap(order[k], order[pick]);
      }
      order.resize(max_per_segment);
      std::sort(order.begin(), order.end());
      for (auto idx : order) out.push_back(std::move(candidates[idx]));
    } else {
      for (auto& c : candidates) out.push_back(std::move(c));
    }
  }
  return out;
}

std::vector<ScoredTranslation> from_segment_scores(const std::vector<mqm::SegmentScore>& scores,
                                                   const std::vector<mqm::AnnotatedTranslation>& anns) {
  std::map<std::pair<std::string, std::string>, const std::string*> texts;
  for (const auto& a : anns) texts.emplace(std::pair{a.segment_id, a.system}, &a.target_plain);
  std::vector<ScoredTranslation> out;
  out.reserve(scores.size());
  for (const auto& s : scores) {
    const auto it = texts.find({s.segment_id, s.system});
    if (it == texts.end()) {
      throw ValidationError("no annotation text for " + s.segment_id + "/" + s.system);
    }
    out.push_back(ScoredTranslation{s.segment_id, s.system, *it->second, s.score, ScoreSource::human});
  }
  return out;
}

nlohmann::ordered_json to_json(const ScoredTranslation& s) {
  nlohmann::ordered_json j;
  j["segment_id"] = s.segment_id;
  j["system"] = s.system;
  j["text"] = s.text;
  j["score"] = s.score;
  j["source"] = to_string(s.source);
  return j;
}

ScoredTranslation scored_from_json(const nlohmann::json& j) {
  ScoredTranslation s{j.at("segment_id").get<std::string>(), j.at("system").get<std::string>(),
                      j.at("text").get<std::string>(), j.at("score").get<double>(),
                      parse_score_source(j.value("source", std::string("automatic")))};
  if (!std::isfinite(s.score)) throw ValidationError("non-finite score");
  return s;
}

std::vector<ScoredTranslation> read_scored_jsonl(const std::filesystem::path& path) {
  std::vector<ScoredTranslation> out;
  io::for_each_jsonl(path, [&](const nlohmann::json& j, std::size_t) { out.push_back(scored_from_json(j)); });
  return out;
}

void write_scored_jsonl(const std::filesystem::path& path, const std::vector<ScoredTranslation>& scored) {
  std::string out;
  for (const auto& s : scored) {
    out += io::dump_line(to_json(s));
    out += '\n';
  }
  io::write_file_atomic(path, out);
}

void write_levels_jsonl(const std::filesystem::path& path,
                        const std::vector<std::pair<ScoredTranslation, ErrorLevel>>& levels) {
  std::string out;
  for (const auto& [s, level] : levels) {
    auto j = to_json(s);
    j["level"] = to_string(level);
    out += io::dump_line(j);
    out += '\n';
  }
  io::write_file_atomic(path, out);
}

std::vector<std::pair<ScoredTranslation, ErrorLevel>> read_levels_jsonl(const std::filesystem::path& path) {
  std::vector<std::pair<ScoredTranslation, ErrorLevel>> out;
  io::for_each_jsonl(path, [&](const nlohmann::json& j, std::size_t) {
    auto s = scored_from_json(j);
    const auto level = j.contains("level") ? parse_error_level(j.at("level").get<std::string>()) : bucket(s.score);
    out.emplace_back(std::move(s), level);
  });
  return out;
}

}  // namespace parrot::quality
