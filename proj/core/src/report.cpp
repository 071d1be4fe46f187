#include "parrot/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "parrot/error.hpp"
#include "parrot/io.hpp"
#include "parrot/prompt.hpp"
#include "parrot/text.hpp"

namespace parrot::eval {

namespace {

std::string_view display_name(HintCondition c) {
  switch (c) {
    case HintCondition::none: return "None";
    case HintCondition::no_error: return "No Err.";
    case HintCondition::minor: return "Minor Err.";
    case HintCondition::major: return "Major Err.";
    case HintCondition::preferred: return "Prefer.";
    case HintCondition::unpreferred: return "Unprefer.";
  }
  return "?";
}

std::string signed_delta(const std::optional<double>& d) {
  if (!d) return "";
  return fmt::format("{:+.2f}", *d);
}

std::optional<double> parse_number(std::string_view s) {
  s = text::trim(s);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

}  // namespace

std::string_view to_string(HintCondition c) {
  switch (c) {
    case HintCondition::none: return "none";
    case HintCondition::no_error: return "no_error";
    case HintCondition::minor: return "minor";
    case HintCondition::major: return "major";
    case HintCondition::preferred: return "preferred";
    case HintCondition::unpreferred: return "unpreferred";
  }
  return "none";
}

HintCondition parse_hint_condition(std::string_view s) {
  if (s == "none") return HintCondition::none;
  if (s == "no_error" || s == "no-error") return HintCondition::no_error;
  if (s == "minor") return HintCondition::minor;
  if (s == "major") return HintCondition::major;
  if (s == "preferred") return HintCondition::preferred;
  if (s == "unpreferred") return HintCondition::unpreferred;
  throw ValidationError("unknown hint condition '" + std::string(s) + "'");
}

std::vector<double> read_segment_scores(const std::filesystem::path& path) {
  std::vector<double> scores;
  const auto lines = io::read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (auto v = parse_number(lines[i])) {
      scores.push_back(*v);
    } else {
      try {
        const auto j = nlohmann::json::parse(lines[i]);
        scores.push_back(j.at("score").get<double>());
      } catch (const nlohmann::json::exception&) {
        throw ValidationError(path.string() + ":" + std::to_string(i + 1) + ": expected a number or {\"score\": ...}");
      }
    }
    if (!std::isfinite(scores.back())) throw ValidationError(path.string() + ":" + std::to_string(i + 1) + ": non-finite score");
  }
  return scores;
}

EvalReport hint_sweep_report(const std::map<HintCondition, SweepRun>& runs, const std::filesystem::path& refs,
                             const Direction& direction, std::optional<TokenizerKind> tokenizer) {
  if (runs.empty()) throw ValidationError("hint sweep needs at least one run");
  const auto ref_lines = io::read_lines(refs);
  if (ref_lines.empty()) throw ValidationError("reference file " + refs.string() + " is empty");

  EvalReport report{direction, tokenizer.value_or(tokenizer_for(direction)), {}, {}};
  report.signature = signature(report.tokenizer);

  for (const auto& [condition, run] : runs) {
    const auto name = std::string(to_string(condition));
    const auto hyps = io::read_lines(run.hyp_file);
    if (hyps.size() != ref_lines.size()) {
      throw ValidationError("run '" + name + "' (" + run.hyp_file.string() + ") has " + std::to_string(hyps.size()) +
                            " lines but the references have " + std::to_string(ref_lines.size()));
    }
    ReportRow row;
    row.condition = condition;
    row.n = ref_lines.size();
    row.bleu = corpus_bleu(hyps, ref_lines, report.tokenizer);
    if (run.comet_file) {
      const auto scores = read_segment_scores(*run.comet_file);
      if (scores.size() != ref_lines.size()) {
        throw ValidationError("run '" + name + "' COMET file has " + std::to_string(scores.size()) +
                              " scores for " + std::to_string(ref_lines.size()) + " segments");
      }
      row.comet = std::accumulate(scores.begin(), scores.end(), 0.0) / static_cast<double>(scores.size());
    }
    report.rows.push_back(std::move(row));
  }

  const auto baseline = std::find_if(report.rows.begin(), report.rows.end(),
                                     [](const ReportRow& r) { return r.condition == HintCondition::none; });
  if (baseline != report.rows.end()) {
    const auto base = *baseline;
    for (auto& row : report.rows) {
      row.delta_bleu = row.bleu.score - base.bleu.score;
      if (row.comet && base.comet) row.delta_comet = *row.comet - *base.comet;
    }
  }
  return report;
}

std::string to_markdown(const EvalReport& report) {
  const bool with_comet = std::any_of(report.rows.begin(), report.rows.end(), [](const auto& r) { return r.comet.has_value(); });
  std::string out = fmt::format("### {} ({})\n\n", report.direction.str(), report.signature);
  out += with_comet ? "| Hint | BLEU | ΔBLEU | COMET | ΔCOMET | n |\n|---|---:|---:|---:|---:|---:|\n"
                    : "| Hint | BLEU | ΔBLEU | n |\n|---|---:|---:|---:|\n";
  for (const auto& r : report.rows) {
    if (with_comet) {
      out += fmt::format("| {} | {:.2f} | {} | {} | {} | {} |\n", display_name(r.condition), r.bleu.score,
                         signed_delta(r.delta_bleu), r.comet ? fmt::format("{:.2f}", *r.comet) : std::string{},
                         signed_delta(r.delta_comet), r.n);
    } else {
      out += fmt::format("| {} | {:.2f} | {} | {} |\n", display_name(r.condition), r.bleu.score,
                         signed_delta(r.delta_bleu), r.n);
    }
  }
  return out;
}

nlohmann::ordered_json to_json(const EvalReport& report) {
  nlohmann::ordered_json j;
  j["direction"] = report.direction.str();
  j["tokenizer"] = to_string(report.tokenizer);
  j["signature"] = report.signature;
  auto rows = nlohmann::ordered_json::array();
  for (const auto& r : report.rows) {
    nlohmann::ordered_json row;
    row["condition"] = to_string(r.condition);
    row["bleu"] = to_json(r.bleu);
    row["comet"] = r.comet ? nlohmann::ordered_json(*r.comet) : nlohmann::ordered_json(nullptr);
    row["n"] = r.n;
    row["delta_bleu"] = r.delta_bleu ? nlohmann::ordered_json(*r.delta_bleu) : nlohmann::ordered_json(nullptr);
    row["delta_comet"] = r.delta_comet ? nlohmann::ordered_json(*r.delta_comet) : nlohmann::ordered_json(nullptr);
    rows.push_back(std::move(row));
  }
  j["rows"] = std::move(rows);
  return j;
}

PreferenceReport preference_lexical_report(const std::vector<std::string>& responses,
                                           const std::vector<std::string>& refs, TokenizerKind kind) {
  if (responses.size() != refs.size()) {
    throw ValidationError("response/reference count mismatch: " + std::to_string(responses.size()) + " vs " +
                          std::to_string(refs.size()));
  }
  std::vector<std::string> preferred;
  std::vector<std::string> rejected;
  std::vector<std::string> rejected_refs;
  preferred.reserve(responses.size());
  for (std::size_t i = 0; i < responses.size(); ++i) {
    auto split = extract_preferred(responses[i]);
    preferred.push_back(std::move(split.preferred));
    if (split.rejected) {
      rejected.push_back(std::move(*split.rejected));
      rejected_refs.push_back(refs[i]);
    }
  }
  PreferenceReport report;
  report.tokenizer = kind;
  report.preferred = corpus_bleu(preferred, refs, kind);
  report.n_preferred = preferred.size();
  report.n_unpreferred = rejected.size();
  if (!rejected.empty()) report.unpreferred = corpus_bleu(rejected, rejected_refs, kind);
  return report;
}

PreferenceReport preference_lexical_report(const std::filesystem::path& outputs, const std::filesystem::path& refs,
                                           TokenizerKind kind) {
  return preference_lexical_report(io::read_lines(outputs), io::read_lines(refs), kind);
}

std::string to_markdown(const PreferenceReport& report) {
  std::string out = fmt::format("| Hint | BLEU | n |\n|---|---:|---:|\n| Prefer. | {:.2f} | {} |\n",
                                report.preferred.score, report.n_preferred);
  out += report.unpreferred ? fmt::format("| Unprefer. | {:.2f} | {} |\n", report.unpreferred->score, report.n_unpreferred)
                            : fmt::format("| Unprefer. | n/a | {} |\n", report.n_unpreferred);
  return out;
}

nlohmann::ordered_json to_json(const PreferenceReport& report) {
  nlohmann::ordered_json j;
  j["tokenizer"] = to_string(report.tokenizer);
  j["signature"] = signature(report.tokenizer);
  j["preferred"] = {{"bleu", to_json(report.preferred)}, {"n", report.n_preferred}};
  j["unpreferred"] = {{"bleu", report.unpreferred ? to_json(*report.unpreferred) : nlohmann::ordered_json(nullptr)},
                      {"n", report.n_unpreferred}};
  return j;
}

}  // namespace parrot::eval
