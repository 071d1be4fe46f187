#include "cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <set>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "parrot/bleu.hpp"
#include "parrot/corpus.hpp"
#include "parrot/digest.hpp"
#include "parrot/error.hpp"
#include "parrot/inference.hpp"
#include "parrot/instructions.hpp"
#include "parrot/io.hpp"
#include "parrot/manifest.hpp"
#include "parrot/mqm.hpp"
#include "parrot/prompt.hpp"
#include "parrot/quality.hpp"
#include "parrot/report.hpp"
#include "parrot/scorer_client.hpp"

namespace parrot::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

/// Collects what a subcommand read and did, then writes `<out>.manifest.json` for
/// every output. File keys are names relative to the output directory so that
/// identical runs in different directories produce identical manifests.
class Recorder {
 public:
  explicit Recorder(std::string command) : command_(std::move(command)), started_(timestamp_now()) {}

  ordered_json params = ordered_json::object();
  std::optional<std::uint64_t> seed;
  std::map<std::string, std::size_t> counts;
  ordered_json extra = ordered_json::object();

  void input(const fs::path& p) { inputs_.push_back(p); }

  void finish(const std::vector<fs::path>& outputs) const {
    RunManifest m;
    m.command = command_;
    m.tool_version = tool_version();
    m.config_digest = sha256_hex(params.dump());
    m.seed = seed;
    m.counts = counts;
    m.started_at = started_;
    m.finished_at = timestamp_now();
    m.extra = extra;
    m.extra["params"] = params;
    for (const auto& in : inputs_) {
      auto key = in.filename().string();
      if (m.input_digests.contains(key)) key = in.lexically_normal().string();
      m.input_digests[key] = sha256_file(in);
    }
    for (const auto& out : outputs) {
      auto mm = m;
      for (const auto& o : outputs) mm.output_digests[o.lexically_relative(out.parent_path()).string()] = sha256_file(o);
      write_manifest(out, mm);
    }
  }

 private:
  std::string command_;
  std::string started_;
  std::vector<fs::path> inputs_;
};

InstructionPool load_pool(const std::string& spec) {
  return spec == "default" ? InstructionPool::defaults() : InstructionPool::from_file(spec);
}

HintTemplate hint_template(const std::optional<std::string>& clean) {
  HintTemplate hints;
  if (clean) hints.clean = *clean;
  return hints;
}

eval::TokenizerKind resolve_tokenizer(const std::string& spec, const std::optional<std::string>& lang_pair) {
  if (spec != "auto") return eval::parse_tokenizer(spec);
  if (!lang_pair) return eval::TokenizerKind::intl_13a;
  return eval::tokenizer_for(Direction::parse(*lang_pair));
}

std::pair<std::string, std::string> split_assignment(const std::string& s, std::string_view flag) {
  const auto eq = s.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == s.size()) {
    throw ValidationError(std::string(flag) + " expects NAME=FILE, got '" + s + "'");
  }
  return {s.substr(0, eq), s.substr(eq + 1)};
}

void write_jsonl(const fs::path& path, const std::vector<ordered_json>& records) {
  std::string out;
  for (const auto& r : records) out += io::dump_line(r) + "\n";
  io::write_file_atomic(path, out);
}

constexpr const char* kCorpusSchema =
    "Corpus JSONL: {\"id\",\"direction\":{\"src\",\"tgt\"},\"source\",\"target\",\"origin\"}";
constexpr const char* kScoredSchema =
    "Scored JSONL: {\"segment_id\",\"system\",\"text\",\"score\",\"source\":\"automatic\"|\"human\"}";
constexpr const char* kDatasetSchema =
    "Dataset JSONL: {\"instruction\",\"input\",\"hint\":null|string,\"response\",\"kind\",\"meta\":{...}}";

struct Options {
  // shared
  std::string out;
  std::optional<std::string> lang_pair;
  std::uint64_t seed = 0;
  std::string pool = "default";
  std::optional<std::string> clean_hint;

  // ingest
  std::string src, tgt, origin = "corpus", tsv;
  std::optional<std::string> scores_out;
  mqm::MqmWeights weights;

  // score
  std::string translations, sources;
  bool with_references = false;
  std::optional<std::string> endpoint, offline, items_out;
  std::string metric = scoring::kDefaultMetric;
  double timeout_s = 600;

  // build
  std::string pairs, scores, annotations, levels;
  std::optional<double> min_gap;
  std::size_t max_per_segment = 1;

  // mix
  std::vector<std::string> parts;

  // render / infer
  std::string dataset, variant = "input", mode = "train";
  std::string model, hint, decode = "beam:4";
  std::vector<std::string> hints;
  std::optional<std::string> out_dir, journal;
  std::size_t max_in_flight = 4, retries = 4, max_new_tokens = 512;
  double infer_timeout_s = 120;
  bool strict_beam = false;
  std::string api_key_env = "PARROT_API_KEY";

  // eval / report
  std::string hyp, ref, tokenizer = "auto", smoothing = "none", outputs;
  std::optional<std::string> comet, json_out;
  std::vector<std::string> runs, comets;
};

int cmd_ingest_parallel(const Options& o, std::ostream& out) {
  Recorder rec("ingest-parallel");
  rec.params["lang_pair"] = *o.lang_pair;
  rec.params["origin"] = o.origin;
  rec.input(o.src);
  rec.input(o.tgt);
  const auto pairs = load_parallel(o.src, o.tgt, Direction::parse(*o.lang_pair), o.origin);
  write_corpus_jsonl(o.out, pairs);
  rec.counts["pairs"] = pairs.size();
  rec.finish({o.out});
  out << "wrote " << pairs.size() << " pairs to " << o.out << "\n";
  return 0;
}

int cmd_ingest_mqm(const Options& o, std::ostream& out) {
  Recorder rec("ingest-mqm");
  rec.params["lang_pair"] = *o.lang_pair;
  rec.params["weights"] = {{"major", o.weights.major},
                           {"minor", o.weights.minor},
                           {"minor_fluency_punct", o.weights.minor_fluency_punct},
                           {"nontranslation", o.weights.nontranslation}};
  rec.input(o.tsv);
  const auto anns = mqm::parse_mqm_tsv(o.tsv, Direction::parse(*o.lang_pair));
  mqm::write_annotations_jsonl(o.out, anns);
  rec.counts["rows"] = anns.size();
  rec.counts["spans"] = std::accumulate(anns.begin(), anns.end(), std::size_t{0},
                                        [](std::size_t n, const auto& a) { return n + a.spans.size(); });
  std::vector<fs::path> outputs{o.out};
  if (o.scores_out) {
    const auto scored = quality::from_segment_scores(mqm::score_segments(anns, o.weights), anns);
    quality::write_scored_jsonl(*o.scores_out, scored);
    rec.counts["segments"] = scored.size();
    outputs.emplace_back(*o.scores_out);
  }
  rec.finish(outputs);
  out << "wrote " << anns.size() << " annotation rows to " << o.out << "\n";
  return 0;
}

int cmd_score(const Options& o, std::ostream& out, std::ostream& err) {
  Recorder rec("score");
  rec.params["lang_pair"] = *o.lang_pair;
  rec.params["model"] = o.metric;
  rec.params["with_references"] = o.with_references;
  rec.input(o.translations);
  rec.input(o.sources);
  const auto direction = Direction::parse(*o.lang_pair);
  const auto translations = load_system_translations(o.translations, direction);
  const auto corpus = read_corpus_jsonl(o.sources);
  const auto sources = index_sources(corpus);
  SourceIndex references;
  for (const auto& p : corpus) references.insert_or_assign(p.id, SourceSegment{p.target, p.direction});
  const auto req = scoring::make_request(translations, sources, o.with_references ? &references : nullptr, o.metric);

  std::vector<fs::path> outputs;
  if (o.items_out) {
    std::vector<ordered_json> items;
    for (const auto& item : req.items) items.push_back(scoring::to_json(item));
    write_jsonl(*o.items_out, items);
    outputs.emplace_back(*o.items_out);
    rec.counts["items"] = items.size();
  }
  if (!o.endpoint && !o.offline) {
    if (outputs.empty()) throw ValidationError("score needs --endpoint, --offline or --items-out");
    rec.finish(outputs);
    out << "wrote " << req.items.size() << " score items to " << *o.items_out << "\n";
    return 0;
  }
  if (o.out.empty()) throw ValidationError("score needs --out when scoring");
  scoring::ScoreResponse resp;
  if (o.endpoint) {
    rec.extra["endpoint"] = *o.endpoint;
    resp = scoring::score_remote(*o.endpoint, req,
                                 std::chrono::milliseconds(static_cast<std::int64_t>(o.timeout_s * 1000)));
  } else {
    rec.input(*o.offline);
    resp = scoring::read_offline_scores(*o.offline, req);
  }
  std::vector<std::string> failed;
  const auto scored = scoring::join_scores(translations, resp, &failed);
  for (const auto& f : failed) err << "warning: not scored: " << f << "\n";
  quality::write_scored_jsonl(o.out, scored);
  outputs.emplace_back(o.out);
  rec.extra["scorer_model"] = resp.model;
  rec.counts["scored"] = scored.size();
  rec.counts["failed"] = failed.size();
  rec.finish(outputs);
  out << "wrote " << scored.size() << " scores to " << o.out << "\n";
  return 0;
}

int cmd_bucket(const Options& o, std::ostream& out) {
  Recorder rec("bucket");
  rec.params["major_upper"] = quality::kMajorUpperBound;
  rec.params["minor_upper"] = quality::kMinorUpperBound;
  rec.input(o.scores);
  const auto scored = quality::read_scored_jsonl(o.scores);
  for (const auto& s : scored) {
    if (s.source != quality::ScoreSource::automatic) {
      throw ValidationError("bucket expects automatic 0-100 scores; " + s.segment_id + "/" + s.system +
                            " carries a human MQM penalty");
    }
  }
  const auto levels = quality::assign_levels(scored);
  quality::write_levels_jsonl(o.out, levels);
  for (const auto& [s, level] : levels) ++rec.counts[std::string(quality::to_string(level))];
  rec.finish({o.out});
  out << "wrote " << levels.size() << " levels to " << o.out << "\n";
  return 0;
}

void record_build(Recorder& rec, const Options& o, const InstructionPool& pool,
                  const std::vector<InstructionExample>& examples) {
  rec.seed = o.seed;
  rec.params["seed"] = o.seed;
  rec.params["pool"] = o.pool == "default" ? "default" : "file";
  rec.params["pool_digest"] = pool.digest();
  if (o.clean_hint) rec.params["clean_hint"] = *o.clean_hint;
  rec.extra["pool_digest"] = pool.digest();
  rec.counts = count_by_kind(examples);
  rec.counts["examples"] = examples.size();
}

int cmd_build_translation(const Options& o, std::ostream& out) {
  Recorder rec("build translation");
  if (o.pool != "default") rec.input(o.pool);
  rec.input(o.pairs);
  const auto pool = load_pool(o.pool);
  const auto examples = build_translation(read_corpus_jsonl(o.pairs), pool, o.seed);
  write_examples_jsonl(o.out, examples);
  record_build(rec, o, pool, examples);
  rec.finish({o.out});
  out << "wrote " << examples.size() << " translation examples to " << o.out << "\n";
  return 0;
}

SourceIndex load_sources(const Options& o, Recorder& rec) {
  if (!o.sources.empty() && !o.annotations.empty()) {
    throw ValidationError("give either --sources or --annotations, not both");
  }
  if (!o.sources.empty()) {
    rec.input(o.sources);
    return index_sources(read_corpus_jsonl(o.sources));
  }
  if (!o.annotations.empty()) {
    rec.input(o.annotations);
    return index_sources(mqm::read_annotations_jsonl(o.annotations));
  }
  throw ValidationError("source sentences needed: pass --sources (corpus JSONL) or --annotations");
}

int cmd_build_contrastive(const Options& o, std::ostream& out) {
  Recorder rec("build contrastive");
  if (o.pool != "default") rec.input(o.pool);
  rec.input(o.scores);
  const auto scored = quality::read_scored_jsonl(o.scores);
  const auto sources = load_sources(o, rec);
  const auto pool = load_pool(o.pool);
  const double min_gap =
      o.min_gap.value_or(scored.empty() ? 0.0 : quality::default_min_gap(scored.front().source));
  if (o.max_per_segment < 1) throw ValidationError("--max-per-segment must be >= 1");
  const auto pairs = quality::make_pairs(scored, min_gap, o.max_per_segment, o.seed);
  const auto examples = build_contrastive(pairs, sources, pool, hint_template(o.clean_hint), o.seed);
  write_examples_jsonl(o.out, examples);
  rec.params["min_gap"] = min_gap;
  rec.params["max_per_segment"] = o.max_per_segment;
  record_build(rec, o, pool, examples);
  rec.counts["pairs"] = pairs.size();
  rec.finish({o.out});
  out << "wrote " << examples.size() << " contrastive examples to " << o.out << "\n";
  return 0;
}

int cmd_build_error_guided(const Options& o, std::ostream& out) {
  Recorder rec("build error-guided");
  if (o.pool != "default") rec.input(o.pool);
  const auto pool = load_pool(o.pool);
  const auto hints = hint_template(o.clean_hint);
  std::vector<InstructionExample> examples;
  if (!o.levels.empty()) {
    rec.input(o.levels);
    const auto sources = load_sources(o, rec);
    examples = build_error_guided(quality::read_levels_jsonl(o.levels), sources, pool, hints, o.seed);
    rec.params["route"] = "automatic";
  } else if (!o.annotations.empty()) {
    if (!o.sources.empty()) throw ValidationError("--sources only applies with --levels");
    rec.input(o.annotations);
    examples = build_error_guided(mqm::read_annotations_jsonl(o.annotations), pool, hints, o.seed);
    rec.params["route"] = "human";
  } else {
    throw ValidationError("build error-guided needs --annotations (human) or --levels with --sources (automatic)");
  }
  write_examples_jsonl(o.out, examples);
  record_build(rec, o, pool, examples);
  rec.finish({o.out});
  out << "wrote " << examples.size() << " error-guided examples to " << o.out << "\n";
  return 0;
}

int cmd_mix(const Options& o, std::ostream& out) {
  Recorder rec("mix");
  std::vector<DatasetPart> parts;
  ordered_json weights = ordered_json::array();
  for (const auto& spec : o.parts) {
    fs::path file = spec;
    double weight = 1.0;
    const auto colon = spec.rfind(':');
    if (colon != std::string::npos) {
      const auto w = spec.substr(colon + 1);
      char* end = nullptr;
      weight = std::strtod(w.c_str(), &end);
      if (w.empty() || end != w.c_str() + w.size()) throw ValidationError("bad weight in --part '" + spec + "'");
      file = spec.substr(0, colon);
    }
    rec.input(file);
    parts.push_back({read_examples_jsonl(file), weight});
    weights.push_back(weight);
  }
  const auto examples = mix_dataset(parts, o.seed);
  write_examples_jsonl(o.out, examples);
  rec.seed = o.seed;
  rec.params["seed"] = o.seed;
  rec.params["weights"] = weights;
  rec.counts = count_by_kind(examples);
  rec.counts["examples"] = examples.size();
  rec.finish({o.out});
  out << "wrote " << examples.size() << " mixed examples to " << o.out << "\n";
  return 0;
}

int cmd_render(const Options& o, std::ostream& out) {
  Recorder rec("render");
  rec.params["variant"] = o.variant;
  rec.params["mode"] = o.mode;
  rec.input(o.dataset);
  PromptFormat format;
  format.variant = parse_prompt_variant(o.variant);
  if (o.mode != "train" && o.mode != "infer") throw ValidationError("--mode must be train or infer");
  const auto mode = o.mode == "train" ? RenderMode::train : RenderMode::infer;
  const auto examples = read_examples_jsonl(o.dataset);
  std::vector<ordered_json> records;
  records.reserve(examples.size());
  for (std::size_t i = 0; i < examples.size(); ++i) {
    RenderedPrompt p;
    try {
      p = render(examples[i], format, mode);
    } catch (const ValidationError& e) {
      throw ValidationError(o.dataset + ":" + std::to_string(i + 1) + ": " + e.what());
    }
    ordered_json j;
    j["prompt"] = p.text;
    j["completion"] = p.completion ? ordered_json(*p.completion) : ordered_json(nullptr);
    records.push_back(std::move(j));
  }
  write_jsonl(o.out, records);
  rec.counts["prompts"] = records.size();
  rec.finish({o.out});
  out << "wrote " << records.size() << " prompts to " << o.out << "\n";
  return 0;
}

int report_failures(const std::vector<inference::InferenceResult>& results, std::string_view label,
                    std::ostream& err) {
  int failures = 0;
  for (const auto& r : results) {
    if (r.status == inference::ResultStatus::ok) continue;
    ++failures;
    err << label << "example " << r.index << ": " << inference::to_string(r.status);
    if (!r.error.empty()) err << " (" << r.error << ")";
    err << "\n";
  }
  return failures;
}

void count_results(Recorder& rec, const std::vector<inference::InferenceResult>& results) {
  for (const auto& r : results) {
    ++rec.counts[std::string(inference::to_string(r.status))];
    if (r.from_journal) ++rec.counts["reused"];
  }
}

int cmd_infer(const Options& o, std::ostream& out, std::ostream& err, std::stop_token stop) {
  if (o.out.empty() == !o.out_dir.has_value()) throw ValidationError("infer needs exactly one of --out or --out-dir");
  if (!o.hints.empty() && !o.out_dir) throw ValidationError("--hints writes one file per condition; use --out-dir");
  if (o.out_dir && o.hints.empty()) throw ValidationError("--out-dir needs --hints");
  if (!o.hint.empty() && !o.hints.empty()) throw ValidationError("give --hint or --hints, not both");

  inference::InferenceJob job;
  job.examples = read_examples_jsonl(o.dataset);
  job.format.variant = parse_prompt_variant(o.variant);
  job.decode = inference::DecodeConfig::parse(o.decode);
  job.decode.strict_beam = o.strict_beam;
  job.decode.max_new_tokens = o.max_new_tokens;
  job.endpoint = *o.endpoint;
  job.model = o.model;
  job.hints = hint_template(o.clean_hint);
  if (!o.hint.empty()) job.hint_override = eval::parse_hint_condition(o.hint);

  inference::RunOptions run;
  run.max_in_flight = o.max_in_flight;
  run.retry.max_attempts = o.retries;
  run.timeout = std::chrono::milliseconds(static_cast<std::int64_t>(o.infer_timeout_s * 1000));
  if (const char* key = std::getenv(o.api_key_env.c_str()); key && *key) run.api_key = key;
  run.stop = stop;

  Recorder rec("infer");
  rec.input(o.dataset);
  rec.params["model"] = o.model;
  rec.params["decode"] = o.decode;
  rec.params["strict_beam"] = o.strict_beam;
  rec.params["max_new_tokens"] = o.max_new_tokens;
  rec.params["variant"] = o.variant;
  rec.extra["endpoint"] = *o.endpoint;

  if (o.out_dir) {
    std::set<eval::HintCondition> conditions;
    for (const auto& h : o.hints) conditions.insert(eval::parse_hint_condition(h));
    ordered_json names = ordered_json::array();
    for (const auto c : conditions) names.push_back(std::string(eval::to_string(c)));
    rec.params["hints"] = names;
    const auto matrix = inference::hint_matrix(job, conditions, *o.out_dir, run);
    int failures = 0;
    for (const auto& [condition, results] : matrix.results) {
      failures += report_failures(results, std::string(eval::to_string(condition)) + " ", err);
      count_results(rec, results);
    }
    std::vector<fs::path> outputs;
    for (const auto& [condition, file] : matrix.files) outputs.push_back(file);
    if (matrix.preferred_responses) outputs.push_back(*matrix.preferred_responses);
    rec.finish(outputs);
    out << "wrote " << outputs.size() << " condition files to " << *o.out_dir << "\n";
    return failures ? 2 : 0;
  }

  rec.params["hint"] = o.hint.empty() ? "dataset" : o.hint;
  run.journal = o.journal ? fs::path(*o.journal) : fs::path(o.out + ".journal.jsonl");
  const auto results = inference::run_job(job, run);
  inference::write_translations(o.out, results);
  std::vector<fs::path> outputs{o.out};
  if (job.hint_override == eval::HintCondition::preferred) {
    outputs.emplace_back(o.out + ".unpreferred");
    inference::write_rejected(outputs.back(), results);
    outputs.emplace_back(o.out + ".responses");
    inference::write_responses(outputs.back(), results);
  }
  const int failures = report_failures(results, "", err);
  count_results(rec, results);
  rec.finish(outputs);
  out << "wrote " << results.size() - static_cast<std::size_t>(failures) << "/" << results.size()
      << " translations to " << o.out << "\n";
  return failures ? 2 : 0;
}

int cmd_eval(const Options& o, std::ostream& out) {
  const auto kind = resolve_tokenizer(o.tokenizer, o.lang_pair);
  const auto smoothing = eval::parse_smoothing(o.smoothing);
  const auto hyps = io::read_lines(o.hyp);
  const auto refs = io::read_lines(o.ref);
  if (hyps.size() != refs.size()) {
    throw ValidationError("hypothesis has " + std::to_string(hyps.size()) + " lines but reference has " +
                          std::to_string(refs.size()));
  }
  ordered_json j;
  j["signature"] = eval::signature(kind, smoothing);
  j["tokenizer"] = std::string(eval::to_string(kind));
  if (o.lang_pair) j["lang_pair"] = Direction::parse(*o.lang_pair).str();
  j["n"] = hyps.size();
  j["bleu"] = eval::to_json(eval::corpus_bleu(hyps, refs, kind, smoothing));
  if (o.comet) {
    const auto scores = eval::read_segment_scores(*o.comet);
    if (scores.size() != hyps.size()) throw ValidationError("COMET file line count differs from hypothesis");
    j["comet"] = std::accumulate(scores.begin(), scores.end(), 0.0) / static_cast<double>(scores.size());
  }
  out << j.dump(2) << "\n";
  if (o.json_out) {
    Recorder rec("eval");
    rec.params["tokenizer"] = std::string(eval::to_string(kind));
    rec.params["smoothing"] = o.smoothing;
    rec.input(o.hyp);
    rec.input(o.ref);
    if (o.comet) rec.input(*o.comet);
    io::write_file_atomic(*o.json_out, j.dump(2) + "\n");
    rec.counts["segments"] = hyps.size();
    rec.finish({*o.json_out});
  }
  return 0;
}

int cmd_report_sweep(const Options& o, std::ostream& out) {
  std::map<eval::HintCondition, eval::SweepRun> runs;
  Recorder rec("report hint-sweep");
  for (const auto& r : o.runs) {
    const auto [name, file] = split_assignment(r, "--run");
    const auto condition = eval::parse_hint_condition(name);
    if (runs.contains(condition)) throw ValidationError("condition '" + name + "' given twice");
    runs[condition].hyp_file = file;
    rec.input(file);
  }
  for (const auto& c : o.comets) {
    const auto [name, file] = split_assignment(c, "--comet");
    const auto it = runs.find(eval::parse_hint_condition(name));
    if (it == runs.end()) throw ValidationError("--comet for condition '" + name + "' without a --run");
    it->second.comet_file = file;
    rec.input(file);
  }
  rec.input(o.ref);
  const auto direction = Direction::parse(*o.lang_pair);
  std::optional<eval::TokenizerKind> kind;
  if (o.tokenizer != "auto") kind = eval::parse_tokenizer(o.tokenizer);
  const auto report = eval::hint_sweep_report(runs, o.ref, direction, kind);
  out << eval::to_markdown(report);
  if (o.json_out) {
    rec.params["lang_pair"] = direction.str();
    rec.params["tokenizer"] = std::string(eval::to_string(report.tokenizer));
    io::write_file_atomic(*o.json_out, eval::to_json(report).dump(2) + "\n");
    rec.counts["rows"] = report.rows.size();
    rec.finish({*o.json_out});
  }
  return 0;
}

int cmd_report_preference(const Options& o, std::ostream& out) {
  const auto kind = resolve_tokenizer(o.tokenizer, o.lang_pair);
  const auto report = eval::preference_lexical_report(fs::path(o.outputs), fs::path(o.ref), kind);
  out << eval::to_markdown(report);
  if (o.json_out) {
    Recorder rec("report preference");
    rec.params["tokenizer"] = std::string(eval::to_string(kind));
    rec.input(o.outputs);
    rec.input(o.ref);
    io::write_file_atomic(*o.json_out, eval::to_json(report).dump(2) + "\n");
    rec.counts["preferred"] = report.n_preferred;
    rec.counts["unpreferred"] = report.n_unpreferred;
    rec.finish({*o.json_out});
  }
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, std::stop_token stop) {
  Options o;
  CLI::App app{"parrot: instruction data construction, hint-conditioned inference and evaluation for MT",
               "parrot"};
  app.set_version_flag("--version", tool_version());
  app.set_config("--config", "", "TOML-like key = value file; [section] names match subcommands; flags win");
  app.require_subcommand(1);
  std::vector<std::pair<CLI::App*, std::function<int()>>> actions;
  const auto on = [&](CLI::App* sub, std::function<int()> fn) { actions.emplace_back(sub, std::move(fn)); };

  auto* ingest_parallel = app.add_subcommand("ingest-parallel", "Line-aligned source/target files to corpus JSONL");
  ingest_parallel->add_option("--src", o.src, "Source-side text file")->required();
  ingest_parallel->add_option("--tgt", o.tgt, "Target-side text file")->required();
  ingest_parallel->add_option("--lang-pair", o.lang_pair, "Direction such as de-en")->required();
  ingest_parallel->add_option("--origin", o.origin, "Corpus name used in ids {origin}:{i}")->capture_default_str();
  ingest_parallel->add_option("--out", o.out, "Output corpus JSONL")->required();
  ingest_parallel->footer(kCorpusSchema);
  on(ingest_parallel, [&] { return cmd_ingest_parallel(o, out); });

  auto* ingest_mqm = app.add_subcommand("ingest-mqm", "MQM TSV to annotated-translation JSONL");
  ingest_mqm->add_option("--tsv", o.tsv, "MQM TSV with header (system, doc, doc_id, seg_id, rater, source, target, "
                                         "category, severity)")
      ->required()
;
  ingest_mqm->add_option("--lang-pair", o.lang_pair, "Direction such as zh-en")->required();
  ingest_mqm->add_option("--out", o.out, "Output annotations JSONL")->required();
  ingest_mqm->add_option("--scores-out", o.scores_out, "Also write per-segment MQM penalties as scored JSONL");
  ingest_mqm->add_option("--w-major", o.weights.major, "Major error weight")->capture_default_str();
  ingest_mqm->add_option("--w-minor", o.weights.minor, "Minor error weight")->capture_default_str();
  ingest_mqm->add_option("--w-minor-punct", o.weights.minor_fluency_punct, "Minor fluency/punctuation weight")
      ->capture_default_str();
  ingest_mqm->add_option("--w-nontranslation", o.weights.nontranslation, "Non-translation weight")
      ->capture_default_str();
  ingest_mqm->footer(
      "Annotations JSONL: {\"segment_id\",\"system\",\"rater\",\"direction\",\"source\",\"target_plain\","
      "\"category\",\"severity\",\"spans\":[{\"start\",\"end\",\"category\",\"severity\"}]}\n"
      "Span offsets count Unicode scalar values in target_plain.");
  on(ingest_mqm, [&] { return cmd_ingest_mqm(o, out); });

  auto* score = app.add_subcommand("score", "Score system translations through the scorer service or its offline output");
  score->add_option("--translations", o.translations, "TSV segment_id<TAB>system<TAB>text")
      ->required()
;
  score->add_option("--sources", o.sources, "Corpus JSONL holding the source sentences")
      ->required()
;
  score->add_option("--lang-pair", o.lang_pair, "Direction such as de-en")->required();
  score->add_flag("--with-references", o.with_references, "Send corpus targets as references");
  auto* endpoint_opt = score->add_option("--endpoint", o.endpoint, "Scorer base URL (POST {endpoint}/score)");
  score->add_option("--offline", o.offline, "Scorer offline output JSONL {\"id\",\"score\"|\"error\"}")

      ->excludes(endpoint_opt);
  score->add_option("--items-out", o.items_out, "Write request items JSONL for offline scoring");
  score->add_option("--model", o.metric, "Metric name")->capture_default_str();
  score->add_option("--timeout", o.timeout_s, "Request timeout in seconds")->capture_default_str();
  score->add_option("--out", o.out, "Output scored JSONL");
  score->footer(std::string("Items JSONL: {\"id\",\"source\",\"hypothesis\",\"reference\"?}; ids are zero-based "
                            "positions in --translations.\n") +
                kScoredSchema);
  on(score, [&] { return cmd_score(o, out, err); });

  auto* bucket = app.add_subcommand("bucket", "Assign error levels from automatic quality scores");
  bucket->add_option("--scores", o.scores, "Scored JSONL")->required();
  bucket->add_option("--out", o.out, "Output levels JSONL")->required();
  bucket->footer("Levels: score <= 85 major, 85 < score <= 90 minor, score > 90 no_error.\n"
                 "Levels JSONL: scored fields plus \"level\".");
  on(bucket, [&] { return cmd_bucket(o, out); });

  auto* build = app.add_subcommand("build", "Build instruction datasets");
  build->require_subcommand(1);
  const auto common_build = [&](CLI::App* sub) {
    sub->add_option("--pool", o.pool, "Instruction pool: 'default' or a file with one template per line")
        ->capture_default_str();
    sub->add_option("--seed", o.seed, "Seed for instruction choice and sampling")->capture_default_str();
    sub->add_option("--out", o.out, "Output dataset JSONL")->required();
    sub->footer(kDatasetSchema);
  };
  auto* build_translation_cmd = build->add_subcommand("translation", "Translation instructions from a corpus");
  build_translation_cmd->add_option("--pairs", o.pairs, "Corpus JSONL")->required();
  common_build(build_translation_cmd);
  on(build_translation_cmd, [&] { return cmd_build_translation(o, out); });

  auto* build_contrastive_cmd = build->add_subcommand("contrastive", "Contrastive instructions from scored translations");
  build_contrastive_cmd->add_option("--scores", o.scores, "Scored JSONL")->required();
  build_contrastive_cmd->add_option("--sources", o.sources, "Corpus JSONL with the source sentences")
;
  build_contrastive_cmd->add_option("--annotations", o.annotations, "Annotations JSONL with the source sentences")
;
  build_contrastive_cmd->add_option("--min-gap", o.min_gap, "Minimum score difference (default 1 automatic, 0 human)");
  build_contrastive_cmd->add_option("--max-per-segment", o.max_per_segment, "Pairs sampled per segment")
      ->capture_default_str();
  build_contrastive_cmd->add_option("--clean-hint", o.clean_hint, "Override the no-error hint text");
  common_build(build_contrastive_cmd);
  on(build_contrastive_cmd, [&] { return cmd_build_contrastive(o, out); });

  auto* build_error_cmd = build->add_subcommand("error-guided", "Error-guided instructions");
  build_error_cmd->add_option("--annotations", o.annotations, "Annotations JSONL (human route)")
;
  build_error_cmd->add_option("--levels", o.levels, "Levels JSONL from `bucket` (automatic route)")
;
  build_error_cmd->add_option("--sources", o.sources, "Corpus JSONL with the source sentences (automatic route)")
;
  build_error_cmd->add_option("--clean-hint", o.clean_hint, "Override the no-error hint text");
  common_build(build_error_cmd);
  on(build_error_cmd, [&] { return cmd_build_error_guided(o, out); });

  auto* mix = app.add_subcommand("mix", "Mix datasets with weights and shuffle");
  mix->add_option("--part", o.parts, "FILE[:WEIGHT]; weight w contributes round(w * size) examples")->required();
  mix->add_option("--seed", o.seed, "Shuffle seed")->capture_default_str();
  mix->add_option("--out", o.out, "Output dataset JSONL")->required();
  mix->footer(kDatasetSchema);
  on(mix, [&] { return cmd_mix(o, out); });

  auto* render_cmd = app.add_subcommand("render", "Render dataset records to prompts");
  render_cmd->add_option("--dataset", o.dataset, "Dataset JSONL")->required();
  render_cmd->add_option("--variant", o.variant, "input | no-input")->capture_default_str();
  render_cmd->add_option("--mode", o.mode, "train (prompt + completion) | infer (prompt only)")->capture_default_str();
  render_cmd->add_option("--out", o.out, "Output prompt JSONL")->required();
  render_cmd->footer("Prompt JSONL: {\"prompt\",\"completion\":null|string}");
  on(render_cmd, [&] { return cmd_render(o, out); });

  auto* infer = app.add_subcommand("infer", "Hint-conditioned inference against a completion endpoint");
  infer->add_option("--dataset", o.dataset, "Dataset JSONL")->required();
  infer->add_option("--endpoint", o.endpoint, "Base URL; requests go to {endpoint}/completions")->required();
  infer->add_option("--model", o.model, "Model name sent with each request")->required();
  infer->add_option("--hint", o.hint, "none | no_error | minor | major | preferred (default: keep dataset hints)");
  infer->add_option("--hints", o.hints, "Conditions for a hint sweep, comma separated")->delimiter(',');
  infer->add_option("--decode", o.decode, "beam:N or sample:T[:P]")->capture_default_str();
  infer->add_flag("--strict-beam", o.strict_beam, "Request real beam search; abort if the endpoint refuses");
  infer->add_option("--max-new-tokens", o.max_new_tokens, "Completion length cap")->capture_default_str();
  infer->add_option("--variant", o.variant, "Prompt variant: input | no-input")->capture_default_str();
  infer->add_option("--out", o.out, "Output translations, one per line");
  infer->add_option("--out-dir", o.out_dir, "Sweep output directory ({condition}.txt per condition)");
  infer->add_option("--journal", o.journal, "Journal JSONL (default <out>.journal.jsonl)");
  infer->add_option("--max-in-flight", o.max_in_flight, "Concurrent requests")->capture_default_str();
  infer->add_option("--retries", o.retries, "Attempts per request")->capture_default_str();
  infer->add_option("--timeout", o.infer_timeout_s, "Request timeout in seconds")->capture_default_str();
  infer->add_option("--api-key-env", o.api_key_env, "Environment variable holding a bearer token")
      ->capture_default_str();
  infer->add_option("--clean-hint", o.clean_hint, "Override the no-error hint text");
  infer->footer("Journal JSONL: {\"index\",\"status\":\"ok\"|\"error\",\"output\",\"request_digest\"}; ok entries "
                "whose request digest matches are reused on rerun.\nExit code 2 when any example failed.");
  on(infer, [&] { return cmd_infer(o, out, err, stop); });

  auto* eval_cmd = app.add_subcommand("eval", "Corpus BLEU of a hypothesis file; JSON to stdout");
  eval_cmd->add_option("--hyp", o.hyp, "Hypotheses, one per line")->required();
  eval_cmd->add_option("--ref", o.ref, "References, one per line")->required();
  eval_cmd->add_option("--lang-pair", o.lang_pair, "Direction; picks the tokenizer when --tokenizer auto");
  eval_cmd->add_option("--tokenizer", o.tokenizer, "auto | 13a | zh")->capture_default_str();
  eval_cmd->add_option("--smoothing", o.smoothing, "none | exp")->capture_default_str();
  eval_cmd->add_option("--comet", o.comet, "Per-segment COMET scores to average");
  eval_cmd->add_option("--json-out", o.json_out, "Also write the JSON report to a file");
  on(eval_cmd, [&] { return cmd_eval(o, out); });

  auto* report = app.add_subcommand("report", "Markdown reports");
  report->require_subcommand(1);
  auto* sweep = report->add_subcommand("hint-sweep", "BLEU/COMET per hint condition");
  sweep->add_option("--run", o.runs, "CONDITION=FILE, repeatable")->required();
  sweep->add_option("--comet", o.comets, "CONDITION=FILE with per-segment COMET scores");
  sweep->add_option("--ref", o.ref, "References")->required();
  sweep->add_option("--lang-pair", o.lang_pair, "Direction such as en-zh")->required();
  sweep->add_option("--tokenizer", o.tokenizer, "auto | 13a | zh")->capture_default_str();
  sweep->add_option("--json-out", o.json_out, "Also write the table as JSON");
  on(sweep, [&] { return cmd_report_sweep(o, out); });

  auto* pref = report->add_subcommand("preference", "BLEU of preferred vs unpreferred halves");
  pref->add_option("--outputs", o.outputs, "Contrastive responses, one per line")->required();
  pref->add_option("--ref", o.ref, "References")->required();
  pref->add_option("--lang-pair", o.lang_pair, "Direction; picks the tokenizer when --tokenizer auto");
  pref->add_option("--tokenizer", o.tokenizer, "auto | 13a | zh")->capture_default_str();
  pref->add_option("--json-out", o.json_out, "Also write the report as JSON");
  on(pref, [&] { return cmd_report_preference(o, out); });

  std::vector<const char*> argv{"parrot"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 1;
  }

  try {
    for (const auto& [sub, fn] : actions) {
      if (sub->parsed()) return fn();
    }
    err << app.help();
    return 1;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const nlohmann::json::exception& e) {
    err << "error: malformed JSON: " << e.what() << "\n";
    return 1;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const EndpointError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace parrot::cli
