#include "parrot/inference.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <condition_variable>
#include <fstream>
#include <mutex>
#include <thread>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "parrot/digest.hpp"
#include "parrot/endpoint.hpp"
#include "parrot/error.hpp"
#include "parrot/io.hpp"

namespace parrot::inference {

namespace {

double parse_double(std::string_view s, std::string_view what) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw ValidationError("bad " + std::string(what) + " '" + std::string(s) + "'");
  }
  return v;
}

std::vector<std::string_view> split_colon(std::string_view s) {
  std::vector<std::string_view> parts;
  std::size_t pos = 0;
  while (true) {
    const auto c = s.find(':', pos);
    parts.push_back(s.substr(pos, c == std::string_view::npos ? std::string_view::npos : c - pos));
    if (c == std::string_view::npos) return parts;
    pos = c + 1;
  }
}

bool retryable(int status) { return status == 408 || status == 429 || status >= 500; }

std::string one_line(std::string_view s) {
  std::string out(s);
  std::replace(out.begin(), out.end(), '\n', ' ');
  std::replace(out.begin(), out.end(), '\r', ' ');
  return out;
}

void write_lines(const std::filesystem::path& path, const std::vector<std::string>& lines) {
  std::string out;
  for (const auto& l : lines) {
    out += one_line(l);
    out += '\n';
  }
  io::write_file_atomic(path, out);
}

struct JournalEntry {
  std::string output;
  std::string request_digest;
};

std::unordered_map<std::size_t, JournalEntry> load_journal(const std::filesystem::path& path) {
  std::unordered_map<std::size_t, JournalEntry> done;
  if (!std::filesystem::exists(path)) return done;
  for (const auto& line : io::read_lines(path)) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error&) {
      continue;  // a torn final line from an interrupted run
    }
    if (!j.is_object() || !j.contains("index") || !j.contains("status")) continue;
    const auto index = j.at("index").get<std::size_t>();
    if (j.at("status") == "ok") {
      done[index] = JournalEntry{j.value("output", std::string{}), j.value("request_digest", std::string{})};
    } else {
      done.erase(index);
    }
  }
  return done;
}

class Journal {
 public:
  explicit Journal(const std::optional<std::filesystem::path>& path) {
    if (!path) return;
    if (path->has_parent_path()) std::filesystem::create_directories(path->parent_path());
    out_.open(*path, std::ios::binary | std::ios::app);
    if (!out_) throw IoError("cannot open journal " + path->string());
  }

  void record(const InferenceResult& r, const std::string& digest) {
    if (!out_.is_open()) return;
    nlohmann::ordered_json j;
    j["index"] = r.index;
    j["status"] = to_string(r.status);
    j["output"] = r.raw_output;
    j["request_digest"] = digest;
    if (!r.error.empty()) j["error"] = r.error;
    const auto line = io::dump_line(j) + "\n";
    std::lock_guard lock(mutex_);
    out_.write(line.data(), static_cast<std::streamsize>(line.size()));
    out_.flush();
  }

 private:
  std::ofstream out_;
  std::mutex mutex_;
};

void sleep_for(std::chrono::milliseconds d, const std::stop_token& stop) {
  std::mutex m;
  std::condition_variable_any cv;
  std::unique_lock lock(m);
  cv.wait_for(lock, stop, d, [] { return false; });
}

}  // namespace

DecodeConfig DecodeConfig::parse(std::string_view spec) {
  const auto parts = split_colon(spec);
  DecodeConfig cfg;
  if (parts[0] == "beam") {
    cfg.strategy = DecodeStrategy::beam;
    if (parts.size() > 2) throw ValidationError("decode spec 'beam' takes one size: '" + std::string(spec) + "'");
    if (parts.size() == 2) {
      const auto v = parse_double(parts[1], "beam size");
      if (v < 1 || v != std::floor(v)) throw ValidationError("beam size must be a positive integer");
      cfg.beam_size = static_cast<std::size_t>(v);
    }
  } else if (parts[0] == "sample" || parts[0] == "sampling") {
    cfg.strategy = DecodeStrategy::sampling;
    if (parts.size() > 3) throw ValidationError("decode spec 'sample' takes temperature[:top_p]");
    if (parts.size() >= 2) cfg.temperature = parse_double(parts[1], "temperature");
    if (parts.size() == 3) cfg.top_p = parse_double(parts[2], "top_p");
  } else {
    throw ValidationError("unknown decode strategy '" + std::string(spec) + "' (expected beam:N or sample:T)");
  }
  cfg.validate();
  return cfg;
}

void DecodeConfig::validate() const {
  if (strategy == DecodeStrategy::beam && beam_size < 1) throw ValidationError("beam search needs beam_size >= 1");
  if (strategy == DecodeStrategy::sampling) {
    if (!(temperature > 0.0)) throw ValidationError("sampling needs temperature > 0");
    if (!(top_p > 0.0 && top_p <= 1.0)) throw ValidationError("top_p must be in (0, 1]");
  }
  if (max_new_tokens < 1) throw ValidationError("max_new_tokens must be >= 1");
}

InstructionExample apply_hint(InstructionExample ex, HintCondition condition, const HintTemplate& hints) {
  switch (condition) {
    case HintCondition::none: ex.hint.reset(); break;
    case HintCondition::no_error: ex.hint = hints.clean; break;
    case HintCondition::minor: ex.hint = hints.leveled_hint(quality::ErrorLevel::minor); break;
    case HintCondition::major: ex.hint = hints.leveled_hint(quality::ErrorLevel::major); break;
    case HintCondition::preferred: ex.hint = hints.preference; break;
    case HintCondition::unpreferred:
      throw ValidationError("'unpreferred' is read from preferred runs; it is not a prompt hint");
  }
  return ex;
}

std::chrono::milliseconds RetryPolicy::backoff_for(std::size_t attempt) const {
  const double factor = std::pow(multiplier, static_cast<double>(attempt - 1));
  const double ms = std::min(static_cast<double>(initial_backoff.count()) * factor, static_cast<double>(max_backoff.count()));
  return std::chrono::milliseconds(static_cast<std::int64_t>(ms));
}

std::string_view to_string(ResultStatus s) {
  switch (s) {
    case ResultStatus::ok: return "ok";
    case ResultStatus::error: return "error";
    case ResultStatus::cancelled: return "cancelled";
  }
  return "error";
}

std::string request_body(const InstructionExample& ex, const InferenceJob& job) {
  const auto hinted = job.hint_override ? apply_hint(ex, *job.hint_override, job.hints) : ex;
  const auto prompt = render(hinted, job.format, RenderMode::infer);
  nlohmann::ordered_json body;
  body["model"] = job.model;
  body["prompt"] = prompt.text;
  body["max_tokens"] = job.decode.max_new_tokens;
  if (job.decode.strategy == DecodeStrategy::beam) {
    body["temperature"] = 0.0;
    body["top_p"] = 1.0;
    body["n"] = 1;
    body["best_of"] = job.decode.beam_size;
    if (job.decode.strict_beam) body["use_beam_search"] = true;
  } else {
    body["temperature"] = job.decode.temperature;
    body["top_p"] = job.decode.top_p;
    body["n"] = 1;
    body["best_of"] = 1;
  }
  return io::dump_line(body);
}

namespace {

bool wants_preference(const InstructionExample& ex, const InferenceJob& job) {
  if (job.hint_override) return *job.hint_override == HintCondition::preferred;
  return ex.hint && *ex.hint == job.hints.preference;
}

void fill_translation(InferenceResult& r, bool preference) {
  r.response = extract_response(r.raw_output, "### Response:", "### Instruction:");
  if (preference) {
    auto split = extract_preferred(r.response);
    r.translation = strip_error_markup(split.preferred).clean;
    if (split.rejected) r.rejected = strip_error_markup(*split.rejected).clean;
  } else {
    r.translation = strip_error_markup(r.response).clean;
  }
}

}  // namespace

std::vector<InferenceResult> run_job(const InferenceJob& job, const RunOptions& options) {
  if (job.examples.empty()) throw ValidationError("inference job has no examples");
  if (job.model.empty()) throw ValidationError("inference job needs a model name");
  if (options.max_in_flight < 1) throw ValidationError("max_in_flight must be >= 1");
  if (options.retry.max_attempts < 1) throw ValidationError("retry policy needs at least one attempt");
  job.decode.validate();
  const auto url = net::EndpointUrl::parse(job.endpoint);
  const auto path = url.path_for("completions");

  std::vector<std::string> bodies;
  std::vector<std::string> digests;
  bodies.reserve(job.examples.size());
  for (std::size_t i = 0; i < job.examples.size(); ++i) {
    try {
      bodies.push_back(request_body(job.examples[i], job));
    } catch (const ValidationError& e) {
      throw ValidationError("example " + std::to_string(i) + ": " + e.what());
    }
    digests.push_back(sha256_hex(bodies.back()));
  }

  std::map<std::string, std::string> headers;
  if (options.api_key) headers["Authorization"] = "Bearer " + *options.api_key;

  std::vector<InferenceResult> results(job.examples.size());
  std::vector<std::size_t> pending;
  const auto journaled = options.journal ? load_journal(*options.journal) : decltype(load_journal({})){};
  for (std::size_t i = 0; i < results.size(); ++i) {
    results[i].index = i;
    const auto it = journaled.find(i);
    if (it != journaled.end() && it->second.request_digest == digests[i]) {
      results[i].status = ResultStatus::ok;
      results[i].raw_output = it->second.output;
      results[i].from_journal = true;
      fill_translation(results[i], wants_preference(job.examples[i], job));
    } else {
      pending.push_back(i);
    }
  }

  Journal journal(options.journal);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> aborted{false};
  std::mutex abort_mutex;
  std::string abort_reason;

  const auto process = [&](std::size_t i) {
    auto& r = results[i];
    for (std::size_t attempt = 1; attempt <= options.retry.max_attempts; ++attempt) {
      r.attempts = attempt;
      const auto t0 = std::chrono::steady_clock::now();
      bool retry = false;
      try {
        const auto resp = net::post_json(url, path, bodies[i], options.timeout, headers);
        r.latency_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        r.http_status = resp.status;
        if (resp.status == 200) {
          nlohmann::json reply;
          try {
            reply = nlohmann::json::parse(resp.body);
            r.raw_output = reply.at("choices").at(0).at("text").get<std::string>();
          } catch (const nlohmann::json::exception& e) {
            r.status = ResultStatus::error;
            r.raw_output = resp.body;
            r.error = std::string("malformed endpoint reply: ") + e.what();
            return;
          }
          if (reply.contains("usage") && reply["usage"].is_object()) {
            r.usage.prompt_tokens = reply["usage"].value("prompt_tokens", std::size_t{0});
            r.usage.completion_tokens = reply["usage"].value("completion_tokens", std::size_t{0});
          }
          r.status = ResultStatus::ok;
          r.error.clear();
          fill_translation(r, wants_preference(job.examples[i], job));
          return;
        }
        r.status = ResultStatus::error;
        r.raw_output = resp.body;
        r.error = "HTTP " + std::to_string(resp.status);
        if (job.decode.strict_beam && resp.status >= 400 && resp.status < 500 && !retryable(resp.status)) {
          std::lock_guard lock(abort_mutex);
          aborted = true;
          abort_reason = "endpoint rejected strict beam search (HTTP " + std::to_string(resp.status) + "): " + resp.body;
          return;
        }
        retry = retryable(resp.status);
      } catch (const EndpointError& e) {
        r.latency_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        r.status = ResultStatus::error;
        r.error = e.what();
        retry = true;
      }
      if (!retry || attempt == options.retry.max_attempts || options.stop.stop_requested()) return;
      sleep_for(options.retry.backoff_for(attempt), options.stop);
    }
  };

  const auto worker = [&] {
    while (true) {
      const auto k = next.fetch_add(1);
      if (k >= pending.size()) return;
      const auto i = pending[k];
      if (options.stop.stop_requested() || aborted) {
        results[i].status = ResultStatus::cancelled;
        continue;
      }
      process(i);
      if (results[i].status != ResultStatus::cancelled) journal.record(results[i], digests[i]);
    }
  };

  const auto workers = std::min(options.max_in_flight, pending.size());
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  if (aborted) throw EndpointError(abort_reason);
  return results;
}

void write_translations(const std::filesystem::path& path, const std::vector<InferenceResult>& results) {
  std::vector<std::string> lines;
  lines.reserve(results.size());
  for (const auto& r : results) lines.push_back(r.status == ResultStatus::ok ? r.translation : std::string{});
  write_lines(path, lines);
}

void write_responses(const std::filesystem::path& path, const std::vector<InferenceResult>& results) {
  std::vector<std::string> lines;
  lines.reserve(results.size());
  for (const auto& r : results) lines.push_back(r.status == ResultStatus::ok ? r.response : std::string{});
  write_lines(path, lines);
}

void write_rejected(const std::filesystem::path& path, const std::vector<InferenceResult>& results) {
  std::vector<std::string> lines;
  lines.reserve(results.size());
  for (const auto& r : results) lines.push_back(r.status == ResultStatus::ok ? r.rejected.value_or("") : std::string{});
  write_lines(path, lines);
}

MatrixOutputs hint_matrix(const InferenceJob& job, const std::set<HintCondition>& conditions,
                          const std::filesystem::path& out_dir, const RunOptions& options) {
  if (conditions.empty()) throw ValidationError("hint matrix needs at least one condition");
  if (conditions.contains(HintCondition::unpreferred)) {
    throw ValidationError("'unpreferred' is produced by the preferred condition; do not request it directly");
  }
  std::filesystem::create_directories(out_dir);
  MatrixOutputs out;
  for (const auto condition : conditions) {
    const auto name = std::string(eval::to_string(condition));
    auto cond_job = job;
    cond_job.hint_override = condition;
    auto cond_options = options;
    cond_options.journal = out_dir / (name + ".journal.jsonl");
    auto results = run_job(cond_job, cond_options);

    const auto file = out_dir / (name + ".txt");
    write_translations(file, results);
    out.files[condition] = file;
    if (condition == HintCondition::preferred) {
      const auto unpreferred = out_dir / "unpreferred.txt";
      write_rejected(unpreferred, results);
      out.files[HintCondition::unpreferred] = unpreferred;
      out.preferred_responses = out_dir / "preferred.responses.txt";
      write_responses(*out.preferred_responses, results);
    }
    out.results[condition] = std::move(results);
  }
  return out;
}

}  // namespace parrot::inference
