#include "parrot/scorer_client.hpp"

#include <cmath>
#include <set>
#include <unordered_map>

#include "parrot/endpoint.hpp"
#include "parrot/error.hpp"
#include "parrot/io.hpp"

namespace parrot::scoring {

void ScoreRequest::validate() const {
  if (items.empty()) throw ValidationError("score request has no items");
  if (model.empty()) throw ValidationError("score request needs a model name");
  std::set<std::string_view> seen;
  for (const auto& item : items) {
    if (item.id.empty()) throw ValidationError("score item with empty id");
    if (!seen.insert(item.id).second) throw ValidationError("duplicate score item id '" + item.id + "'");
  }
}

nlohmann::ordered_json to_json(const ScoreItem& item) {
  nlohmann::ordered_json j;
  j["id"] = item.id;
  j["source"] = item.source;
  j["hypothesis"] = item.hypothesis;
  if (item.reference) j["reference"] = *item.reference;
  return j;
}

nlohmann::ordered_json to_json(const ScoreRequest& req) {
  nlohmann::ordered_json j;
  j["items"] = nlohmann::ordered_json::array();
  for (const auto& item : req.items) j["items"].push_back(to_json(item));
  j["model"] = req.model;
  return j;
}

ScoreItem score_item_from_json(const nlohmann::json& j) {
  try {
    ScoreItem item;
    item.id = j.at("id").get<std::string>();
    item.source = j.at("source").get<std::string>();
    item.hypothesis = j.at("hypothesis").get<std::string>();
    if (j.contains("reference") && !j["reference"].is_null()) item.reference = j["reference"].get<std::string>();
    return item;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("bad score item: ") + e.what());
  }
}

namespace {

ItemScore item_score_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("id")) throw ValidationError("score entry without an id");
  ItemScore s;
  s.id = j.at("id").is_string() ? j.at("id").get<std::string>() : j.at("id").dump();
  if (j.contains("error") && !j["error"].is_null()) {
    s.error = j["error"].is_string() ? j["error"].get<std::string>() : j["error"].dump();
    return s;
  }
  if (!j.contains("score") || !j["score"].is_number()) {
    throw ValidationError("score entry '" + s.id + "' has neither a numeric score nor an error");
  }
  const double v = j["score"].get<double>();
  if (!std::isfinite(v)) throw ValidationError("score entry '" + s.id + "' is not finite");
  s.score = v;
  return s;
}

ScoreResponse check_against(std::vector<ItemScore> entries, std::string model, const ScoreRequest& req) {
  std::unordered_map<std::string, ItemScore> by_id;
  for (auto& e : entries) {
    const auto id = e.id;
    if (!by_id.emplace(id, std::move(e)).second) throw ValidationError("scorer returned id '" + id + "' twice");
  }
  ScoreResponse resp;
  resp.model = std::move(model);
  for (const auto& item : req.items) {
    const auto it = by_id.find(item.id);
    if (it == by_id.end()) throw ValidationError("scorer returned no entry for id '" + item.id + "'");
    resp.items.push_back(std::move(it->second));
    by_id.erase(it);
  }
  if (!by_id.empty()) throw ValidationError("scorer returned unknown id '" + by_id.begin()->first + "'");
  return resp;
}

}  // namespace

ScoreResponse response_from_json(const nlohmann::json& j, const ScoreRequest& req) {
  if (!j.is_object()) throw ValidationError("scorer reply is not a JSON object");
  if (j.contains("error") && !j.contains("items")) {
    throw EndpointError("scorer protocol error: " + (j["error"].is_string() ? j["error"].get<std::string>() : j["error"].dump()));
  }
  if (!j.contains("items") || !j["items"].is_array()) throw ValidationError("scorer reply has no items array");
  std::vector<ItemScore> entries;
  for (const auto& e : j["items"]) entries.push_back(item_score_from_json(e));
  return check_against(std::move(entries), j.value("model", req.model), req);
}

ScoreResponse score_remote(const std::string& endpoint, const ScoreRequest& req, std::chrono::milliseconds timeout) {
  req.validate();
  const auto url = net::EndpointUrl::parse(endpoint);
  const auto resp = net::post_json(url, url.path_for("score"), io::dump_line(to_json(req)), timeout);
  nlohmann::json body;
  try {
    body = nlohmann::json::parse(resp.body);
  } catch (const nlohmann::json::parse_error&) {
    throw EndpointError("scorer replied HTTP " + std::to_string(resp.status) + " with a non-JSON body");
  }
  if (resp.status != 200) {
    const auto detail = body.is_object() && body.contains("error") ? body["error"].dump() : resp.body;
    throw EndpointError("scorer replied HTTP " + std::to_string(resp.status) + ": " + detail);
  }
  return response_from_json(body, req);
}

ScoreResponse read_offline_scores(const std::filesystem::path& path, const ScoreRequest& req) {
  std::vector<ItemScore> entries;
  std::string model;
  io::for_each_jsonl(path, [&](const nlohmann::json& j, std::size_t) {
    entries.push_back(item_score_from_json(j));
    if (model.empty() && j.contains("model") && j["model"].is_string()) model = j["model"].get<std::string>();
  });
  return check_against(std::move(entries), model.empty() ? req.model : model, req);
}

ScoreRequest make_request(const std::vector<SystemTranslation>& translations, const SourceIndex& sources,
                          const SourceIndex* references, const std::string& model) {
  ScoreRequest req;
  req.model = model;
  req.items.reserve(translations.size());
  for (std::size_t i = 0; i < translations.size(); ++i) {
    const auto& t = translations[i];
    const auto src = sources.find(t.segment_id);
    if (src == sources.end()) throw ValidationError("no source sentence for segment '" + t.segment_id + "'");
    ScoreItem item{std::to_string(i), src->second.source, t.text, std::nullopt};
    if (references) {
      const auto ref = references->find(t.segment_id);
      if (ref == references->end()) throw ValidationError("no reference for segment '" + t.segment_id + "'");
      item.reference = ref->second.source;
    }
    req.items.push_back(std::move(item));
  }
  req.validate();
  return req;
}

std::vector<quality::ScoredTranslation> join_scores(const std::vector<SystemTranslation>& translations,
                                                    const ScoreResponse& response, std::vector<std::string>* failed) {
  std::unordered_map<std::string, const ItemScore*> by_id;
  for (const auto& s : response.items) by_id[s.id] = &s;
  std::vector<quality::ScoredTranslation> out;
  for (std::size_t i = 0; i < translations.size(); ++i) {
    const auto& t = translations[i];
    const auto it = by_id.find(std::to_string(i));
    if (it == by_id.end() || !it->second->score) {
      if (failed) {
        const auto why = it == by_id.end() ? std::string("missing") : it->second->error.value_or("no score");
        failed->push_back(t.segment_id + "/" + t.system + ": " + why);
      }
      continue;
    }
    out.push_back({t.segment_id, t.system, t.text, *it->second->score, quality::ScoreSource::automatic});
  }
  return out;
}

}  // namespace parrot::scoring
