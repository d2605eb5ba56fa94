// Copyright 2026 The hashloc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
#ifndef HASHLOC_SERVICE_HPP_
#define HASHLOC_SERVICE_HPP_

// JSON request handlers shared by the `advise` command and the HTTP
// service, and the reloadable model snapshot the service runs against.

#include <cmath>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "hashloc/advisor.hpp"
#include "hashloc/embedding.hpp"
#include "hashloc/forest.hpp"
#include "hashloc/taxonomy.hpp"

namespace hashloc {

/// Raised for malformed or unanswerable requests (HTTP 400).
class BadRequest : public Error {
 public:
  using Error::Error;
};

/// Everything the advisor needs at query time. `vocab` is the model
/// vocabulary followed by the taxonomy's category tokens.
struct AdvisorBundle {
  RandomForestModel model;
  Vocabulary vocab;
  CategoryTaxonomy taxonomy;
  EmbeddingTable embeddings;

  AdvisorContext context() const { return {model, embeddings, taxonomy}; }
};

/// Model vocabulary extended with category tokens, plus the taxonomy over it.
inline std::pair<Vocabulary, CategoryTaxonomy> extend_vocabulary(const Vocabulary& base,
                                                                 const std::vector<TaxonomyEntry>& entries) {
  Vocabulary vocab = base;
  CategoryTaxonomy tax = CategoryTaxonomy::build(entries, vocab);
  return {std::move(vocab), std::move(tax)};
}

inline std::shared_ptr<const AdvisorBundle> load_bundle(const std::string& model_path, const std::string& embeddings_path,
                                                        const std::string& taxonomy_path) {
  auto b = std::make_shared<AdvisorBundle>();
  b->model = load_model(model_path);
  std::vector<TaxonomyEntry> entries;
  if (!taxonomy_path.empty()) entries = load_taxonomy(taxonomy_path);
  std::tie(b->vocab, b->taxonomy) = extend_vocabulary(b->model.vocab, entries);
  b->embeddings = load_embeddings(embeddings_path, b->vocab);
  return b;
}

// ---------------------------------------------------------------------------

inline nlohmann::json hashtag_texts(std::span<const HashtagId> hs, const Vocabulary& vocab) {
  nlohmann::json out = nlohmann::json::array();
  for (HashtagId h : hs) out.push_back(vocab.text(h));
  return out;
}

inline nlohmann::json to_json(const Recommendation& r, const Vocabulary& vocab) {
  nlohmann::json j = {{"mechanism", to_string(r.mechanism)},
                      {"hashtags", hashtag_texts(r.hashtags, vocab)},
                      {"privacy_level", r.privacy_level},
                      {"utility_loss", r.utility_loss},
                      {"edits", r.edits},
                      {"satisfiable", r.satisfiable}};
  if (!r.applicable) j["applicable"] = false;
  return j;
}

namespace detail {

inline std::vector<HashtagId> request_hashtags(const nlohmann::json& req, const Vocabulary& vocab, bool strict,
                                               std::vector<std::string>* unknown = nullptr) {
  if (!req.contains("hashtags") || !req.at("hashtags").is_array()) throw BadRequest("\"hashtags\" must be an array");
  std::vector<HashtagId> ids;
  for (const auto& h : req.at("hashtags")) {
    if (!h.is_string()) throw BadRequest("hashtags must be strings");
    const std::string text = normalize_hashtag(h.get<std::string>());
    if (auto id = vocab.find(text)) {
      ids.push_back(*id);
    } else if (strict) {
      throw BadRequest("unknown hashtag \"" + text + "\"");
    } else if (unknown) {
      unknown->push_back(text);
    }
  }
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

}  // namespace detail

/// POST /predict: {hashtags, k?} -> {topk:[{location,name,prob}], posterior_entropy, unknown}.
/// Entropy is in nats. Unknown hashtags are ignored, as the attacker would.
inline nlohmann::json handle_predict(const AdvisorBundle& b, const nlohmann::json& req) {
  std::vector<std::string> unknown;
  const auto ids = detail::request_hashtags(req, b.vocab, false, &unknown);
  const std::size_t k = req.contains("k") ? req.at("k").get<std::size_t>() : 5;
  const auto post = predict_posterior(b.model, featurize(ids, b.model.vocab_dimension));
  std::vector<std::size_t> order(post.probs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](auto x, auto y) { return post.probs[x] > post.probs[y]; });
  nlohmann::json topk = nlohmann::json::array();
  for (std::size_t i = 0; i < std::min(k, order.size()); ++i) {
    const auto& loc = b.model.locations.at(b.model.classes[order[i]]);
    topk.push_back({{"location", loc.key}, {"name", loc.name}, {"prob", post.probs[order[i]]}});
  }
  double entropy = 0.0;
  for (double p : post.probs) {
    if (p > 0.0) entropy -= p * std::log(p);
  }
  return {{"topk", std::move(topk)}, {"posterior_entropy", entropy}, {"unknown", unknown}};
}

/// POST /recommend and the `advise` command.
inline nlohmann::json handle_recommend(const AdvisorBundle& b, const nlohmann::json& req) {
  const auto ids = detail::request_hashtags(req, b.vocab, true);
  if (ids.empty()) throw BadRequest("no hashtags given");
  if (!req.contains("true_location") || !req.at("true_location").is_string()) {
    throw BadRequest("\"true_location\" must be a location id string");
  }
  const std::string key = req.at("true_location").get<std::string>();
  std::optional<LocationId> true_loc;
  for (std::size_t i = 0; i < b.model.locations.size(); ++i) {
    if (b.model.locations[i].key == key) true_loc = static_cast<LocationId>(i);
  }
  if (!true_loc) throw BadRequest("unknown location \"" + key + "\"");

  AdvisorConfig cfg;
  try {
    if (req.contains("alpha")) cfg.alpha = req.at("alpha").get<double>();
    if (req.contains("metric")) cfg.metric = parse_privacy_metric(req.at("metric").get<std::string>());
    if (req.contains("max_obfuscated") && !req.at("max_obfuscated").is_null()) {
      cfg.max_obfuscated = req.at("max_obfuscated").get<std::size_t>();
    }
    if (req.contains("t_s")) {
      for (auto& m : cfg.mechanisms) m.neighbors = req.at("t_s").get<std::size_t>();
    }
    cfg.validate();
  } catch (const nlohmann::json::exception& e) {
    throw BadRequest(e.what());
  } catch (const BadRequest&) {
    throw;
  } catch (const Error& e) {
    throw BadRequest(e.what());
  }

  const Advice a = recommend(ids, *true_loc, cfg, b.context());
  nlohmann::json recs = nlohmann::json::array();
  if (a.already_private) {
    recs.push_back(to_json(a.best, b.vocab));
  } else {
    for (const auto& r : a.per_mechanism) recs.push_back(to_json(r, b.vocab));
  }
  const auto predicted = predict_top(b.model, featurize(ids, b.model.vocab_dimension));
  return {{"original",
           {{"hashtags", hashtag_texts(ids, b.vocab)},
            {"privacy_level", a.original_privacy},
            {"predicted_location", b.model.locations.at(predicted).key},
            {"satisfiable", a.already_private}}},
          {"alpha", cfg.alpha},
          {"metric", to_string(cfg.metric)},
          {"recommendations", std::move(recs)},
          {"optimal", to_json(a.best, b.vocab)}};
}

inline nlohmann::json handle_model_info(const AdvisorBundle& b) {
  nlohmann::json locs = nlohmann::json::array();
  for (LocationId c : b.model.classes) {
    const auto& l = b.model.locations.at(c);
    locs.push_back({{"id", l.key}, {"name", l.name}});
  }
  return {{"n_trees", b.model.n_trees},
          {"vocab_size", b.model.vocab_dimension},
          {"classes", b.model.classes.size()},
          {"generalizable_hashtags", b.taxonomy.size()},
          {"locations", std::move(locs)}};
}

/// Holds the current bundle; reload() swaps it while requests already
/// running keep the snapshot they started with.
class AdvisorService {
 public:
  using Loader = std::function<std::shared_ptr<const AdvisorBundle>()>;

  explicit AdvisorService(Loader loader) : loader_(std::move(loader)), current_(loader_()) {}

  std::shared_ptr<const AdvisorBundle> snapshot() const {
    std::lock_guard lock(mu_);
    return current_;
  }

  void reload() {
    auto fresh = loader_();
    std::lock_guard lock(mu_);
    current_ = std::move(fresh);
  }

  nlohmann::json predict(const nlohmann::json& req) const { return handle_predict(*snapshot(), req); }
  nlohmann::json recommend(const nlohmann::json& req) const { return handle_recommend(*snapshot(), req); }
  nlohmann::json model_info() const { return handle_model_info(*snapshot()); }

 private:
  Loader loader_;
  mutable std::mutex mu_;
  std::shared_ptr<const AdvisorBundle> current_;
};

}  // namespace hashloc

#endif  // HASHLOC_SERVICE_HPP_
