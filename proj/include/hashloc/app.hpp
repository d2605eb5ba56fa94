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
#ifndef HASHLOC_APP_HPP_
#define HASHLOC_APP_HPP_

// Command implementations behind the `hashloc` CLI. Each command writes its
// outputs plus a manifest.json into an output directory.

#include <filesystem>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "hashloc/advisor.hpp"
#include "hashloc/corpus.hpp"
#include "hashloc/embedding.hpp"
#include "hashloc/evaluation.hpp"
#include "hashloc/forest.hpp"
#include "hashloc/io.hpp"
#include "hashloc/metrics.hpp"
#include "hashloc/service.hpp"
#include "hashloc/synth.hpp"
#include "hashloc/taxonomy.hpp"

namespace hashloc::app {

namespace fs = std::filesystem;

struct CorpusFiles {
  std::string posts;
  std::string locations;
  std::string taxonomy;  // optional
};

inline nlohmann::json to_json(const CorpusFiles& f) {
  return {{"posts", f.posts}, {"locations", f.locations}, {"taxonomy", f.taxonomy}};
}

inline nlohmann::json to_json(const FilterThresholds& t) {
  return {{"min_user_checkins", t.min_user_checkins},
          {"min_hashtag_count", t.min_hashtag_count},
          {"min_location_checkins", t.min_location_checkins}};
}

inline FilterThresholds filter_from_json(const nlohmann::json& j) {
  FilterThresholds t;
  t.min_user_checkins = j.at("min_user_checkins").get<std::size_t>();
  t.min_hashtag_count = j.at("min_hashtag_count").get<std::size_t>();
  t.min_location_checkins = j.at("min_location_checkins").get<std::size_t>();
  return t;
}

inline nlohmann::json to_json(const ForestParams& p) {
  return {{"n_trees", p.n_trees}, {"min_leaf", p.min_leaf}, {"max_depth", p.max_depth}, {"seed", p.seed}};
}

inline nlohmann::json to_json(const EmbeddingParams& p) {
  return {{"dim", p.dim},
          {"epochs", p.epochs},
          {"negative_samples", p.negative_samples},
          {"learning_rate", p.learning_rate},
          {"seed", p.seed}};
}

inline nlohmann::json to_json(const SplitSpec& s) {
  return {{"adversary", to_string(s.adversary)},
          {"train_fraction", s.train_fraction},
          {"seed", s.seed},
          {"repetitions", s.repetitions}};
}

inline nlohmann::json to_json(const AdvisorConfig& c) {
  nlohmann::json mechs = nlohmann::json::array();
  for (const auto& m : c.mechanisms) {
    mechs.push_back({{"kind", to_string(m.kind)},
                     {"max_edits", m.max_edits == kUnbounded ? nlohmann::json(nullptr) : nlohmann::json(m.max_edits)},
                     {"t_s", m.neighbors}});
  }
  return {{"alpha", c.alpha},
          {"metric", to_string(c.metric)},
          {"mechanisms", std::move(mechs)},
          {"max_obfuscated", c.max_obfuscated ? nlohmann::json(*c.max_obfuscated) : nlohmann::json(nullptr)}};
}

/// Writes `content` to dir/name and records its hash.
inline void emit(const fs::path& dir, const std::string& name, const std::string& content, Manifest& manifest) {
  write_file((dir / name).string(), content);
  manifest.add_output(name, content);
}

inline void finish(const fs::path& dir, const Manifest& manifest) {
  write_file((dir / "manifest.json").string(), manifest.to_json().dump(2) + "\n");
}

inline Corpus load_filtered(const CorpusFiles& files, const FilterThresholds& filter) {
  return filter_corpus(load_corpus(files.posts, files.locations), filter);
}

// ---------------------------------------------------------------------------
// synth

struct SynthCommand {
  std::string config_path;  // empty: defaults
  std::optional<std::uint64_t> seed;
  std::string out_dir;
};

inline SyntheticData run_synth(const SynthCommand& cmd) {
  SynthConfig cfg;
  if (!cmd.config_path.empty()) {
    try {
      cfg = nlohmann::json::parse(read_file(cmd.config_path)).get<SynthConfig>();
    } catch (const nlohmann::json::exception& e) {
      throw Error("synthetic config: " + std::string(e.what()));
    }
  }
  if (cmd.seed) cfg.seed = *cmd.seed;
  SyntheticData data = generate_synthetic(cfg);

  const fs::path dir(cmd.out_dir);
  fs::create_directories(dir);
  Manifest manifest("synth", nlohmann::json(cfg));
  std::ostringstream posts, locations, taxonomy;
  write_posts(posts, data.corpus);
  write_locations(locations, data.corpus);
  write_taxonomy(taxonomy, data.taxonomy);
  emit(dir, "posts.jsonl", posts.str(), manifest);
  emit(dir, "locations.jsonl", locations.str(), manifest);
  emit(dir, "taxonomy.jsonl", taxonomy.str(), manifest);
  finish(dir, manifest);
  return data;
}

// ---------------------------------------------------------------------------
// train

struct TrainCommand {
  CorpusFiles files;
  FilterThresholds filter;
  SplitSpec split;
  std::size_t repetition = 0;
  ForestParams forest;
  EmbeddingParams embedding;
  std::string out_dir;
};

inline nlohmann::json split_manifest(const Corpus& c, const Split& s, const SplitSpec& spec, std::size_t repetition,
                                     const FilterThresholds& filter) {
  auto users_of = [&](const CorpusView& v) {
    std::vector<std::string> users;
    std::vector<char> seen(c.users.size(), 0);
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!seen[v[i].user]) users.push_back(c.users.text(v[i].user));
      seen[v[i].user] = 1;
    }
    std::sort(users.begin(), users.end());
    return users;
  };
  nlohmann::json j = to_json(spec);
  j["repetition"] = repetition;
  j["filter"] = to_json(filter);
  j["n_posts"] = c.posts.size();
  j["train_posts"] = s.train.posts;
  j["test_posts"] = s.test.posts;
  j["train_users"] = users_of(s.train);
  j["test_users"] = users_of(s.test);
  return j;
}

struct TrainResult {
  RandomForestModel model;
  EmbeddingTable embeddings;
  Vocabulary vocab;  // corpus vocabulary + category tokens
};

inline TrainResult run_train(const TrainCommand& cmd) {
  const Corpus corpus = load_filtered(cmd.files, cmd.filter);
  if (corpus.posts.empty()) throw Error("train: corpus is empty after filtering");
  const Split s = split(corpus, cmd.split, cmd.repetition);

  TrainResult r;
  r.model = train_forest(s.train, cmd.forest);
  std::vector<TaxonomyEntry> entries;
  if (!cmd.files.taxonomy.empty()) entries = load_taxonomy(cmd.files.taxonomy);
  CategoryTaxonomy tax;
  std::tie(r.vocab, tax) = extend_vocabulary(corpus.vocab, entries);
  auto trained = train_embeddings(corpus, cmd.embedding);
  r.embeddings = std::move(trained.table);
  add_category_vectors(r.embeddings, tax, r.vocab.size());

  nlohmann::json config = {{"files", to_json(cmd.files)},
                           {"filter", to_json(cmd.filter)},
                           {"split", to_json(cmd.split)},
                           {"repetition", cmd.repetition},
                           {"forest", to_json(cmd.forest)},
                           {"embedding", to_json(cmd.embedding)}};
  Manifest manifest("train", config);
  const fs::path dir(cmd.out_dir);
  fs::create_directories(dir);
  std::ostringstream emb;
  write_embeddings(emb, r.embeddings, r.vocab);
  nlohmann::json isolated = nlohmann::json::array();
  for (HashtagId h : trained.isolated) isolated.push_back(corpus.vocab.text(h));
  std::size_t depth = 0;
  for (const auto& t : r.model.trees) depth = std::max(depth, t.depth());
  const nlohmann::json report = {{"posts", corpus.posts.size()},
                                 {"hashtags", corpus.vocab.size()},
                                 {"locations", corpus.locations.size()},
                                 {"users", corpus.users.size()},
                                 {"train_posts", s.train.size()},
                                 {"test_posts", s.test.size()},
                                 {"classes", r.model.classes.size()},
                                 {"degenerate_model", r.model.degenerate},
                                 {"max_tree_depth", depth},
                                 {"generalizable_hashtags", tax.size()},
                                 {"embedding_isolated_hashtags", isolated}};
  emit(dir, "model.json", model_to_json(r.model).dump() + "\n", manifest);
  emit(dir, "embeddings.txt", emb.str(), manifest);
  emit(dir, "split.json", split_manifest(corpus, s, cmd.split, cmd.repetition, cmd.filter).dump() + "\n", manifest);
  emit(dir, "train_report.json", report.dump(2) + "\n", manifest);
  finish(dir, manifest);
  return r;
}

// ---------------------------------------------------------------------------
// attack-eval

struct AttackEvalCommand {
  CorpusFiles files;
  FilterThresholds filter;
  AttackEvalConfig eval;
  std::string out_dir;
};

inline AttackEvalResult run_attack_eval_command(const AttackEvalCommand& cmd) {
  const Corpus corpus = load_filtered(cmd.files, cmd.filter);
  if (corpus.posts.empty()) throw Error("attack-eval: corpus is empty after filtering");
  const AttackEvalResult result = run_attack_eval(corpus, cmd.eval);

  nlohmann::json config = {{"files", to_json(cmd.files)},
                           {"filter", to_json(cmd.filter)},
                           {"split", to_json(cmd.eval.split)},
                           {"forest", to_json(cmd.eval.forest)}};
  Manifest manifest("attack-eval", config);
  const fs::path dir(cmd.out_dir);
  fs::create_directories(dir);
  emit(dir, "attack_report.json", to_json(result).dump(2) + "\n", manifest);
  for (const auto& a : result.adversaries) {
    std::ostringstream attack, baseline;
    write_count_csv(attack, a.forest);
    write_count_csv(baseline, a.baseline);
    emit(dir, "curves_" + std::string(to_string(a.adversary)) + ".csv", attack.str(), manifest);
    emit(dir, "curves_" + std::string(to_string(a.adversary)) + "_baseline.csv", baseline.str(), manifest);
  }
  finish(dir, manifest);
  return result;
}

// ---------------------------------------------------------------------------
// defend-eval

struct DefendEvalCommand {
  CorpusFiles files;
  std::string model;
  std::string embeddings;
  std::string split;  // split.json written by train
  DefenseEvalConfig eval;
  std::string out_dir;
};

inline DefenseEvalResult run_defend_eval_command(const DefendEvalCommand& cmd) {
  const auto split_info = nlohmann::json::parse(read_file(cmd.split));
  const Corpus corpus = load_filtered(cmd.files, filter_from_json(split_info.at("filter")));
  if (corpus.posts.size() != split_info.at("n_posts").get<std::size_t>()) {
    throw Error("defend-eval: filtered corpus does not match the split manifest");
  }
  CorpusView test{&corpus, split_info.at("test_posts").get<std::vector<std::size_t>>()};
  for (std::size_t i : test.posts) {
    if (i >= corpus.posts.size()) throw Error("defend-eval: split manifest references a missing post");
  }
  const auto bundle = load_bundle(cmd.model, cmd.embeddings, cmd.files.taxonomy);
  if (!(bundle->model.vocab == corpus.vocab)) throw Error("defend-eval: model vocabulary does not match the corpus");
  const DefenseEvalResult result = run_defense_eval(test, bundle->context(), cmd.eval);

  nlohmann::json bounds = nlohmann::json::array();
  for (const auto& b : cmd.eval.bounds) bounds.push_back(b ? nlohmann::json(*b) : nlohmann::json(nullptr));
  nlohmann::json config = {{"files", to_json(cmd.files)},
                           {"model", cmd.model},
                           {"embeddings", cmd.embeddings},
                           {"split", cmd.split},
                           {"advisor", to_json(cmd.eval.advisor)},
                           {"bounds", bounds},
                           {"max_posts", cmd.eval.max_posts},
                           {"seed", cmd.eval.seed},
                           {"random_pairs", cmd.eval.random_pairs}};
  Manifest manifest("defend-eval", config);
  const fs::path dir(cmd.out_dir);
  fs::create_directories(dir);
  emit(dir, "defense_report.json", to_json(result, false).dump(2) + "\n", manifest);
  // Wall-clock numbers vary run to run; kept out of the hashed outputs.
  write_file((dir / "defense_timing.json").string(), to_json(result, true).at("timing").dump(2) + "\n");
  finish(dir, manifest);
  return result;
}

}  // namespace hashloc::app

#endif  // HASHLOC_APP_HPP_
