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

// hashloc command-line entry point.

#include <cstdio>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "httplib.h"
#include "json.hpp"

#include "hashloc/hashloc.hpp"
#include "hashloc/http_server.hpp"

namespace {

using namespace hashloc;

void add_corpus_flags(CLI::App* cmd, app::CorpusFiles& f, bool taxonomy_required) {
  cmd->add_option("--posts", f.posts, "posts JSONL")->required()->check(CLI::ExistingFile);
  cmd->add_option("--locations", f.locations, "locations JSONL")->required()->check(CLI::ExistingFile);
  auto* t = cmd->add_option("--taxonomy", f.taxonomy, "hashtag taxonomy JSONL")->check(CLI::ExistingFile);
  if (taxonomy_required) t->required();
}

void add_filter_flags(CLI::App* cmd, FilterThresholds& t) {
  cmd->add_option("--min-user-checkins", t.min_user_checkins)->capture_default_str();
  cmd->add_option("--min-hashtag-count", t.min_hashtag_count)->capture_default_str();
  cmd->add_option("--min-location-checkins", t.min_location_checkins)->capture_default_str();
}

void add_forest_flags(CLI::App* cmd, ForestParams& p) {
  cmd->add_option("--n-trees", p.n_trees)->capture_default_str()->check(CLI::PositiveNumber);
  cmd->add_option("--min-leaf", p.min_leaf)->capture_default_str()->check(CLI::PositiveNumber);
  cmd->add_option("--max-depth", p.max_depth, "0 = unlimited")->capture_default_str();
  cmd->add_option("--threads", p.threads, "0 = all cores")->capture_default_str();
}

void add_split_flags(CLI::App* cmd, SplitSpec& s) {
  cmd->add_option("--train-fraction", s.train_fraction)->capture_default_str()->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--repetitions", s.repetitions)->capture_default_str()->check(CLI::PositiveNumber);
  cmd->add_option("--seed", s.seed)->capture_default_str();
}

struct BundleFlags {
  std::string model, embeddings, taxonomy;
};

void add_bundle_flags(CLI::App* cmd, BundleFlags& b) {
  cmd->add_option("--model", b.model)->required()->check(CLI::ExistingFile);
  cmd->add_option("--embeddings", b.embeddings)->required()->check(CLI::ExistingFile);
  cmd->add_option("--taxonomy", b.taxonomy)->check(CLI::ExistingFile);
}

std::optional<std::size_t> parse_bound(const std::string& s) {
  if (s == "inf" || s == "none" || s == "unbounded") return std::nullopt;
  std::size_t pos = 0;
  const unsigned long v = std::stoul(s, &pos);
  if (pos != s.size()) throw Error("bad bound: " + s);
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App cli{"Location inference from hashtags and a privacy advisor against it"};
  cli.set_version_flag("--version", std::string(kVersion));
  cli.require_subcommand(1);

  app::SynthCommand synth;
  std::uint64_t synth_seed = 0;
  auto* synth_cmd = cli.add_subcommand("synth", "generate a synthetic planted corpus");
  synth_cmd->add_option("--config", synth.config_path, "generator config JSON")->check(CLI::ExistingFile);
  auto* synth_seed_opt = synth_cmd->add_option("--seed", synth_seed, "overrides the config seed");
  synth_cmd->add_option("--out", synth.out_dir)->required();

  app::TrainCommand train;
  std::string train_adversary = "A1";
  auto* train_cmd = cli.add_subcommand("train", "train the attack model and hashtag embeddings");
  add_corpus_flags(train_cmd, train.files, false);
  add_filter_flags(train_cmd, train.filter);
  add_split_flags(train_cmd, train.split);
  add_forest_flags(train_cmd, train.forest);
  train_cmd->add_option("--adversary", train_adversary, "A1 or A2")->capture_default_str();
  train_cmd->add_option("--repetition", train.repetition, "which split repetition to train on")->capture_default_str();
  train_cmd->add_option("--embedding-dim", train.embedding.dim)->capture_default_str()->check(CLI::PositiveNumber);
  train_cmd->add_option("--embedding-epochs", train.embedding.epochs)->capture_default_str();
  train_cmd->add_option("--negative-samples", train.embedding.negative_samples)->capture_default_str();
  train_cmd->add_option("--learning-rate", train.embedding.learning_rate)->capture_default_str();
  train_cmd->add_option("--out", train.out_dir)->required();

  app::AttackEvalCommand attack;
  auto* attack_cmd = cli.add_subcommand("attack-eval", "repeated-split attack evaluation for both adversaries");
  add_corpus_flags(attack_cmd, attack.files, false);
  add_filter_flags(attack_cmd, attack.filter);
  add_split_flags(attack_cmd, attack.eval.split);
  add_forest_flags(attack_cmd, attack.eval.forest);
  attack_cmd->add_option("--out", attack.out_dir)->required();

  app::DefendEvalCommand defend;
  std::string defend_metric = "inaccuracy";
  std::size_t defend_ts = 2;
  std::vector<std::string> defend_bounds = {"1", "2", "3", "inf"};
  auto* defend_cmd = cli.add_subcommand("defend-eval", "run the advisor over test posts");
  add_corpus_flags(defend_cmd, defend.files, false);
  defend_cmd->add_option("--model", defend.model)->required()->check(CLI::ExistingFile);
  defend_cmd->add_option("--embeddings", defend.embeddings)->required()->check(CLI::ExistingFile);
  defend_cmd->add_option("--split", defend.split, "split.json from train")->required()->check(CLI::ExistingFile);
  defend_cmd->add_option("--alpha", defend.eval.advisor.alpha)->capture_default_str();
  defend_cmd->add_option("--metric", defend_metric, "inaccuracy, incorrectness or expected_distance_km")
      ->capture_default_str();
  defend_cmd->add_option("--t-s", defend_ts, "replacement neighbours per hashtag")->capture_default_str();
  defend_cmd->add_option("--bounds", defend_bounds, "edit bounds; 'inf' = unbounded")->capture_default_str();
  defend_cmd->add_option("--max-posts", defend.eval.max_posts, "0 = all test posts")->capture_default_str();
  defend_cmd->add_option("--random-pairs", defend.eval.random_pairs)->capture_default_str();
  defend_cmd->add_option("--seed", defend.eval.seed)->capture_default_str();
  defend_cmd->add_option("--out", defend.out_dir)->required();

  BundleFlags advise_bundle;
  auto* advise_cmd = cli.add_subcommand("advise", "answer recommend requests, one JSON object per stdin line");
  add_bundle_flags(advise_cmd, advise_bundle);

  BundleFlags serve_bundle;
  std::string host = "127.0.0.1";
  int port = 8080;
  auto* serve_cmd = cli.add_subcommand("serve", "HTTP advisor service");
  add_bundle_flags(serve_cmd, serve_bundle);
  serve_cmd->add_option("--host", host)->capture_default_str();
  serve_cmd->add_option("--port", port)->capture_default_str()->check(CLI::Range(0, 65535));

  CLI11_PARSE(cli, argc, argv);

  try {
    if (*synth_cmd) {
      if (*synth_seed_opt) synth.seed = synth_seed;
      app::run_synth(synth);
    } else if (*train_cmd) {
      train.split.adversary = parse_adversary(train_adversary);
      train.forest.seed = derive_seed(train.split.seed, train.repetition);
      train.embedding.seed = train.split.seed;
      app::run_train(train);
    } else if (*attack_cmd) {
      app::run_attack_eval_command(attack);
    } else if (*defend_cmd) {
      defend.eval.advisor.metric = parse_privacy_metric(defend_metric);
      for (auto& m : defend.eval.advisor.mechanisms) m.neighbors = defend_ts;
      defend.eval.advisor.validate();
      defend.eval.bounds.clear();
      for (const auto& b : defend_bounds) defend.eval.bounds.push_back(parse_bound(b));
      app::run_defend_eval_command(defend);
    } else if (*advise_cmd) {
      const auto bundle = load_bundle(advise_bundle.model, advise_bundle.embeddings, advise_bundle.taxonomy);
      std::string line;
      int status = 0;
      while (std::getline(std::cin, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
          std::cout << handle_recommend(*bundle, nlohmann::json::parse(line)).dump() << "\n";
        } catch (const std::exception& e) {
          std::cout << nlohmann::json{{"error", e.what()}}.dump() << "\n";
          status = 1;
        }
      }
      return status;
    } else if (*serve_cmd) {
      AdvisorService service([&] {
        return load_bundle(serve_bundle.model, serve_bundle.embeddings, serve_bundle.taxonomy);
      });
      httplib::Server server;
      bind_routes(server, service);
      if (port == 0) {
        port = server.bind_to_any_port(host);
        if (port < 0) throw Error("cannot bind " + host);
        std::fprintf(stderr, "listening on %s:%d\n", host.c_str(), port);
        server.listen_after_bind();
      } else {
        std::fprintf(stderr, "listening on %s:%d\n", host.c_str(), port);
        if (!server.listen(host, port)) throw Error("cannot listen on " + host + ":" + std::to_string(port));
      }
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "hashloc: %s\n", e.what());
    return 1;
  }
  return 0;
}
