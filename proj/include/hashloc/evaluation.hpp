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
#ifndef HASHLOC_EVALUATION_HPP_
#define HASHLOC_EVALUATION_HPP_

// Experiment drivers: repeated-split attack evaluation and the defense
// evaluation over a test set (post-defense accuracy, utility loss and
// timing per obfuscation bound).

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "hashloc/advisor.hpp"
#include "hashloc/corpus.hpp"
#include "hashloc/forest.hpp"
#include "hashloc/metrics.hpp"

namespace hashloc {

struct AttackEvalConfig {
  SplitSpec split;  // adversary field is ignored; both are run
  ForestParams forest;
};

struct AdversaryResult {
  Adversary adversary = Adversary::A1;
  PerformanceReport forest;    // mean over repetitions
  PerformanceReport baseline;  // mean over repetitions
  std::vector<PerformanceReport> forest_runs;
  std::vector<PerformanceReport> baseline_runs;
};

struct AttackEvalResult {
  std::vector<AdversaryResult> adversaries;

  const AdversaryResult& at(Adversary a) const {
    for (const auto& r : adversaries) {
      if (r.adversary == a) return r;
    }
    throw Error("adversary not evaluated: " + std::string(to_string(a)));
  }
};

inline AttackEvalResult run_attack_eval(const Corpus& c, const AttackEvalConfig& cfg,
                                        std::vector<Adversary> which = {Adversary::A1, Adversary::A2}) {
  AttackEvalResult out;
  for (Adversary adv : which) {
    AdversaryResult r;
    r.adversary = adv;
    SplitSpec spec = cfg.split;
    spec.adversary = adv;
    for (std::size_t rep = 0; rep < spec.repetitions; ++rep) {
      const Split s = split(c, spec, rep);
      ForestParams fp = cfg.forest;
      fp.seed = derive_seed(cfg.forest.seed, rep);
      const auto model = train_forest(s.train, fp);
      r.forest_runs.push_back(evaluate(model, s.test));
      r.baseline_runs.push_back(evaluate(train_baseline(s.train), s.test));
    }
    r.forest = average_reports(r.forest_runs);
    r.baseline = average_reports(r.baseline_runs);
    out.adversaries.push_back(std::move(r));
  }
  return out;
}

inline nlohmann::json to_json(const AttackEvalResult& r) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& a : r.adversaries) {
    nlohmann::json runs = nlohmann::json::array();
    for (std::size_t i = 0; i < a.forest_runs.size(); ++i) {
      runs.push_back({{"repetition", i}, {"attack", to_json(a.forest_runs[i])}, {"baseline", to_json(a.baseline_runs[i])}});
    }
    j[std::string(to_string(a.adversary))] = {
        {"attack", to_json(a.forest)}, {"baseline", to_json(a.baseline)}, {"repetitions", std::move(runs)}};
  }
  return j;
}

// ---------------------------------------------------------------------------
// Defense

struct DefenseEvalConfig {
  AdvisorConfig advisor;
  std::vector<std::optional<std::size_t>> bounds = {1, 2, 3, std::nullopt};
  /// Test posts to defend; 0 uses all of them.
  std::size_t max_posts = 0;
  std::uint64_t seed = 0;
  /// Random post pairs for the reference utility-loss distribution.
  std::size_t random_pairs = 10000;
};

struct DefenseOutcome {
  Source mechanism = Source::Original;
  double utility_loss = 0.0;
  bool satisfiable = false;
  bool attack_correct = false;  // attacker's top-1 on the published set
  double seconds = 0.0;
  /// Same fields for each configured mechanism, in configuration order.
  std::vector<Recommendation> per_mechanism;
  std::vector<bool> per_mechanism_attack_correct;
};

struct DefensePostRecord {
  std::size_t post = 0;  // index into the corpus
  std::size_t hashtag_count = 0;
  bool originally_exposed = false;  // original set fails alpha
  std::vector<DefenseOutcome> by_bound;  // aligned with DefenseEvalConfig::bounds
};

struct DefenseEvalResult {
  std::vector<std::optional<std::size_t>> bounds;
  std::vector<MechanismKind> mechanisms;
  std::vector<DefensePostRecord> posts;
  std::vector<double> random_pair_losses;
};

inline DefenseEvalResult run_defense_eval(const CorpusView& test, const AdvisorContext& ctx,
                                          const DefenseEvalConfig& cfg) {
  DefenseEvalResult out;
  out.bounds = cfg.bounds;
  for (const auto& m : cfg.advisor.mechanisms) out.mechanisms.push_back(m.kind);

  std::vector<std::size_t> chosen = test.posts;
  Rng rng(derive_seed(cfg.seed, 0xdefe));
  if (cfg.max_posts != 0 && cfg.max_posts < chosen.size()) {
    rng.shuffle(std::span(chosen));
    chosen.resize(cfg.max_posts);
    std::sort(chosen.begin(), chosen.end());
  }

  const Corpus& c = *test.corpus;
  for (std::size_t idx : chosen) {
    const Post& p = c.posts[idx];
    if (!p.location || p.hashtags.empty()) continue;
    DefensePostRecord rec;
    rec.post = idx;
    rec.hashtag_count = p.hashtags.size();
    const auto profile = recommend_bounded_profile(p.hashtags, *p.location, cfg.advisor, ctx, cfg.bounds);
    for (const auto& b : profile) {
      rec.originally_exposed = !b.advice.already_private;
      DefenseOutcome o;
      o.mechanism = b.advice.best.mechanism;
      o.utility_loss = b.advice.best.utility_loss;
      o.satisfiable = b.advice.best.satisfiable;
      o.seconds = b.seconds;
      auto attacked = [&](std::span<const HashtagId> hs) {
        return predict_top(ctx.model, featurize(hs, ctx.model.vocab_dimension)) == *p.location;
      };
      o.attack_correct = attacked(b.advice.best.hashtags);
      o.per_mechanism = b.advice.per_mechanism;
      for (const auto& r : o.per_mechanism) o.per_mechanism_attack_correct.push_back(attacked(r.hashtags));
      rec.by_bound.push_back(std::move(o));
    }
    out.posts.push_back(std::move(rec));
  }

  if (!chosen.empty()) {
    for (std::size_t i = 0; i < cfg.random_pairs; ++i) {
      const Post& a = c.posts[chosen[rng.uniform_index(chosen.size())]];
      const Post& b = c.posts[chosen[rng.uniform_index(chosen.size())]];
      out.random_pair_losses.push_back(utility_loss(a.hashtags, b.hashtags, ctx.embeddings));
    }
  }
  return out;
}

/// Attack accuracy over all defended posts after publishing the recommended
/// set at bound index `b`.
inline double post_defense_accuracy(const DefenseEvalResult& r, std::size_t b) {
  if (r.posts.empty()) return 0.0;
  std::size_t hits = 0;
  for (const auto& p : r.posts) hits += p.by_bound[b].attack_correct ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(r.posts.size());
}

namespace detail {

struct Mean {
  double sum = 0.0;
  std::size_t n = 0;
  void add(double x) {
    sum += x;
    ++n;
  }
  double value() const { return n == 0 ? 0.0 : sum / static_cast<double>(n); }
};

inline nlohmann::json curve(const std::map<std::size_t, Mean>& m, const char* field) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& [k, v] : m) rows.push_back({{"hashtag_count", k}, {field, v.value()}, {"n", v.n}});
  return rows;
}

inline std::string bound_label(const std::optional<std::size_t>& b) {
  return b ? std::to_string(*b) : std::string("unbounded");
}

}  // namespace detail

/// Aggregated report. Timing goes under "timing" only, so the rest is
/// reproducible bit for bit.
inline nlohmann::json to_json(const DefenseEvalResult& r, bool include_timing = true) {
  nlohmann::json bounds = nlohmann::json::array();
  nlohmann::json timing = nlohmann::json::array();
  for (std::size_t b = 0; b < r.bounds.size(); ++b) {
    std::map<std::size_t, detail::Mean> acc_optimal, loss, secs;
    std::vector<std::map<std::size_t, detail::Mean>> acc_mech(r.mechanisms.size());
    std::map<std::string, std::size_t> selected;
    std::map<std::string, std::vector<double>> losses;
    std::size_t exposed = 0, protected_ok = 0;
    for (const auto& p : r.posts) {
      const auto& o = p.by_bound[b];
      acc_optimal[p.hashtag_count].add(o.attack_correct ? 1.0 : 0.0);
      secs[p.hashtag_count].add(o.seconds);
      for (std::size_t m = 0; m < r.mechanisms.size(); ++m) {
        const bool correct = o.per_mechanism.empty() ? o.attack_correct : o.per_mechanism_attack_correct[m];
        acc_mech[m][p.hashtag_count].add(correct ? 1.0 : 0.0);
      }
      if (!p.originally_exposed) continue;
      ++exposed;
      if (!o.satisfiable) continue;
      ++protected_ok;
      ++selected[std::string(to_string(o.mechanism))];
      loss[p.hashtag_count].add(o.utility_loss);
      losses["optimal"].push_back(o.utility_loss);
      for (std::size_t m = 0; m < r.mechanisms.size(); ++m) {
        const auto& pm = o.per_mechanism[m];
        if (pm.satisfiable) losses[std::string(to_string(r.mechanisms[m]))].push_back(pm.utility_loss);
      }
    }
    for (auto& [k, v] : losses) std::sort(v.begin(), v.end());
    nlohmann::json mech_curves = nlohmann::json::object();
    for (std::size_t m = 0; m < r.mechanisms.size(); ++m) {
      mech_curves[std::string(to_string(r.mechanisms[m]))] = detail::curve(acc_mech[m], "accuracy");
    }
    double hits = 0;
    for (const auto& [k, v] : acc_optimal) hits += v.sum;
    bounds.push_back({{"bound", detail::bound_label(r.bounds[b])},
                      {"accuracy", r.posts.empty() ? 0.0 : hits / static_cast<double>(r.posts.size())},
                      {"accuracy_by_count", detail::curve(acc_optimal, "accuracy")},
                      {"accuracy_by_count_per_mechanism", std::move(mech_curves)},
                      {"exposed_posts", exposed},
                      {"protected_posts", protected_ok},
                      {"selected_mechanism", selected},
                      {"utility_loss_by_count", detail::curve(loss, "utility_loss")},
                      {"utility_loss_sorted", losses}});
    timing.push_back({{"bound", detail::bound_label(r.bounds[b])}, {"seconds_by_count", detail::curve(secs, "seconds")}});
  }
  std::vector<double> pairs = r.random_pair_losses;
  std::sort(pairs.begin(), pairs.end());
  nlohmann::json j = {{"n_posts", r.posts.size()}, {"bounds", std::move(bounds)}, {"random_pair_losses_sorted", pairs}};
  if (include_timing) j["timing"] = std::move(timing);
  return j;
}

}  // namespace hashloc

#endif  // HASHLOC_EVALUATION_HPP_
