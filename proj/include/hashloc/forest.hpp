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
#ifndef HASHLOC_FOREST_HPP_
#define HASHLOC_FOREST_HPP_

// Random forest over sparse binary hashtag-presence features. Trees are
// grown on bootstrap resamples with Gini splits; the forest posterior is the
// fraction of trees voting for each location.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "json.hpp"

#include "hashloc/corpus.hpp"
#include "hashloc/rng.hpp"

namespace hashloc {

/// Indices i with x_i = 1, sorted ascending, all below `dimension`.
struct FeatureVector {
  std::vector<HashtagId> present;
  std::size_t dimension = 0;
};

/// Hashtag ids at or above `dimension` were never seen by the model and are
/// dropped.
inline FeatureVector featurize(std::span<const HashtagId> hashtags, std::size_t dimension) {
  FeatureVector f{{}, dimension};
  for (HashtagId h : hashtags) {
    if (h < dimension) f.present.push_back(h);
  }
  std::sort(f.present.begin(), f.present.end());
  f.present.erase(std::unique(f.present.begin(), f.present.end()), f.present.end());
  return f;
}

inline FeatureVector featurize(const Post& p, std::size_t dimension) { return featurize(p.hashtags, dimension); }

struct ForestParams {
  std::size_t n_trees = 100;
  std::size_t min_leaf = 1;
  std::size_t max_depth = 0;  // 0: unlimited
  std::uint64_t seed = 0;
  unsigned threads = 0;  // 0: hardware concurrency
};

/// Flat tree node. Split nodes route on presence of `feature`; leaves carry
/// per-class sample counts (class = index into the model's class list).
struct TreeNode {
  static constexpr std::int32_t kLeaf = -1;
  std::int32_t feature = kLeaf;
  std::uint32_t absent = 0;
  std::uint32_t present = 0;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> counts;
  std::uint32_t vote = 0;

  bool is_leaf() const noexcept { return feature == kLeaf; }
};

class DecisionTree {
 public:
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  const TreeNode& leaf_for(const FeatureVector& f) const {
    std::size_t i = 0;
    while (!nodes[i].is_leaf()) {
      const auto feat = static_cast<HashtagId>(nodes[i].feature);
      i = std::binary_search(f.present.begin(), f.present.end(), feat) ? nodes[i].present : nodes[i].absent;
    }
    return nodes[i];
  }

  std::uint32_t vote(const FeatureVector& f) const { return leaf_for(f).vote; }

  std::size_t depth() const {
    std::vector<std::pair<std::size_t, std::size_t>> stack{{0, 0}};
    std::size_t best = 0;
    while (!stack.empty()) {
      auto [i, d] = stack.back();
      stack.pop_back();
      best = std::max(best, d);
      if (!nodes[i].is_leaf()) {
        stack.push_back({nodes[i].absent, d + 1});
        stack.push_back({nodes[i].present, d + 1});
      }
    }
    return best;
  }
};

struct Posterior {
  std::vector<double> probs;  // aligned with RandomForestModel::classes
};

struct RandomForestModel {
  static constexpr int kFormatVersion = 1;

  std::vector<DecisionTree> trees;
  std::size_t vocab_dimension = 0;
  std::vector<LocationId> classes;  // ascending
  std::uint64_t seed = 0;
  std::size_t n_trees = 0;
  bool degenerate = false;  // trained on a single class

  // Text tables of the training corpus, kept with the model so it can be
  // queried by hashtag text and report location details.
  Vocabulary vocab;
  std::vector<Location> locations;

  std::optional<std::size_t> class_index(LocationId loc) const {
    auto it = std::lower_bound(classes.begin(), classes.end(), loc);
    if (it == classes.end() || *it != loc) return std::nullopt;
    return static_cast<std::size_t>(it - classes.begin());
  }
};

namespace detail {

struct TrainingSample {
  const std::vector<HashtagId>* features;
  std::uint32_t label;
  std::uint32_t weight;
};

inline std::uint64_t gini_numerator(std::span<const std::uint32_t> counts, std::uint64_t n) {
  // n^2 * gini = n^2 - sum c^2; kept integral so split ranking is exact.
  std::uint64_t sq = 0;
  for (std::uint32_t c : counts) sq += static_cast<std::uint64_t>(c) * c;
  return n * n - sq;
}

class TreeBuilder {
 public:
  TreeBuilder(std::span<const TrainingSample> samples, std::size_t n_classes, std::size_t dimension,
              const ForestParams& params, std::uint64_t seed)
      : samples_(samples),
        n_classes_(n_classes),
        dimension_(dimension),
        params_(params),
        rng_(seed),
        presence_(dimension, 0),
        slot_(dimension, -1),
        n_candidates_(static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(dimension))))) {}

  DecisionTree build() {
    // Bootstrap: same size as the training set, drawn with replacement.
    std::vector<std::uint32_t> weight(samples_.size(), 0);
    for (std::size_t i = 0; i < samples_.size(); ++i) ++weight[rng_.uniform_index(samples_.size())];
    std::vector<std::uint32_t> root;
    for (std::uint32_t i = 0; i < samples_.size(); ++i) {
      if (weight[i] > 0) root.push_back(i);
    }
    weights_ = std::move(weight);

    DecisionTree tree;
    struct Pending {
      std::size_t node;
      std::vector<std::uint32_t> members;
      std::size_t depth;
    };
    tree.nodes.emplace_back();
    std::vector<Pending> stack;
    stack.push_back({0, std::move(root), 0});
    while (!stack.empty()) {
      Pending job = std::move(stack.back());
      stack.pop_back();
      auto split = grow(job.members, job.depth, tree.nodes[job.node]);
      if (!split) continue;
      auto& [absent, present] = *split;
      const auto a = static_cast<std::uint32_t>(tree.nodes.size());
      tree.nodes.emplace_back();
      tree.nodes.emplace_back();
      tree.nodes[job.node].absent = a;
      tree.nodes[job.node].present = a + 1;
      // Present side is pushed first so the absent subtree is expanded first.
      stack.push_back({a + 1, std::move(present), job.depth + 1});
      stack.push_back({a, std::move(absent), job.depth + 1});
    }
    return tree;
  }

 private:
  using Partition = std::pair<std::vector<std::uint32_t>, std::vector<std::uint32_t>>;

  // Fills `node` as a leaf, or as a split and returns the child partitions.
  std::optional<Partition> grow(const std::vector<std::uint32_t>& members, std::size_t depth, TreeNode& node) {
    std::vector<std::uint32_t> counts(n_classes_, 0);
    std::uint64_t n = 0;
    for (std::uint32_t s : members) {
      counts[samples_[s].label] += weights_[s];
      n += weights_[s];
    }
    const std::size_t classes_present =
        static_cast<std::size_t>(std::count_if(counts.begin(), counts.end(), [](auto c) { return c > 0; }));

    auto make_leaf = [&] {
      node.feature = TreeNode::kLeaf;
      node.counts.clear();
      std::uint32_t best = 0;
      for (std::uint32_t c = 0; c < n_classes_; ++c) {
        if (counts[c] == 0) continue;
        node.counts.push_back({c, counts[c]});
        if (counts[c] > counts[best]) best = c;
      }
      node.vote = best;
      return std::nullopt;
    };

    if (classes_present <= 1 || n < params_.min_leaf ||
        (params_.max_depth != 0 && depth >= params_.max_depth)) {
      return make_leaf();
    }

    // Features that are neither absent from nor present in every sample are
    // the only ones able to split this node; candidates are drawn from them.
    std::vector<HashtagId> touched;
    for (std::uint32_t s : members) {
      for (HashtagId h : *samples_[s].features) {
        if (presence_[h] == 0) touched.push_back(h);
        presence_[h] += weights_[s];
      }
    }
    std::vector<HashtagId> informative;
    for (HashtagId h : touched) {
      if (presence_[h] < n) informative.push_back(h);
      presence_[h] = 0;
    }
    if (informative.empty()) return make_leaf();
    std::sort(informative.begin(), informative.end());

    const std::size_t k = std::min(n_candidates_, informative.size());
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng_.uniform_index(informative.size() - i));
      std::swap(informative[i], informative[j]);
    }
    std::vector<HashtagId> candidates(informative.begin(), informative.begin() + static_cast<std::ptrdiff_t>(k));
    std::sort(candidates.begin(), candidates.end());
    for (std::size_t c = 0; c < k; ++c) slot_[candidates[c]] = static_cast<std::int32_t>(c);

    // Class counts on the present side, one row per candidate.
    std::vector<std::uint32_t> present_counts(k * n_classes_, 0);
    std::vector<std::uint64_t> present_n(k, 0);
    for (std::uint32_t s : members) {
      for (HashtagId h : *samples_[s].features) {
        const std::int32_t c = slot_[h];
        if (c < 0) continue;
        present_counts[static_cast<std::size_t>(c) * n_classes_ + samples_[s].label] += weights_[s];
        present_n[static_cast<std::size_t>(c)] += weights_[s];
      }
    }
    for (HashtagId h : candidates) slot_[h] = -1;

    // Maximal impurity decrease == minimal weighted child impurity
    // n_l * gini_l + n_r * gini_r. Equal scores keep the lowest feature id.
    std::optional<std::size_t> best;
    long double best_score = 0.0L;
    std::vector<std::uint32_t> absent_counts(n_classes_);
    const long double parent = static_cast<long double>(gini_numerator(counts, n)) / static_cast<long double>(n);
    for (std::size_t c = 0; c < k; ++c) {
      const std::uint64_t np = present_n[c];
      const std::uint64_t na = n - np;
      if (np < params_.min_leaf || na < params_.min_leaf) continue;
      std::span<const std::uint32_t> pc(&present_counts[c * n_classes_], n_classes_);
      for (std::size_t y = 0; y < n_classes_; ++y) absent_counts[y] = counts[y] - pc[y];
      const long double score =
          static_cast<long double>(gini_numerator(pc, np)) / static_cast<long double>(np) +
          static_cast<long double>(gini_numerator(absent_counts, na)) / static_cast<long double>(na);
      if (!(score < parent)) continue;  // no impurity decrease
      if (!best || score < best_score) {
        best = c;
        best_score = score;
      }
    }
    if (!best) return make_leaf();

    const HashtagId feat = candidates[*best];
    node.feature = static_cast<std::int32_t>(feat);
    Partition parts;
    for (std::uint32_t s : members) {
      const auto& fs = *samples_[s].features;
      (std::binary_search(fs.begin(), fs.end(), feat) ? parts.second : parts.first).push_back(s);
    }
    return parts;
  }

  std::span<const TrainingSample> samples_;
  std::size_t n_classes_;
  std::size_t dimension_;
  ForestParams params_;
  Rng rng_;
  std::vector<std::uint32_t> weights_;
  std::vector<std::uint64_t> presence_;
  std::vector<std::int32_t> slot_;
  std::size_t n_candidates_;
};

}  // namespace detail

/// Trains on the posts of `train`. The feature space is the full vocabulary
/// of the underlying corpus; hashtags that never occur in training can never
/// be chosen as splits.
inline RandomForestModel train_forest(const CorpusView& train, const ForestParams& params = {}) {
  if (train.empty()) throw Error("train_forest: empty training set");
  if (params.n_trees == 0) throw Error("train_forest: n_trees must be >= 1");
  const Corpus& corpus = *train.corpus;

  RandomForestModel m;
  m.vocab_dimension = corpus.vocab.size();
  m.seed = params.seed;
  m.n_trees = params.n_trees;
  m.vocab = corpus.vocab;
  m.locations = corpus.locations;

  for (std::size_t i = 0; i < train.size(); ++i) {
    const Post& p = train[i];
    if (!p.location) throw Error("train_forest: training post without location");
    if (p.hashtags.empty()) throw Error("train_forest: training post without hashtags");
    m.classes.push_back(*p.location);
  }
  std::sort(m.classes.begin(), m.classes.end());
  m.classes.erase(std::unique(m.classes.begin(), m.classes.end()), m.classes.end());
  m.degenerate = m.classes.size() == 1;

  std::vector<detail::TrainingSample> samples;
  samples.reserve(train.size());
  for (std::size_t i = 0; i < train.size(); ++i) {
    const Post& p = train[i];
    samples.push_back({&p.hashtags, static_cast<std::uint32_t>(*m.class_index(*p.location)), 1});
  }

  m.trees.resize(params.n_trees);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t t; (t = next.fetch_add(1)) < params.n_trees;) {
      detail::TreeBuilder builder(samples, m.classes.size(), m.vocab_dimension, params, derive_seed(params.seed, t));
      m.trees[t] = builder.build();
    }
  };
  unsigned n_threads = params.threads != 0 ? params.threads : std::max(1u, std::thread::hardware_concurrency());
  n_threads = static_cast<unsigned>(std::min<std::size_t>(n_threads, params.n_trees));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned i = 0; i < n_threads; ++i) pool.emplace_back(worker);
  }
  return m;
}

inline std::vector<std::uint32_t> tree_votes(const RandomForestModel& m, const FeatureVector& f) {
  if (f.dimension != m.vocab_dimension) {
    throw Error("feature dimension " + std::to_string(f.dimension) + " does not match model dimension " +
                std::to_string(m.vocab_dimension));
  }
  std::vector<std::uint32_t> votes(m.classes.size(), 0);
  for (const auto& tree : m.trees) ++votes[tree.vote(f)];
  return votes;
}

inline Posterior predict_posterior(const RandomForestModel& m, const FeatureVector& f) {
  const auto votes = tree_votes(m, f);
  Posterior p;
  p.probs.resize(votes.size());
  const auto n = static_cast<double>(m.trees.size());
  for (std::size_t i = 0; i < votes.size(); ++i) p.probs[i] = static_cast<double>(votes[i]) / n;
  return p;
}

/// Most likely location; ties go to the lowest location id.
inline LocationId predict_top(const RandomForestModel& m, const FeatureVector& f) {
  const auto votes = tree_votes(m, f);
  return m.classes[static_cast<std::size_t>(std::max_element(votes.begin(), votes.end()) - votes.begin())];
}

inline LocationId top_class(const RandomForestModel& m, const Posterior& p) {
  return m.classes[static_cast<std::size_t>(std::max_element(p.probs.begin(), p.probs.end()) - p.probs.begin())];
}

// ---------------------------------------------------------------------------
// Frequency baseline

struct BaselineModel {
  std::map<LocationId, std::size_t> class_frequency;
  LocationId top_class = 0;
};

inline BaselineModel train_baseline(const CorpusView& train) {
  if (train.empty()) throw Error("train_baseline: empty training set");
  BaselineModel b;
  for (std::size_t i = 0; i < train.size(); ++i) {
    const Post& p = train[i];
    if (!p.location) throw Error("train_baseline: training post without location");
    ++b.class_frequency[*p.location];
  }
  std::size_t best = 0;
  for (auto [loc, n] : b.class_frequency) {
    if (n > best) {  // ascending iteration keeps the lowest id on ties
      best = n;
      b.top_class = loc;
    }
  }
  return b;
}

// ---------------------------------------------------------------------------
// Persistence

namespace detail {

inline nlohmann::json tree_to_json(const DecisionTree& t, const std::vector<LocationId>& classes, std::size_t i = 0) {
  const TreeNode& n = t.nodes[i];
  if (n.is_leaf()) {
    nlohmann::json counts = nlohmann::json::object();
    for (auto [c, k] : n.counts) counts[std::to_string(classes[c])] = k;
    return {{"leaf", {{"counts", std::move(counts)}}}};
  }
  return {{"split",
           {{"feature", n.feature},
            {"left", tree_to_json(t, classes, n.absent)},
            {"right", tree_to_json(t, classes, n.present)}}}};
}

inline std::uint32_t tree_from_json(const nlohmann::json& j, const RandomForestModel& m, DecisionTree& t) {
  const auto id = static_cast<std::uint32_t>(t.nodes.size());
  t.nodes.emplace_back();
  if (j.contains("leaf")) {
    TreeNode leaf;
    for (const auto& [key, value] : j.at("leaf").at("counts").items()) {
      const auto c = m.class_index(static_cast<LocationId>(std::stoul(key)));
      if (!c) throw Error("model file: leaf class " + key + " not in class list");
      leaf.counts.push_back({static_cast<std::uint32_t>(*c), value.get<std::uint32_t>()});
    }
    if (leaf.counts.empty()) throw Error("model file: empty leaf");
    std::sort(leaf.counts.begin(), leaf.counts.end());
    leaf.vote = leaf.counts.front().first;
    std::uint32_t best = 0;
    for (auto [c, k] : leaf.counts) {
      if (k > best) {
        best = k;
        leaf.vote = c;
      }
    }
    t.nodes[id] = std::move(leaf);
    return id;
  }
  const auto& s = j.at("split");
  const auto feature = s.at("feature").get<std::int32_t>();
  if (feature < 0 || static_cast<std::size_t>(feature) >= m.vocab_dimension) {
    throw Error("model file: split feature out of range");
  }
  const auto left = tree_from_json(s.at("left"), m, t);
  const auto right = tree_from_json(s.at("right"), m, t);
  t.nodes[id].feature = feature;
  t.nodes[id].absent = left;
  t.nodes[id].present = right;
  return id;
}

inline nlohmann::json location_to_json(const Location& l) {
  return {{"id", l.key},           {"name", l.name},
          {"lat", l.coords.lat},   {"lon", l.coords.lon},
          {"category_l2", l.category_l2}, {"category_l1", l.category_l1}};
}

}  // namespace detail

inline nlohmann::json model_to_json(const RandomForestModel& m) {
  nlohmann::json trees = nlohmann::json::array();
  for (const auto& t : m.trees) trees.push_back(detail::tree_to_json(t, m.classes));
  nlohmann::json locations = nlohmann::json::array();
  for (const auto& l : m.locations) locations.push_back(detail::location_to_json(l));
  return {{"version", RandomForestModel::kFormatVersion},
          {"n_trees", m.n_trees},
          {"vocab_dimension", m.vocab_dimension},
          {"classes", m.classes},
          {"seed", m.seed},
          {"degenerate", m.degenerate},
          {"vocab", m.vocab.texts()},
          {"locations", std::move(locations)},
          {"trees", std::move(trees)}};
}

inline RandomForestModel model_from_json(const nlohmann::json& j) {
  try {
    if (j.at("version").get<int>() != RandomForestModel::kFormatVersion) {
      throw Error("model file: unsupported version " + j.at("version").dump());
    }
    RandomForestModel m;
    m.n_trees = j.at("n_trees").get<std::size_t>();
    m.vocab_dimension = j.at("vocab_dimension").get<std::size_t>();
    m.classes = j.at("classes").get<std::vector<LocationId>>();
    if (!std::is_sorted(m.classes.begin(), m.classes.end())) throw Error("model file: classes not sorted");
    m.seed = j.at("seed").get<std::uint64_t>();
    m.degenerate = j.value("degenerate", m.classes.size() == 1);
    for (const auto& t : j.value("vocab", nlohmann::json::array())) m.vocab.intern(t.get<std::string>());
    for (const auto& l : j.value("locations", nlohmann::json::array())) {
      m.locations.push_back({l.at("id").get<std::string>(), l.value("name", std::string()),
                             {l.at("lat").get<double>(), l.at("lon").get<double>()},
                             l.value("category_l2", std::string()), l.value("category_l1", std::string())});
    }
    for (const auto& t : j.at("trees")) {
      DecisionTree tree;
      detail::tree_from_json(t, m, tree);
      m.trees.push_back(std::move(tree));
    }
    if (m.trees.size() != m.n_trees) throw Error("model file: n_trees does not match tree count");
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("model file: ") + e.what());
  }
}

inline void save_model(const RandomForestModel& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write model file: " + path);
  out << model_to_json(m).dump() << '\n';
}

inline RandomForestModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open model file: " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(std::string("model file: ") + e.what());
  }
  return model_from_json(j);
}

}  // namespace hashloc

#endif  // HASHLOC_FOREST_HPP_
