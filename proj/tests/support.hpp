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
#ifndef HASHLOC_TESTS_SUPPORT_HPP_
#define HASHLOC_TESTS_SUPPORT_HPP_

// Fixtures and brute-force oracles shared by the test binaries. Oracles are
// written against plain containers and do not call the library code they
// check.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "json.hpp"

#include "hashloc/hashloc.hpp"

namespace hashloc::testing {

inline std::string source_path(const std::string& rel) { return std::string(HASHLOC_SOURCE_DIR) + "/" + rel; }

inline SynthConfig load_config(const std::string& name) {
  return nlohmann::json::parse(read_file(source_path("configs/" + name))).get<SynthConfig>();
}

/// Removes the directory on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
    path_ = std::filesystem::temp_directory_path() /
            ("hashloc_test_" + std::to_string(stamp) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string str(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

struct RawPost {
  std::string user;
  std::string location;
  std::vector<std::string> hashtags;
};

inline std::string locations_jsonl(std::size_t n, double spacing_deg = 0.01) {
  std::ostringstream out;
  for (std::size_t i = 0; i < n; ++i) {
    nlohmann::json j = {{"id", "L" + std::to_string(i)},
                        {"name", "Place " + std::to_string(i)},
                        {"lat", 10.0},
                        {"lon", 10.0 + spacing_deg * static_cast<double>(i)},
                        {"category_l2", "c2_" + std::to_string(i % 2)},
                        {"category_l1", "c1"}};
    out << j.dump() << '\n';
  }
  return out.str();
}

inline Corpus make_corpus(const std::vector<RawPost>& posts, std::size_t n_locations) {
  std::istringstream locs(locations_jsonl(n_locations));
  std::ostringstream out;
  std::int64_t t = 1500000000;
  for (const auto& p : posts) {
    nlohmann::json j = {{"user", p.user}, {"location", p.location}, {"time", t++}, {"hashtags", p.hashtags}};
    out << j.dump() << '\n';
  }
  std::istringstream in(out.str());
  return parse_corpus(in, parse_locations(locs));
}

/// A small planted corpus and everything trained on it.
struct Pipeline {
  Corpus corpus;
  Vocabulary vocab;  // corpus vocabulary plus category tokens
  CategoryTaxonomy taxonomy;
  Split split;
  RandomForestModel model;
  EmbeddingTable embeddings;

  AdvisorContext context() const { return {model, embeddings, taxonomy}; }
};

inline std::unique_ptr<Pipeline> build_pipeline(const SynthConfig& cfg, std::size_t n_trees = 100,
                                                std::size_t embedding_dim = 32) {
  auto p = std::make_unique<Pipeline>();
  auto data = generate_synthetic(cfg);
  p->corpus = filter_corpus(data.corpus, {1, 1, 1});
  std::tie(p->vocab, p->taxonomy) = extend_vocabulary(p->corpus.vocab, data.taxonomy);
  p->split = split(p->corpus, SplitSpec{Adversary::A1, 0.8, cfg.seed, 1}, 0);
  ForestParams fp;
  fp.n_trees = n_trees;
  fp.seed = cfg.seed;
  p->model = train_forest(p->split.train, fp);
  EmbeddingParams ep;
  ep.dim = embedding_dim;
  ep.seed = cfg.seed;
  p->embeddings = train_embeddings(p->corpus, ep).table;
  add_category_vectors(p->embeddings, p->taxonomy, p->vocab.size());
  return p;
}

/// Small version of configs/defense.json for unit tests.
inline SynthConfig small_defense_config() {
  SynthConfig c = load_config("defense.json");
  c.n_locations = 12;
  c.posts_per_location = 60;
  c.n_noise_hashtags = 30;
  c.n_users = 30;
  c.n_categories_l1 = 2;
  c.n_categories_l2_per_l1 = 2;
  return c;
}

namespace oracle {

using Set = std::vector<HashtagId>;
using SetFamily = std::set<Set>;

inline Set canonical(Set s) {
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  return s;
}

/// Every subset except the original, by bitmask.
inline SetFamily hiding(const Set& h) {
  SetFamily out;
  const std::size_t n = h.size();
  for (std::uint64_t mask = 0; mask + 1 < (std::uint64_t{1} << n); ++mask) {
    Set s;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (std::uint64_t{1} << i)) s.push_back(h[i]);
    }
    out.insert(canonical(s));
  }
  return out;
}

/// Nearest neighbours by a full scan with sqrt distances; ties to the lower id.
inline std::vector<HashtagId> neighbors(HashtagId h, std::size_t k, const EmbeddingTable& t, std::size_t pool) {
  std::vector<std::pair<double, HashtagId>> all;
  const auto a = t[h];
  for (HashtagId o = 0; o < std::min(pool, t.size()); ++o) {
    if (o == h) continue;
    const auto b = t[o];
    double s = 0.0;
    for (std::size_t d = 0; d < a.size(); ++d) s += (a[d] - b[d]) * (a[d] - b[d]);
    all.emplace_back(std::sqrt(s), o);
  }
  std::sort(all.begin(), all.end());
  std::vector<HashtagId> out;
  for (std::size_t i = 0; i < std::min(k, all.size()); ++i) out.push_back(all[i].second);
  return out;
}

/// Per-position choices {keep, t_s neighbours not in h}; assignments that
/// collapse two positions onto one hashtag are discarded.
inline SetFamily replacement(const Set& h, const EmbeddingTable& t, std::size_t t_s, std::size_t pool) {
  std::vector<std::vector<HashtagId>> choices;
  for (HashtagId x : h) {
    std::vector<HashtagId> c{x};
    for (HashtagId n : neighbors(x, pool, t, pool)) {
      if (c.size() == t_s + 1) break;
      if (std::find(h.begin(), h.end(), n) == h.end()) c.push_back(n);
    }
    choices.push_back(c);
  }
  SetFamily out;
  std::vector<std::size_t> idx(h.size(), 0);
  while (true) {
    Set s;
    for (std::size_t i = 0; i < h.size(); ++i) s.push_back(choices[i][idx[i]]);
    Set c = canonical(s);
    if (c.size() == h.size() && c != canonical(h)) out.insert(c);
    std::size_t i = 0;
    while (i < h.size() && ++idx[i] == choices[i].size()) idx[i++] = 0;
    if (i == h.size()) break;
  }
  return out;
}

/// Per-position choices {keep, l2, l1} from explicit category maps.
inline SetFamily generalization(const Set& h, const std::map<HashtagId, std::pair<HashtagId, HashtagId>>& cats) {
  std::vector<std::vector<HashtagId>> choices;
  bool any = false;
  for (HashtagId x : h) {
    std::vector<HashtagId> c{x};
    if (auto it = cats.find(x); it != cats.end()) {
      c.push_back(it->second.first);
      if (it->second.second != it->second.first) c.push_back(it->second.second);
      any = true;
    }
    choices.push_back(c);
  }
  SetFamily out;
  if (!any) return out;
  std::vector<std::size_t> idx(h.size(), 0);
  while (true) {
    Set s;
    for (std::size_t i = 0; i < h.size(); ++i) s.push_back(choices[i][idx[i]]);
    Set c = canonical(s);
    if (c != canonical(h)) out.insert(c);
    std::size_t i = 0;
    while (i < h.size() && ++idx[i] == choices[i].size()) idx[i++] = 0;
    if (i == h.size()) break;
  }
  return out;
}

inline std::vector<double> mean_vector(const Set& s, const EmbeddingTable& t) {
  std::vector<double> v(t.dim(), 0.0);
  for (HashtagId h : s) {
    for (std::size_t d = 0; d < t.dim(); ++d) v[d] += t[h][d];
  }
  for (double& x : v) x = s.empty() ? 0.0 : x / static_cast<double>(s.size());
  return v;
}

inline double loss(const Set& a, const Set& b, const EmbeddingTable& t) {
  const auto va = mean_vector(a, t), vb = mean_vector(b, t);
  double s = 0.0;
  for (std::size_t d = 0; d < va.size(); ++d) s += (va[d] - vb[d]) * (va[d] - vb[d]);
  return std::sqrt(s);
}

struct Optimum {
  bool found = false;
  Set hashtags;
  double loss = 0.0;
  std::vector<Set> ties;  // every satisfying set at the optimal loss
};

/// Exhaustive minimum-loss candidate with the attacker's top-1 away from the
/// true location (alpha = 1 under inaccuracy).
inline Optimum best_inaccuracy(const Set& h, LocationId true_loc, const RandomForestModel& model,
                               const EmbeddingTable& t, const std::map<HashtagId, std::pair<HashtagId, HashtagId>>& cats,
                               std::size_t t_s) {
  SetFamily all = hiding(h);
  for (const auto& s : replacement(h, t, t_s, model.vocab_dimension)) all.insert(s);
  for (const auto& s : generalization(h, cats)) all.insert(s);
  Optimum best;
  for (const auto& s : all) {
    std::vector<std::uint32_t> votes(model.classes.size(), 0);
    FeatureVector f;
    f.dimension = model.vocab_dimension;
    for (HashtagId x : s) {
      if (x < model.vocab_dimension) f.present.push_back(x);
    }
    const LocationId top = predict_top(model, f);
    if (top == true_loc) continue;
    const double l = loss(h, s, t);
    if (!best.found || l < best.loss - 1e-12) {
      best = {true, s, l, {s}};
    } else if (std::abs(l - best.loss) <= 1e-12) {
      best.ties.push_back(s);
    }
  }
  return best;
}

/// Greatest sub-corpus meeting the thresholds, found by removing one
/// violating user, location or hashtag at a time. Returns each surviving post
/// as (user, location, sorted hashtags) strings.
inline std::multiset<std::tuple<std::string, std::string, std::vector<std::string>>> filter(
    const Corpus& c, const FilterThresholds& th) {
  std::set<std::uint32_t> dead_users, dead_locs, dead_tags;
  auto alive_tags = [&](const Post& p) {
    std::vector<HashtagId> out;
    for (HashtagId h : p.hashtags) {
      if (!dead_tags.contains(h)) out.push_back(h);
    }
    return out;
  };
  auto alive = [&](const Post& p) {
    return p.location && !dead_users.contains(p.user) && !dead_locs.contains(*p.location) && !alive_tags(p).empty();
  };
  while (true) {
    std::map<std::uint32_t, std::size_t> users, locs, tags;
    for (const Post& p : c.posts) {
      if (!alive(p)) continue;
      ++users[p.user];
      ++locs[*p.location];
      for (HashtagId h : alive_tags(p)) ++tags[h];
    }
    bool removed = false;
    for (auto [u, n] : users) {
      if (n < th.min_user_checkins) {
        dead_users.insert(u);
        removed = true;
        break;
      }
    }
    if (!removed) {
      for (auto [l, n] : locs) {
        if (n < th.min_location_checkins) {
          dead_locs.insert(l);
          removed = true;
          break;
        }
      }
    }
    if (!removed) {
      for (auto [h, n] : tags) {
        if (n < th.min_hashtag_count) {
          dead_tags.insert(h);
          removed = true;
          break;
        }
      }
    }
    if (!removed) break;
  }
  std::multiset<std::tuple<std::string, std::string, std::vector<std::string>>> out;
  for (const Post& p : c.posts) {
    if (!alive(p)) continue;
    std::vector<std::string> tags;
    for (HashtagId h : alive_tags(p)) tags.push_back(c.vocab.text(h));
    std::sort(tags.begin(), tags.end());
    out.emplace(c.users.text(p.user), c.locations[*p.location].key, tags);
  }
  return out;
}

}  // namespace oracle

inline std::multiset<std::tuple<std::string, std::string, std::vector<std::string>>> post_strings(const Corpus& c) {
  std::multiset<std::tuple<std::string, std::string, std::vector<std::string>>> out;
  for (const Post& p : c.posts) {
    std::vector<std::string> tags;
    for (HashtagId h : p.hashtags) tags.push_back(c.vocab.text(h));
    std::sort(tags.begin(), tags.end());
    out.emplace(c.users.text(p.user), p.location ? c.locations[*p.location].key : "", tags);
  }
  return out;
}

inline std::map<HashtagId, std::pair<HashtagId, HashtagId>> category_map(const CategoryTaxonomy& tax) {
  std::map<HashtagId, std::pair<HashtagId, HashtagId>> out;
  for (const auto& [h, c] : tax.entries()) out[h] = {c.l2, c.l1};
  return out;
}


/// Compares recommend() at alpha = 1 / inaccuracy, t_s = 2, unbounded edits
/// with the exhaustive optimum. Returns an empty string on agreement. Sets
/// differing at exactly equal loss count as agreement.
inline std::string optimizer_mismatch(std::span<const HashtagId> hashtags, LocationId true_loc,
                                      const AdvisorContext& ctx) {
  AdvisorConfig cfg;
  cfg.alpha = 1.0;
  cfg.metric = PrivacyMetric::Inaccuracy;
  for (auto& m : cfg.mechanisms) m.neighbors = 2;
  const Advice a = recommend(hashtags, true_loc, cfg, ctx);
  const oracle::Set h(hashtags.begin(), hashtags.end());
  if (a.already_private) {
    return predict_top(ctx.model, featurize(hashtags, ctx.model.vocab_dimension)) == true_loc
               ? "reported private but the attack is correct"
               : "";
  }
  const auto want = oracle::best_inaccuracy(oracle::canonical(h), true_loc, ctx.model, ctx.embeddings,
                                            category_map(ctx.taxonomy), 2);
  std::ostringstream why;
  if (!want.found) {
    if (a.best.satisfiable) why << "advisor found a set the oracle did not";
    return why.str();
  }
  if (!a.best.satisfiable) return "advisor found nothing, oracle loss " + std::to_string(want.loss);
  if (std::abs(a.best.utility_loss - want.loss) > 1e-9) {
    why << "loss " << a.best.utility_loss << " vs oracle " << want.loss;
    return why.str();
  }
  if (std::find(want.ties.begin(), want.ties.end(), a.best.hashtags) == want.ties.end()) {
    return "different set at equal loss that is not an exact tie";
  }
  return "";
}

}  // namespace hashloc::testing

#endif  // HASHLOC_TESTS_SUPPORT_HPP_
