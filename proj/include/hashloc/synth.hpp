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
#ifndef HASHLOC_SYNTH_HPP_
#define HASHLOC_SYNTH_HPP_

// Seeded generator of check-in corpora with planted hashtag-location
// associations.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "hashloc/corpus.hpp"
#include "hashloc/rng.hpp"
#include "hashloc/taxonomy.hpp"

namespace hashloc {

struct SynthConfig {
  std::size_t n_locations = 50;
  std::size_t signature_hashtags_per_location = 5;
  std::size_t n_noise_hashtags = 100;
  std::size_t posts_per_location = 200;
  std::size_t hashtags_per_post = 5;
  /// When > hashtags_per_post, each post's size is uniform in
  /// [hashtags_per_post, hashtags_per_post_max].
  std::size_t hashtags_per_post_max = 0;
  double signature_rate = 0.9;
  std::size_t n_users = 100;
  std::uint64_t seed = 1;

  /// Idiosyncratic hashtags owned by each user. A non-signature slot draws
  /// from the poster's own pool with probability user_hashtag_rate.
  std::size_t user_hashtags_per_user = 0;
  double user_hashtag_rate = 0.0;
  /// If > 0, every user frequents this many locations and only posts there.
  std::size_t locations_per_user = 0;

  /// Hashtags shared by all locations of one l2 category. A non-signature
  /// slot draws from the location's category pool with probability
  /// category_hashtag_rate.
  std::size_t category_hashtags = 0;
  double category_hashtag_rate = 0.0;

  std::size_t n_categories_l1 = 3;
  std::size_t n_categories_l2_per_l1 = 3;
  /// Leading signature hashtags of every location that receive a taxonomy row.
  std::size_t generalizable_per_location = 1;
  /// Upper bound on planted vocabulary size; 0 disables the check.
  std::size_t max_vocabulary = 0;
};

inline void to_json(nlohmann::json& j, const SynthConfig& c) {
  j = {{"n_locations", c.n_locations},
       {"signature_hashtags_per_location", c.signature_hashtags_per_location},
       {"n_noise_hashtags", c.n_noise_hashtags},
       {"posts_per_location", c.posts_per_location},
       {"hashtags_per_post", c.hashtags_per_post},
       {"hashtags_per_post_max", c.hashtags_per_post_max},
       {"signature_rate", c.signature_rate},
       {"n_users", c.n_users},
       {"seed", c.seed},
       {"user_hashtags_per_user", c.user_hashtags_per_user},
       {"user_hashtag_rate", c.user_hashtag_rate},
       {"locations_per_user", c.locations_per_user},
       {"category_hashtags", c.category_hashtags},
       {"category_hashtag_rate", c.category_hashtag_rate},
       {"n_categories_l1", c.n_categories_l1},
       {"n_categories_l2_per_l1", c.n_categories_l2_per_l1},
       {"generalizable_per_location", c.generalizable_per_location},
       {"max_vocabulary", c.max_vocabulary}};
}

/// Missing keys keep their defaults; unknown keys are rejected.
inline void from_json(const nlohmann::json& j, SynthConfig& c) {
  nlohmann::json defaults = c;
  for (const auto& [key, value] : j.items()) {
    if (!defaults.contains(key)) throw Error("synthetic config: unknown field \"" + key + "\"");
  }
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) j.at(key).get_to(field);
  };
  get("n_locations", c.n_locations);
  get("signature_hashtags_per_location", c.signature_hashtags_per_location);
  get("n_noise_hashtags", c.n_noise_hashtags);
  get("posts_per_location", c.posts_per_location);
  get("hashtags_per_post", c.hashtags_per_post);
  get("hashtags_per_post_max", c.hashtags_per_post_max);
  get("signature_rate", c.signature_rate);
  get("n_users", c.n_users);
  get("seed", c.seed);
  get("user_hashtags_per_user", c.user_hashtags_per_user);
  get("user_hashtag_rate", c.user_hashtag_rate);
  get("locations_per_user", c.locations_per_user);
  get("category_hashtags", c.category_hashtags);
  get("category_hashtag_rate", c.category_hashtag_rate);
  get("n_categories_l1", c.n_categories_l1);
  get("n_categories_l2_per_l1", c.n_categories_l2_per_l1);
  get("generalizable_per_location", c.generalizable_per_location);
  get("max_vocabulary", c.max_vocabulary);
}

struct SyntheticData {
  Corpus corpus;
  std::vector<TaxonomyEntry> taxonomy;
};

namespace detail {

inline void validate(const SynthConfig& c) {
  auto rate_ok = [](double r) { return r >= 0.0 && r <= 1.0; };
  if (c.n_locations == 0) throw Error("synthetic config: n_locations must be >= 1");
  if (c.n_users == 0) throw Error("synthetic config: n_users must be >= 1");
  if (c.hashtags_per_post == 0) throw Error("synthetic config: hashtags_per_post must be >= 1");
  if (!rate_ok(c.signature_rate) || !rate_ok(c.user_hashtag_rate) || !rate_ok(c.category_hashtag_rate)) {
    throw Error("synthetic config: rates must lie in [0, 1]");
  }
  if (c.user_hashtag_rate + c.category_hashtag_rate > 1.0) {
    throw Error("synthetic config: user_hashtag_rate + category_hashtag_rate exceeds 1");
  }
  if (c.n_categories_l1 == 0 || c.n_categories_l2_per_l1 == 0) {
    throw Error("synthetic config: taxonomy needs at least one category per level");
  }
  if (c.generalizable_per_location > c.signature_hashtags_per_location) {
    throw Error("synthetic config: generalizable_per_location exceeds signature hashtags");
  }
  const std::size_t planted = c.n_locations * c.signature_hashtags_per_location + c.n_noise_hashtags +
                              c.n_users * c.user_hashtags_per_user +
                              c.n_categories_l1 * c.n_categories_l2_per_l1 * c.category_hashtags;
  if (c.max_vocabulary != 0 && planted > c.max_vocabulary) {
    throw Error("synthetic config: signature pools (" + std::to_string(planted) +
                " hashtags) exceed requested vocabulary of " + std::to_string(c.max_vocabulary));
  }
  const std::size_t largest = std::max(c.hashtags_per_post, c.hashtags_per_post_max);
  if (largest > kMaxHashtagsPerPost) throw Error("synthetic config: hashtags_per_post above platform cap");
  // A post is only guaranteed its own signatures plus the shared noise pool.
  if (largest > c.signature_hashtags_per_location + c.n_noise_hashtags) {
    throw Error("synthetic config: hashtags_per_post exceeds signature + noise hashtags available");
  }
}

}  // namespace detail

/// Locations sit on a square grid with 1 km spacing; l2 categories are
/// assigned round-robin and each l2 belongs to exactly one l1.
inline SyntheticData generate_synthetic(const SynthConfig& cfg) {
  detail::validate(cfg);
  Rng rng(cfg.seed);

  const std::size_t n_l2 = cfg.n_categories_l1 * cfg.n_categories_l2_per_l1;
  auto l2_of = [&](std::size_t loc) { return loc % n_l2; };
  auto l1_of_l2 = [&](std::size_t l2) { return l2 / cfg.n_categories_l2_per_l1; };

  Corpus shell;
  constexpr double kOriginLat = 40.0;
  constexpr double kOriginLon = -74.0;
  const double km_deg = 180.0 / (std::numbers::pi * 6371.0);
  const auto side = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(cfg.n_locations))));
  for (std::size_t l = 0; l < cfg.n_locations; ++l) {
    const double row = static_cast<double>(l / side);
    const double col = static_cast<double>(l % side);
    const double lat = kOriginLat + row * km_deg;
    const double lon = kOriginLon + col * km_deg / std::cos(kOriginLat * std::numbers::pi / 180.0);
    const std::size_t l2 = l2_of(l);
    shell.locations.push_back({"L" + std::to_string(l), "Synthetic place " + std::to_string(l), {lat, lon},
                               "l2_" + std::to_string(l2), "l1_" + std::to_string(l1_of_l2(l2))});
  }

  // User home locations.
  std::vector<std::vector<std::size_t>> visitors(cfg.n_locations);
  if (cfg.locations_per_user > 0) {
    std::vector<std::size_t> perm(cfg.n_locations);
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    rng.shuffle(std::span(perm));
    for (std::size_t u = 0; u < cfg.n_users; ++u) {
      for (std::size_t j = 0; j < cfg.locations_per_user; ++j) {
        auto& v = visitors[perm[(u * cfg.locations_per_user + j) % cfg.n_locations]];
        if (v.empty() || v.back() != u) v.push_back(u);
      }
    }
  }

  auto sig = [](std::size_t l, std::size_t j) { return "loc" + std::to_string(l) + "_s" + std::to_string(j); };
  auto noise = [](std::size_t j) { return "noise" + std::to_string(j); };
  auto own = [](std::size_t u, std::size_t j) { return "user" + std::to_string(u) + "_t" + std::to_string(j); };
  auto cat = [](std::size_t c, std::size_t j) { return "cat" + std::to_string(c) + "_t" + std::to_string(j); };

  constexpr std::int64_t kStart = 1435708800;  // 2015-07-01T00:00:00Z
  constexpr std::uint64_t kSpan = 184ULL * 24 * 3600;

  std::ostringstream posts;
  std::vector<std::string> chosen;
  for (std::size_t l = 0; l < cfg.n_locations; ++l) {
    for (std::size_t i = 0; i < cfg.posts_per_location; ++i) {
      const std::size_t user = visitors[l].empty() ? rng.uniform_index(cfg.n_users)
                                                   : visitors[l][rng.uniform_index(visitors[l].size())];
      std::size_t k = cfg.hashtags_per_post;
      if (cfg.hashtags_per_post_max > cfg.hashtags_per_post) {
        k += rng.uniform_index(cfg.hashtags_per_post_max - cfg.hashtags_per_post + 1);
      }
      chosen.clear();
      // Draws an unused member of a pool, or returns false if exhausted.
      auto draw = [&](std::size_t pool_size, auto&& name) {
        if (pool_size == 0) return false;
        std::vector<std::string> free;
        for (std::size_t j = 0; j < pool_size; ++j) {
          std::string t = name(j);
          if (std::find(chosen.begin(), chosen.end(), t) == chosen.end()) free.push_back(std::move(t));
        }
        if (free.empty()) return false;
        chosen.push_back(std::move(free[rng.uniform_index(free.size())]));
        return true;
      };
      auto draw_sig = [&] { return draw(cfg.signature_hashtags_per_location, [&](std::size_t j) { return sig(l, j); }); };
      auto draw_noise = [&] { return draw(cfg.n_noise_hashtags, noise); };
      auto draw_user = [&] { return draw(cfg.user_hashtags_per_user, [&](std::size_t j) { return own(user, j); }); };
      auto draw_cat = [&] { return draw(cfg.category_hashtags, [&](std::size_t j) { return cat(l2_of(l), j); }); };
      while (chosen.size() < k) {
        bool ok;
        if (rng.bernoulli(cfg.signature_rate)) {
          ok = draw_sig();
        } else {
          const double r = rng.uniform();
          if (r < cfg.user_hashtag_rate) {
            ok = draw_user();
          } else if (r < cfg.user_hashtag_rate + cfg.category_hashtag_rate) {
            ok = draw_cat();
          } else {
            ok = draw_noise();
          }
        }
        if (!ok) ok = draw_noise() || draw_sig() || draw_cat() || draw_user();
        if (!ok) throw Error("synthetic config: hashtag pools exhausted");
      }
      nlohmann::json r;
      r["user"] = "u" + std::to_string(user);
      r["location"] = shell.locations[l].key;
      r["time"] = kStart + static_cast<std::int64_t>(rng.uniform_index(kSpan));
      r["hashtags"] = chosen;
      posts << r.dump() << '\n';
    }
  }

  SyntheticData out;
  std::istringstream in(posts.str());
  out.corpus = parse_corpus(in, std::move(shell.locations));
  for (std::size_t l = 0; l < cfg.n_locations; ++l) {
    const std::size_t l2 = l2_of(l);
    for (std::size_t j = 0; j < cfg.generalizable_per_location; ++j) {
      out.taxonomy.push_back({sig(l, j), "l2_" + std::to_string(l2), "l1_" + std::to_string(l1_of_l2(l2))});
    }
  }
  return out;
}

}  // namespace hashloc

#endif  // HASHLOC_SYNTH_HPP_
