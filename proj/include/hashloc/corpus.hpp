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
#ifndef HASHLOC_CORPUS_HPP_
#define HASHLOC_CORPUS_HPP_

// Posts, vocabularies and location tables; JSON Lines ingestion; threshold
// filtering; adversary-specific train/test splits.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "json.hpp"

#include "hashloc/rng.hpp"

namespace hashloc {

using HashtagId = std::uint32_t;
using LocationId = std::uint32_t;
using UserId = std::uint32_t;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Maximum number of hashtags the platform accepts on one post.
inline constexpr std::size_t kMaxHashtagsPerPost = 30;

/// Lowercases ASCII letters, strips one leading '#' and drops whitespace
/// (hashtags are non-spaced tokens).
inline std::string normalize_hashtag(std::string_view raw) {
  while (!raw.empty() && std::isspace(static_cast<unsigned char>(raw.front()))) raw.remove_prefix(1);
  if (!raw.empty() && raw.front() == '#') raw.remove_prefix(1);
  std::string out;
  out.reserve(raw.size());
  for (char c : raw) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') continue;
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    out.push_back(c);
  }
  return out;
}

/// Interned string table with dense ids in insertion order.
class Vocabulary {
 public:
  std::uint32_t intern(std::string_view text) {
    auto it = index_.find(std::string(text));
    if (it != index_.end()) return it->second;
    const auto id = static_cast<std::uint32_t>(texts_.size());
    texts_.emplace_back(text);
    index_.emplace(texts_.back(), id);
    return id;
  }

  std::optional<std::uint32_t> find(std::string_view text) const {
    auto it = index_.find(std::string(text));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  const std::string& text(std::uint32_t id) const { return texts_.at(id); }
  std::size_t size() const noexcept { return texts_.size(); }
  bool empty() const noexcept { return texts_.empty(); }
  const std::vector<std::string>& texts() const noexcept { return texts_; }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) { return a.texts_ == b.texts_; }

 private:
  std::vector<std::string> texts_;
  std::unordered_map<std::string, std::uint32_t> index_;
};

struct GeoPoint {
  double lat = 0.0;
  double lon = 0.0;
  friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

inline bool valid_coordinates(const GeoPoint& p) noexcept {
  return std::isfinite(p.lat) && std::isfinite(p.lon) && p.lat >= -90.0 && p.lat <= 90.0 &&
         p.lon >= -180.0 && p.lon <= 180.0;
}

struct Location {
  std::string key;  // external id from the locations file
  std::string name;
  GeoPoint coords;
  std::string category_l2;
  std::string category_l1;
  friend bool operator==(const Location&, const Location&) = default;
};

struct Post {
  UserId user = 0;
  std::optional<LocationId> location;
  std::int64_t time = 0;
  std::vector<HashtagId> hashtags;  // sorted, unique
  friend bool operator==(const Post&, const Post&) = default;
};

/// Multiset of hashtags seen at one location, keyed by hashtag id.
using HashtagCounts = std::map<HashtagId, std::size_t>;

struct Corpus {
  std::vector<Post> posts;
  Vocabulary vocab;
  std::vector<Location> locations;
  Vocabulary users;
  std::vector<HashtagCounts> by_location;

  std::optional<LocationId> find_location(std::string_view key) const {
    for (std::size_t i = 0; i < locations.size(); ++i) {
      if (locations[i].key == key) return static_cast<LocationId>(i);
    }
    return std::nullopt;
  }
};

/// Recomputes the per-location hashtag multiset from the raw posts.
inline std::vector<HashtagCounts> build_location_index(const Corpus& c) {
  std::vector<HashtagCounts> index(c.locations.size());
  for (const Post& p : c.posts) {
    if (!p.location) continue;
    for (HashtagId h : p.hashtags) ++index[*p.location][h];
  }
  return index;
}

// ---------------------------------------------------------------------------
// Ingestion

namespace detail {

template <typename Fn>
void for_each_json_line(std::istream& in, std::string_view what, Fn&& fn) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json record;
    try {
      record = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(std::string(what) + " line " + std::to_string(line_no) + ": " + e.what());
    }
    try {
      fn(record, line_no);
    } catch (const nlohmann::json::exception& e) {
      throw Error(std::string(what) + " line " + std::to_string(line_no) + ": " + e.what());
    }
  }
}

}  // namespace detail

inline std::vector<Location> parse_locations(std::istream& in) {
  std::vector<Location> out;
  std::unordered_map<std::string, std::size_t> seen;
  std::unordered_map<std::string, std::string> l2_parent;
  detail::for_each_json_line(in, "locations", [&](const nlohmann::json& r, std::size_t line) {
    Location loc;
    loc.key = r.at("id").get<std::string>();
    loc.name = r.value("name", loc.key);
    loc.coords = {r.at("lat").get<double>(), r.at("lon").get<double>()};
    loc.category_l2 = r.value("category_l2", std::string());
    loc.category_l1 = r.value("category_l1", std::string());
    const std::string where = "locations line " + std::to_string(line) + " (id \"" + loc.key + "\")";
    if (!valid_coordinates(loc.coords)) throw Error(where + ": coordinate out of range");
    if (!seen.emplace(loc.key, out.size()).second) throw Error(where + ": duplicate location id");
    if (!loc.category_l2.empty()) {
      auto [it, fresh] = l2_parent.emplace(loc.category_l2, loc.category_l1);
      if (!fresh && it->second != loc.category_l1) {
        throw Error(where + ": category_l2 \"" + loc.category_l2 + "\" has two parents");
      }
    }
    out.push_back(std::move(loc));
  });
  return out;
}

/// Parses posts against an already-parsed location table. Hashtag and user
/// ids are assigned in first-appearance order.
inline Corpus parse_corpus(std::istream& posts, std::vector<Location> locations) {
  Corpus c;
  c.locations = std::move(locations);
  std::unordered_map<std::string, LocationId> loc_index;
  for (std::size_t i = 0; i < c.locations.size(); ++i) {
    loc_index.emplace(c.locations[i].key, static_cast<LocationId>(i));
  }
  detail::for_each_json_line(posts, "posts", [&](const nlohmann::json& r, std::size_t line) {
    const std::string where = "posts line " + std::to_string(line);
    Post p;
    p.user = c.users.intern(r.at("user").get<std::string>());
    const auto it_loc = r.find("location");
    if (it_loc != r.end() && !it_loc->is_null()) {
      const auto& loc = *it_loc;
      auto it = loc_index.find(loc.get<std::string>());
      if (it == loc_index.end()) throw Error(where + ": unknown location \"" + loc.get<std::string>() + "\"");
      p.location = it->second;
    }
    p.time = r.value("time", std::int64_t{0});
    for (const auto& h : r.at("hashtags")) {
      const std::string text = normalize_hashtag(h.get<std::string>());
      if (text.empty()) throw Error(where + ": empty hashtag");
      p.hashtags.push_back(c.vocab.intern(text));
    }
    std::sort(p.hashtags.begin(), p.hashtags.end());
    p.hashtags.erase(std::unique(p.hashtags.begin(), p.hashtags.end()), p.hashtags.end());
    if (p.hashtags.size() > kMaxHashtagsPerPost) {
      throw Error(where + ": more than " + std::to_string(kMaxHashtagsPerPost) + " hashtags");
    }
    c.posts.push_back(std::move(p));
  });
  c.by_location = build_location_index(c);
  return c;
}

inline Corpus load_corpus(const std::string& posts_path, const std::string& locations_path) {
  std::ifstream loc_in(locations_path);
  if (!loc_in) throw Error("cannot open locations file: " + locations_path);
  std::ifstream posts_in(posts_path);
  if (!posts_in) throw Error("cannot open posts file: " + posts_path);
  return parse_corpus(posts_in, parse_locations(loc_in));
}

inline void write_locations(std::ostream& out, const Corpus& c) {
  for (const Location& l : c.locations) {
    nlohmann::json r = {{"id", l.key},           {"name", l.name},
                        {"lat", l.coords.lat},   {"lon", l.coords.lon},
                        {"category_l2", l.category_l2}, {"category_l1", l.category_l1}};
    out << r.dump() << '\n';
  }
}

inline void write_posts(std::ostream& out, const Corpus& c) {
  for (const Post& p : c.posts) {
    nlohmann::json tags = nlohmann::json::array();
    for (HashtagId h : p.hashtags) tags.push_back(c.vocab.text(h));
    nlohmann::json r;
    r["user"] = c.users.text(p.user);
    r["location"] = p.location ? nlohmann::json(c.locations[*p.location].key) : nlohmann::json(nullptr);
    r["time"] = p.time;
    r["hashtags"] = std::move(tags);
    out << r.dump() << '\n';
  }
}

// ---------------------------------------------------------------------------
// Filtering

struct FilterThresholds {
  std::size_t min_user_checkins = 20;
  std::size_t min_hashtag_count = 20;
  std::size_t min_location_checkins = 50;
};

/// Removes sparse users, hashtags and locations until no threshold is
/// violated. Posts without a location cannot count as check-ins and are
/// dropped. Surviving ids are re-densified preserving their relative order.
inline Corpus filter_corpus(const Corpus& c, const FilterThresholds& t = {}) {
  if (t.min_user_checkins < 1 || t.min_hashtag_count < 1 || t.min_location_checkins < 1) {
    throw Error("filter thresholds must be >= 1");
  }
  std::vector<Post> live;
  live.reserve(c.posts.size());
  for (const Post& p : c.posts) {
    if (p.location && !p.hashtags.empty()) live.push_back(p);
  }

  for (bool changed = true; changed;) {
    changed = false;
    std::vector<std::size_t> user_n(c.users.size()), loc_n(c.locations.size()), tag_n(c.vocab.size());
    for (const Post& p : live) {
      ++user_n[p.user];
      ++loc_n[*p.location];
      for (HashtagId h : p.hashtags) ++tag_n[h];
    }
    std::vector<Post> next;
    next.reserve(live.size());
    for (Post& p : live) {
      if (user_n[p.user] < t.min_user_checkins || loc_n[*p.location] < t.min_location_checkins) {
        changed = true;
        continue;
      }
      const auto before = p.hashtags.size();
      std::erase_if(p.hashtags, [&](HashtagId h) { return tag_n[h] < t.min_hashtag_count; });
      if (p.hashtags.size() != before) changed = true;
      if (p.hashtags.empty()) continue;
      next.push_back(std::move(p));
    }
    live = std::move(next);
  }

  // Monotone relabeling.
  constexpr auto kGone = UINT32_MAX;
  std::vector<std::uint32_t> user_map(c.users.size(), kGone), loc_map(c.locations.size(), kGone),
      tag_map(c.vocab.size(), kGone);
  for (const Post& p : live) {
    user_map[p.user] = 0;
    loc_map[*p.location] = 0;
    for (HashtagId h : p.hashtags) tag_map[h] = 0;
  }
  Corpus out;
  for (std::uint32_t i = 0; i < user_map.size(); ++i) {
    if (user_map[i] != kGone) user_map[i] = out.users.intern(c.users.text(i));
  }
  for (std::uint32_t i = 0; i < loc_map.size(); ++i) {
    if (loc_map[i] != kGone) {
      loc_map[i] = static_cast<std::uint32_t>(out.locations.size());
      out.locations.push_back(c.locations[i]);
    }
  }
  for (std::uint32_t i = 0; i < tag_map.size(); ++i) {
    if (tag_map[i] != kGone) tag_map[i] = out.vocab.intern(c.vocab.text(i));
  }
  out.posts.reserve(live.size());
  for (Post& p : live) {
    p.user = user_map[p.user];
    p.location = loc_map[*p.location];
    for (HashtagId& h : p.hashtags) h = tag_map[h];  // monotone map keeps the order
    out.posts.push_back(std::move(p));
  }
  out.by_location = build_location_index(out);
  return out;
}

// ---------------------------------------------------------------------------
// Splitting

enum class Adversary { A1, A2 };

inline std::string_view to_string(Adversary a) { return a == Adversary::A1 ? "A1" : "A2"; }

inline Adversary parse_adversary(std::string_view s) {
  if (s == "A1" || s == "a1") return Adversary::A1;
  if (s == "A2" || s == "a2") return Adversary::A2;
  throw Error("unknown adversary: " + std::string(s));
}

struct SplitSpec {
  Adversary adversary = Adversary::A1;
  double train_fraction = 0.8;
  std::uint64_t seed = 0;
  std::size_t repetitions = 10;
};

/// A subset of a corpus' posts, by index. The corpus must outlive the view.
struct CorpusView {
  const Corpus* corpus = nullptr;
  std::vector<std::size_t> posts;

  std::size_t size() const noexcept { return posts.size(); }
  bool empty() const noexcept { return posts.empty(); }
  const Post& operator[](std::size_t i) const { return corpus->posts[posts[i]]; }
};

inline CorpusView full_view(const Corpus& c) {
  CorpusView v{&c, {}};
  v.posts.resize(c.posts.size());
  for (std::size_t i = 0; i < v.posts.size(); ++i) v.posts[i] = i;
  return v;
}

struct Split {
  CorpusView train;
  CorpusView test;
};

inline Split split(const Corpus& c, const SplitSpec& spec, std::size_t repetition) {
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0)) throw Error("train_fraction must be in (0, 1)");
  if (spec.repetitions < 1) throw Error("repetitions must be >= 1");
  if (repetition >= spec.repetitions) throw Error("repetition index out of range");
  for (const Post& p : c.posts) {
    if (!p.location) throw Error("split requires every post to have a location");
  }
  Rng rng(derive_seed(spec.seed, repetition));
  auto take = [&](std::size_t n) {
    auto k = static_cast<std::size_t>(std::llround(spec.train_fraction * static_cast<double>(n)));
    return std::clamp<std::size_t>(k, 1, n - 1);
  };

  std::vector<char> in_train(c.posts.size(), 0);
  if (spec.adversary == Adversary::A1) {
    if (c.posts.size() < 2) throw Error("A1 split needs at least 2 posts");
    std::vector<std::size_t> order(c.posts.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.shuffle(std::span(order));
    const std::size_t k = take(order.size());
    for (std::size_t i = 0; i < k; ++i) in_train[order[i]] = 1;
  } else {
    std::vector<char> active(c.users.size(), 0);
    for (const Post& p : c.posts) active[p.user] = 1;
    std::vector<UserId> users;
    for (UserId u = 0; u < active.size(); ++u) {
      if (active[u]) users.push_back(u);
    }
    if (users.size() < 2) throw Error("A2 split needs at least 2 users");
    rng.shuffle(std::span(users));
    std::vector<char> train_user(c.users.size(), 0);
    const std::size_t k = take(users.size());
    for (std::size_t i = 0; i < k; ++i) train_user[users[i]] = 1;
    for (std::size_t i = 0; i < c.posts.size(); ++i) in_train[i] = train_user[c.posts[i].user];
  }

  Split s{{&c, {}}, {&c, {}}};
  for (std::size_t i = 0; i < c.posts.size(); ++i) (in_train[i] ? s.train : s.test).posts.push_back(i);
  return s;
}

// ---------------------------------------------------------------------------

/// Fraction of posts per hashtag count.
inline std::map<std::size_t, double> hashtag_count_histogram(const Corpus& c) {
  if (c.posts.empty()) throw Error("hashtag_count_histogram: empty corpus");
  std::map<std::size_t, std::size_t> counts;
  for (const Post& p : c.posts) ++counts[p.hashtags.size()];
  std::map<std::size_t, double> out;
  const auto n = static_cast<double>(c.posts.size());
  for (auto [k, v] : counts) out[k] = static_cast<double>(v) / n;
  return out;
}

}  // namespace hashloc

#endif  // HASHLOC_CORPUS_HPP_
