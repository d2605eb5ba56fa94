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
#ifndef HASHLOC_TAXONOMY_HPP_
#define HASHLOC_TAXONOMY_HPP_

#include <algorithm>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"

#include "hashloc/corpus.hpp"

namespace hashloc {

/// One row of the taxonomy file: a generalizable hashtag and the two
/// category levels above it (l2 is the narrower one).
struct TaxonomyEntry {
  std::string hashtag;
  std::string category_l2;
  std::string category_l1;
  friend bool operator==(const TaxonomyEntry&, const TaxonomyEntry&) = default;
};

inline std::vector<TaxonomyEntry> parse_taxonomy(std::istream& in) {
  std::vector<TaxonomyEntry> out;
  detail::for_each_json_line(in, "taxonomy", [&](const nlohmann::json& r, std::size_t) {
    out.push_back({r.at("hashtag").get<std::string>(), r.at("category_l2").get<std::string>(),
                   r.at("category_l1").get<std::string>()});
  });
  return out;
}

inline std::vector<TaxonomyEntry> load_taxonomy(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open taxonomy file: " + path);
  return parse_taxonomy(in);
}

inline void write_taxonomy(std::ostream& out, const std::vector<TaxonomyEntry>& entries) {
  for (const auto& e : entries) {
    out << nlohmann::json{{"hashtag", e.hashtag}, {"category_l2", e.category_l2}, {"category_l1", e.category_l1}}.dump()
        << '\n';
  }
}

/// Partial map from hashtag to its (l2, l1) category tokens. Category tokens
/// live in the same vocabulary as hashtags so a generalized set can be
/// featurized and embedded like any other set.
class CategoryTaxonomy {
 public:
  struct Categories {
    HashtagId l2;
    HashtagId l1;
  };

  CategoryTaxonomy() = default;

  /// Builds the taxonomy against `vocab`, interning category tokens that are
  /// not already present. Rows naming hashtags outside the vocabulary are
  /// skipped.
  static CategoryTaxonomy build(const std::vector<TaxonomyEntry>& entries, Vocabulary& vocab) {
    CategoryTaxonomy tax;
    std::unordered_map<std::string, std::string> parent;
    for (const auto& e : entries) {
      const std::string l2 = normalize_hashtag(e.category_l2);
      const std::string l1 = normalize_hashtag(e.category_l1);
      if (l2.empty() || l1.empty()) throw Error("taxonomy: empty category for hashtag \"" + e.hashtag + "\"");
      auto [it, fresh] = parent.emplace(l2, l1);
      if (!fresh && it->second != l1) throw Error("taxonomy: category \"" + l2 + "\" has two parents");
      const auto h = vocab.find(normalize_hashtag(e.hashtag));
      if (!h) continue;
      const Categories cats{vocab.intern(l2), vocab.intern(l1)};
      tax.map_.insert_or_assign(*h, cats);
      tax.members_[cats.l2].push_back(*h);
      tax.members_[cats.l1].push_back(*h);
    }
    for (auto& [token, hs] : tax.members_) {
      std::sort(hs.begin(), hs.end());
      hs.erase(std::unique(hs.begin(), hs.end()), hs.end());
    }
    return tax;
  }

  std::optional<Categories> find(HashtagId h) const {
    auto it = map_.find(h);
    if (it == map_.end()) return std::nullopt;
    return it->second;
  }

  bool generalizable(HashtagId h) const { return map_.contains(h); }
  std::size_t size() const noexcept { return map_.size(); }
  const std::map<HashtagId, Categories>& entries() const noexcept { return map_; }

  /// Hashtags generalizing to a category token.
  const std::map<HashtagId, std::vector<HashtagId>>& members() const noexcept { return members_; }

 private:
  std::map<HashtagId, Categories> map_;
  std::map<HashtagId, std::vector<HashtagId>> members_;
};

}  // namespace hashloc

#endif  // HASHLOC_TAXONOMY_HPP_
