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
#ifndef HASHLOC_OBFUSCATE_HPP_
#define HASHLOC_OBFUSCATE_HPP_

// Candidate generators for hiding, replacement and generalization.
//
// Every stream starts with the unmodified set (edits = 0) and then walks
// edit counts upward; within one edit count, the edited positions are
// visited in lexicographic order and, for fixed positions, the option
// choices in lexicographic order (first position most significant).
// Positions index the original set in ascending hashtag-id order.

#include <algorithm>
#include <cstdint>
#include <set>
#include <span>
#include <string_view>
#include <vector>

#include "hashloc/corpus.hpp"
#include "hashloc/embedding.hpp"
#include "hashloc/taxonomy.hpp"

namespace hashloc {

enum class MechanismKind { Hiding, Replacement, Generalization };

inline std::string_view to_string(MechanismKind k) {
  switch (k) {
    case MechanismKind::Hiding: return "hiding";
    case MechanismKind::Replacement: return "replacement";
    case MechanismKind::Generalization: return "generalization";
  }
  return "?";
}

inline MechanismKind parse_mechanism(std::string_view s) {
  if (s == "hiding" || s == "H") return MechanismKind::Hiding;
  if (s == "replacement" || s == "R") return MechanismKind::Replacement;
  if (s == "generalization" || s == "G") return MechanismKind::Generalization;
  throw Error("unknown mechanism: " + std::string(s));
}

inline constexpr std::size_t kUnbounded = SIZE_MAX;

struct Mechanism {
  MechanismKind kind = MechanismKind::Hiding;
  /// t_h, t_r or t_g depending on kind.
  std::size_t max_edits = kUnbounded;
  /// t_s: nearest neighbors considered per replaced hashtag.
  std::size_t neighbors = 2;
};

struct Candidate {
  std::vector<HashtagId> hashtags;  // sorted, unique
  MechanismKind mechanism;
  std::size_t edits;
};

namespace detail {

/// Walks assignments over `positions`, where positions[i] has
/// options[i].size() non-keep alternatives. `emit(chosen, option_index)`
/// receives the edited positions and their option indices.
template <typename Emit>
void for_each_edit(std::span<const std::vector<HashtagId>> options, std::size_t max_edits, Emit&& emit) {
  std::vector<std::size_t> editable;
  for (std::size_t i = 0; i < options.size(); ++i) {
    if (!options[i].empty()) editable.push_back(i);
  }
  const std::size_t top = std::min(max_edits, editable.size());
  std::vector<std::size_t> pick, choice;
  for (std::size_t e = 1; e <= top; ++e) {
    // Combinations of e editable positions, lexicographic.
    std::vector<std::size_t> comb(e);
    for (std::size_t i = 0; i < e; ++i) comb[i] = i;
    while (true) {
      pick.resize(e);
      for (std::size_t i = 0; i < e; ++i) pick[i] = editable[comb[i]];
      choice.assign(e, 0);
      while (true) {
        emit(std::span<const std::size_t>(pick), std::span<const std::size_t>(choice));
        std::size_t i = e;
        while (i > 0) {
          --i;
          if (++choice[i] < options[pick[i]].size()) break;
          choice[i] = 0;
          if (i == 0) {
            i = SIZE_MAX;
            break;
          }
        }
        if (i == SIZE_MAX) break;
      }
      std::size_t i = e;
      while (i > 0 && comb[i - 1] == editable.size() - e + (i - 1)) --i;
      if (i == 0) break;
      ++comb[i - 1];
      for (std::size_t j = i; j < e; ++j) comb[j] = comb[j - 1] + 1;
    }
  }
}

inline std::vector<HashtagId> sorted_unique(std::span<const HashtagId> hs) {
  std::vector<HashtagId> v(hs.begin(), hs.end());
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

}  // namespace detail

/// All subsets reachable by removing up to t_h hashtags, the empty set
/// included.
template <typename Visit>
void for_each_hiding(std::span<const HashtagId> original, std::size_t t_h, Visit&& visit) {
  const auto base = detail::sorted_unique(original);
  visit(Candidate{base, MechanismKind::Hiding, 0});
  const std::vector<std::vector<HashtagId>> options(base.size(), std::vector<HashtagId>{0});
  std::vector<char> removed(base.size());
  detail::for_each_edit(options, t_h, [&](std::span<const std::size_t> pos, std::span<const std::size_t>) {
    std::fill(removed.begin(), removed.end(), 0);
    for (std::size_t p : pos) removed[p] = 1;
    Candidate c{{}, MechanismKind::Hiding, pos.size()};
    for (std::size_t i = 0; i < base.size(); ++i) {
      if (!removed[i]) c.hashtags.push_back(base[i]);
    }
    visit(c);
  });
}

/// Replacement options of each original hashtag: its t_s nearest neighbors
/// among ids below `pool`, skipping members of the original set.
inline std::vector<std::vector<HashtagId>> replacement_options(std::span<const HashtagId> original,
                                                               const EmbeddingTable& t, std::size_t t_s,
                                                               std::size_t pool = SIZE_MAX) {
  const auto base = detail::sorted_unique(original);
  pool = std::min(pool, t.size());
  std::vector<std::vector<HashtagId>> options;
  for (HashtagId h : base) {
    if (!t.contains(h)) throw Error("replacement: hashtag id " + std::to_string(h) + " has no embedding");
    const std::size_t others = pool - (h < pool ? 1 : 0);
    const auto near = nearest_neighbors(h, std::min(others, t_s + base.size()), t, pool);
    std::vector<HashtagId> opts;
    for (HashtagId n : near) {
      if (opts.size() == t_s) break;
      if (!std::binary_search(base.begin(), base.end(), n)) opts.push_back(n);
    }
    options.push_back(std::move(opts));
  }
  return options;
}

/// Sets obtained by swapping up to t_r hashtags for one of their t_s nearest
/// neighbors. Assignments where two positions pick the same neighbor are
/// skipped and each resulting set is produced once, so every candidate keeps
/// the original size.
template <typename Visit>
void for_each_replacement(std::span<const HashtagId> original, const EmbeddingTable& t, std::size_t t_s,
                          std::size_t t_r, Visit&& visit, std::size_t pool = SIZE_MAX) {
  if (t_s < 1) throw Error("replacement: t_s must be >= 1");
  const auto base = detail::sorted_unique(original);
  const auto options = replacement_options(base, t, t_s, pool);
  visit(Candidate{base, MechanismKind::Replacement, 0});
  std::set<std::vector<HashtagId>> seen{base};
  std::vector<HashtagId> work;
  detail::for_each_edit(options, t_r, [&](std::span<const std::size_t> pos, std::span<const std::size_t> choice) {
    work = base;
    for (std::size_t i = 0; i < pos.size(); ++i) work[pos[i]] = options[pos[i]][choice[i]];
    std::sort(work.begin(), work.end());
    if (std::adjacent_find(work.begin(), work.end()) != work.end()) return;
    if (!seen.insert(work).second) return;
    // A replacement may land on another original hashtag, so count the
    // hashtags that are new rather than the positions touched.
    std::size_t edits = 0;
    for (HashtagId h : work) edits += std::binary_search(base.begin(), base.end(), h) ? 0 : 1;
    visit(Candidate{work, MechanismKind::Replacement, edits});
  });
}

/// Hashtags of `original` the taxonomy can generalize (H_g).
inline std::vector<HashtagId> generalizable_subset(std::span<const HashtagId> original, const CategoryTaxonomy& tax) {
  std::vector<HashtagId> out;
  for (HashtagId h : detail::sorted_unique(original)) {
    if (tax.generalizable(h)) out.push_back(h);
  }
  return out;
}

/// Sets obtained by lifting up to t_g generalizable hashtags to their l2 or
/// l1 category token. Yields nothing when no hashtag is generalizable. A
/// resulting set already produced earlier in the stream is not repeated.
template <typename Visit>
void for_each_generalization(std::span<const HashtagId> original, const CategoryTaxonomy& tax, std::size_t t_g,
                             Visit&& visit) {
  const auto base = detail::sorted_unique(original);
  std::vector<std::vector<HashtagId>> options(base.size());
  bool any = false;
  for (std::size_t i = 0; i < base.size(); ++i) {
    if (auto cats = tax.find(base[i])) {
      options[i].push_back(cats->l2);
      if (cats->l1 != cats->l2) options[i].push_back(cats->l1);
      any = true;
    }
  }
  if (!any) return;
  visit(Candidate{base, MechanismKind::Generalization, 0});
  std::set<std::vector<HashtagId>> seen{base};
  std::vector<HashtagId> work;
  detail::for_each_edit(options, t_g, [&](std::span<const std::size_t> pos, std::span<const std::size_t> choice) {
    work = base;
    for (std::size_t i = 0; i < pos.size(); ++i) work[pos[i]] = options[pos[i]][choice[i]];
    std::sort(work.begin(), work.end());
    work.erase(std::unique(work.begin(), work.end()), work.end());
    if (!seen.insert(work).second) return;
    visit(Candidate{work, MechanismKind::Generalization, pos.size()});
  });
}

// Collecting wrappers.

inline std::vector<Candidate> enumerate_hiding(std::span<const HashtagId> original, std::size_t t_h = kUnbounded) {
  std::vector<Candidate> out;
  for_each_hiding(original, t_h, [&](const Candidate& c) { out.push_back(c); });
  return out;
}

inline std::vector<Candidate> enumerate_replacement(std::span<const HashtagId> original, const EmbeddingTable& t,
                                                    std::size_t t_s = 2, std::size_t t_r = kUnbounded,
                                                    std::size_t pool = SIZE_MAX) {
  std::vector<Candidate> out;
  for_each_replacement(original, t, t_s, t_r, [&](const Candidate& c) { out.push_back(c); }, pool);
  return out;
}

inline std::vector<Candidate> enumerate_generalization(std::span<const HashtagId> original,
                                                       const CategoryTaxonomy& tax, std::size_t t_g = kUnbounded) {
  std::vector<Candidate> out;
  for_each_generalization(original, tax, t_g, [&](const Candidate& c) { out.push_back(c); });
  return out;
}

}  // namespace hashloc

#endif  // HASHLOC_OBFUSCATE_HPP_
