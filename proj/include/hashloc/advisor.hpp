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
#ifndef HASHLOC_ADVISOR_HPP_
#define HASHLOC_ADVISOR_HPP_

// Picks, per obfuscation mechanism and overall, the candidate hashtag set
// with the least utility loss among those whose privacy level reaches alpha.

#include <chrono>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "hashloc/embedding.hpp"
#include "hashloc/forest.hpp"
#include "hashloc/metrics.hpp"
#include "hashloc/obfuscate.hpp"
#include "hashloc/taxonomy.hpp"

namespace hashloc {

enum class PrivacyMetric { Inaccuracy, Incorrectness, ExpectedDistanceKm };

inline std::string_view to_string(PrivacyMetric m) {
  switch (m) {
    case PrivacyMetric::Inaccuracy: return "inaccuracy";
    case PrivacyMetric::Incorrectness: return "incorrectness";
    case PrivacyMetric::ExpectedDistanceKm: return "expected_distance_km";
  }
  return "?";
}

inline PrivacyMetric parse_privacy_metric(std::string_view s) {
  if (s == "inaccuracy") return PrivacyMetric::Inaccuracy;
  if (s == "incorrectness") return PrivacyMetric::Incorrectness;
  if (s == "expected_distance_km" || s == "expected_distance") return PrivacyMetric::ExpectedDistanceKm;
  throw Error("unknown privacy metric: " + std::string(s));
}

struct AdvisorConfig {
  double alpha = 1.0;
  PrivacyMetric metric = PrivacyMetric::Inaccuracy;
  std::vector<Mechanism> mechanisms = {{MechanismKind::Hiding, kUnbounded, 2},
                                       {MechanismKind::Replacement, kUnbounded, 2},
                                       {MechanismKind::Generalization, kUnbounded, 2}};
  /// Caps the edits of every mechanism.
  std::optional<std::size_t> max_obfuscated;

  void validate() const {
    const bool probability = metric != PrivacyMetric::ExpectedDistanceKm;
    if (!(alpha >= 0.0) || (probability && alpha > 1.0)) {
      throw Error("alpha must lie in [0, 1] for probability metrics and be >= 0 for distances");
    }
    for (const auto& m : mechanisms) {
      if (m.kind == MechanismKind::Replacement && m.neighbors < 1) throw Error("t_s must be >= 1");
    }
  }
};

/// The trained attack model plus what the optimizer needs around it.
/// Category tokens of `taxonomy` must have rows in `embeddings`.
struct AdvisorContext {
  const RandomForestModel& model;
  const EmbeddingTable& embeddings;
  const CategoryTaxonomy& taxonomy;
};

inline double privacy_level(std::span<const HashtagId> candidate, const RandomForestModel& model, LocationId true_loc,
                            PrivacyMetric metric) {
  const auto f = featurize(candidate, model.vocab_dimension);
  switch (metric) {
    case PrivacyMetric::Inaccuracy:
      return 1.0 - accuracy_indicator(predict_top(model, f), true_loc);
    case PrivacyMetric::Incorrectness:
      return incorrectness(predict_posterior(model, f), model, true_loc);
    case PrivacyMetric::ExpectedDistanceKm:
      return expected_distance(predict_posterior(model, f), model, true_loc, model.locations, Distance::Geographic);
  }
  return 0.0;
}

enum class Source { Original, Hiding, Replacement, Generalization };

inline Source source_of(MechanismKind k) {
  switch (k) {
    case MechanismKind::Hiding: return Source::Hiding;
    case MechanismKind::Replacement: return Source::Replacement;
    case MechanismKind::Generalization: return Source::Generalization;
  }
  return Source::Original;
}

inline std::string_view to_string(Source s) {
  switch (s) {
    case Source::Original: return "original";
    case Source::Hiding: return "hiding";
    case Source::Replacement: return "replacement";
    case Source::Generalization: return "generalization";
  }
  return "?";
}

struct Recommendation {
  Source mechanism = Source::Original;
  std::vector<HashtagId> hashtags;
  double privacy_level = 0.0;
  double utility_loss = 0.0;
  std::size_t edits = 0;
  bool satisfiable = false;
  /// False when the mechanism has nothing to act on (no generalizable
  /// hashtag); the original set is attached.
  bool applicable = true;
};

struct Advice {
  double original_privacy = 0.0;
  bool already_private = false;
  /// One entry per enabled mechanism, in configuration order. Empty when the
  /// original set already meets alpha.
  std::vector<Recommendation> per_mechanism;
  Recommendation best;
};

namespace detail {

inline std::size_t effective_bound(const Mechanism& m, const AdvisorConfig& cfg) {
  return cfg.max_obfuscated ? std::min(m.max_edits, *cfg.max_obfuscated) : m.max_edits;
}

template <typename Visit>
void for_each_candidate(std::span<const HashtagId> original, const Mechanism& m, std::size_t bound,
                        const AdvisorContext& ctx, Visit&& visit) {
  switch (m.kind) {
    case MechanismKind::Hiding:
      for_each_hiding(original, bound, visit);
      break;
    case MechanismKind::Replacement:
      for_each_replacement(original, ctx.embeddings, m.neighbors, bound, visit, ctx.model.vocab_dimension);
      break;
    case MechanismKind::Generalization:
      for_each_generalization(original, ctx.taxonomy, bound, visit);
      break;
  }
}

/// Strictly better for the satisfiable argmin: lower loss, then fewer edits.
/// Equal keys keep the earlier one.
inline bool better_satisfying(const Recommendation& a, const Recommendation& b) {
  if (a.utility_loss != b.utility_loss) return a.utility_loss < b.utility_loss;
  return a.edits < b.edits;
}

/// Strictly better when nothing satisfies: higher privacy, then lower loss,
/// then fewer edits.
inline bool better_fallback(const Recommendation& a, const Recommendation& b) {
  if (a.privacy_level != b.privacy_level) return a.privacy_level > b.privacy_level;
  return better_satisfying(a, b);
}

}  // namespace detail

/// Best candidate of one mechanism. The original set is assumed not to meet
/// alpha (its privacy is passed in).
inline Recommendation recommend_mechanism(std::span<const HashtagId> original, LocationId true_loc,
                                          const Mechanism& mech, const AdvisorConfig& cfg, const AdvisorContext& ctx,
                                          double original_privacy) {
  const auto base = detail::sorted_unique(original);
  const auto origin = set_embedding(base, ctx.embeddings);
  std::optional<Recommendation> best_ok, best_any;
  bool any = false;
  detail::for_each_candidate(base, mech, detail::effective_bound(mech, cfg), ctx, [&](const Candidate& c) {
    any = true;
    Recommendation r;
    r.mechanism = source_of(mech.kind);
    r.edits = c.edits;
    r.privacy_level = c.edits == 0 ? original_privacy : privacy_level(c.hashtags, ctx.model, true_loc, cfg.metric);
    r.utility_loss = c.edits == 0 ? 0.0 : euclidean(origin, set_embedding(c.hashtags, ctx.embeddings));
    r.satisfiable = r.privacy_level >= cfg.alpha;
    r.hashtags = c.hashtags;
    if (r.satisfiable && (!best_ok || detail::better_satisfying(r, *best_ok))) best_ok = r;
    if (!best_ok && (!best_any || detail::better_fallback(r, *best_any))) best_any = std::move(r);
  });
  if (best_ok) return *best_ok;
  if (best_any) return *best_any;
  Recommendation r;
  r.mechanism = source_of(mech.kind);
  r.hashtags = base;
  r.privacy_level = original_privacy;
  r.satisfiable = original_privacy >= cfg.alpha;
  r.applicable = any;
  return r;
}

inline Advice recommend(std::span<const HashtagId> hashtags, LocationId true_loc, const AdvisorConfig& cfg,
                        const AdvisorContext& ctx) {
  cfg.validate();
  if (hashtags.empty()) throw Error("recommend: post has no hashtags");
  const auto base = detail::sorted_unique(hashtags);
  Advice a;
  a.original_privacy = privacy_level(base, ctx.model, true_loc, cfg.metric);
  a.already_private = a.original_privacy >= cfg.alpha;
  if (a.already_private) {
    a.best = {Source::Original, base, a.original_privacy, 0.0, 0, true, true};
    return a;
  }
  for (const auto& mech : cfg.mechanisms) {
    a.per_mechanism.push_back(recommend_mechanism(base, true_loc, mech, cfg, ctx, a.original_privacy));
  }
  std::optional<Recommendation> best_ok, best_any;
  for (const auto& r : a.per_mechanism) {
    if (!r.applicable) continue;
    if (r.satisfiable && (!best_ok || detail::better_satisfying(r, *best_ok))) best_ok = r;
    if (!best_any || detail::better_fallback(r, *best_any)) best_any = r;
  }
  if (best_ok) {
    a.best = *best_ok;
  } else if (best_any) {
    a.best = *best_any;
  } else {
    a.best = {Source::Original, base, a.original_privacy, 0.0, 0, false, true};
  }
  if (a.best.edits == 0) a.best.mechanism = Source::Original;
  return a;
}

struct BoundedAdvice {
  std::optional<std::size_t> bound;  // nullopt: unbounded
  Advice advice;
  double seconds = 0.0;
};

/// Runs recommend once per bound on the number of obfuscated hashtags.
inline std::vector<BoundedAdvice> recommend_bounded_profile(std::span<const HashtagId> hashtags, LocationId true_loc,
                                                            const AdvisorConfig& cfg, const AdvisorContext& ctx,
                                                            std::span<const std::optional<std::size_t>> bounds) {
  std::vector<BoundedAdvice> out;
  for (const auto& b : bounds) {
    AdvisorConfig c = cfg;
    c.max_obfuscated = b;
    const auto start = std::chrono::steady_clock::now();
    Advice a = recommend(hashtags, true_loc, c, ctx);
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - start;
    out.push_back({b, std::move(a), dt.count()});
  }
  return out;
}

}  // namespace hashloc

#endif  // HASHLOC_ADVISOR_HPP_
