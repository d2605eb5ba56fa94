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
#ifndef HASHLOC_METRICS_HPP_
#define HASHLOC_METRICS_HPP_

#include <cmath>
#include <map>
#include <numbers>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "hashloc/corpus.hpp"
#include "hashloc/forest.hpp"

namespace hashloc {

inline constexpr double kEarthRadiusKm = 6371.0;

/// Great-circle distance on a sphere of radius kEarthRadiusKm.
inline double haversine_km(const GeoPoint& a, const GeoPoint& b) {
  constexpr double rad = std::numbers::pi / 180.0;
  const double dlat = (b.lat - a.lat) * rad;
  const double dlon = (b.lon - a.lon) * rad;
  const double s = std::sin(dlat / 2);
  const double t = std::sin(dlon / 2);
  const double h = s * s + std::cos(a.lat * rad) * std::cos(b.lat * rad) * t * t;
  return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(h)));
}

enum class Distance { Geographic, Binary };

/// d(l, true) between two location ids. A location is at distance 0 from
/// itself regardless of the stored coordinates.
inline double location_distance(LocationId a, LocationId b, const std::vector<Location>& locs, Distance d) {
  if (a == b) return 0.0;
  if (d == Distance::Binary) return 1.0;
  return haversine_km(locs.at(a).coords, locs.at(b).coords);
}

/// Expected estimation error: sum over classes of p(l) * d(l, true).
inline double expected_distance(const Posterior& post, const RandomForestModel& m, LocationId true_loc,
                                const std::vector<Location>& locs, Distance d) {
  if (true_loc >= locs.size()) throw Error("expected_distance: unknown true location");
  if (post.probs.size() != m.classes.size()) throw Error("expected_distance: posterior/model size mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < post.probs.size(); ++i) {
    if (post.probs[i] == 0.0) continue;
    sum += post.probs[i] * location_distance(m.classes[i], true_loc, locs, d);
  }
  return sum;
}

/// Probability mass on the true location; 0 when the model never saw it.
inline double correctness(const Posterior& post, const RandomForestModel& m, LocationId true_loc) {
  const auto c = m.class_index(true_loc);
  return c ? post.probs.at(*c) : 0.0;
}

inline double incorrectness(const Posterior& post, const RandomForestModel& m, LocationId true_loc) {
  return 1.0 - correctness(post, m, true_loc);
}

inline int accuracy_indicator(LocationId predicted, LocationId true_loc) { return predicted == true_loc ? 1 : 0; }

// ---------------------------------------------------------------------------
// Reports

struct CountStats {
  double accuracy = 0.0;
  double correctness = 0.0;
  std::size_t n = 0;
};

struct PerformanceReport {
  double correctness = 0.0;
  double expected_distance_km = 0.0;
  double accuracy = 0.0;
  std::size_t n_test = 0;
  std::map<std::size_t, CountStats> per_hashtag_count;
};

struct PostScore {
  double correctness;
  double expected_distance_km;
  int accurate;
  std::size_t hashtag_count;
};

inline PerformanceReport summarize(const std::vector<PostScore>& scores) {
  PerformanceReport r;
  r.n_test = scores.size();
  for (const auto& s : scores) {
    r.correctness += s.correctness;
    r.expected_distance_km += s.expected_distance_km;
    r.accuracy += s.accurate;
    auto& g = r.per_hashtag_count[s.hashtag_count];
    g.correctness += s.correctness;
    g.accuracy += s.accurate;
    ++g.n;
  }
  if (r.n_test == 0) return r;
  const auto n = static_cast<double>(r.n_test);
  r.correctness /= n;
  r.expected_distance_km /= n;
  r.accuracy /= n;
  for (auto& [k, g] : r.per_hashtag_count) {
    g.correctness /= static_cast<double>(g.n);
    g.accuracy /= static_cast<double>(g.n);
  }
  return r;
}

/// Forest attack performance on the test posts, overall and grouped by the
/// number of hashtags on each post.
inline PerformanceReport evaluate(const RandomForestModel& m, const CorpusView& test) {
  if (test.empty()) throw Error("evaluate: empty test set");
  const auto& locs = test.corpus->locations;
  std::vector<PostScore> scores;
  scores.reserve(test.size());
  for (std::size_t i = 0; i < test.size(); ++i) {
    const Post& p = test[i];
    if (!p.location) throw Error("evaluate: test post without location");
    const auto f = featurize(p, m.vocab_dimension);
    const auto post = predict_posterior(m, f);
    scores.push_back({correctness(post, m, *p.location), expected_distance(post, m, *p.location, locs, Distance::Geographic),
                      accuracy_indicator(top_class(m, post), *p.location), p.hashtags.size()});
  }
  return summarize(scores);
}

/// Baseline performance: a one-hot posterior on the most frequent training
/// location.
inline PerformanceReport evaluate(const BaselineModel& b, const CorpusView& test) {
  if (test.empty()) throw Error("evaluate: empty test set");
  const auto& locs = test.corpus->locations;
  std::vector<PostScore> scores;
  scores.reserve(test.size());
  for (std::size_t i = 0; i < test.size(); ++i) {
    const Post& p = test[i];
    if (!p.location) throw Error("evaluate: test post without location");
    const int hit = accuracy_indicator(b.top_class, *p.location);
    scores.push_back({static_cast<double>(hit), location_distance(b.top_class, *p.location, locs, Distance::Geographic),
                      hit, p.hashtags.size()});
  }
  return summarize(scores);
}

/// Field-wise mean of several reports (used across split repetitions).
/// Per-count groups are averaged over the repetitions in which they occur.
inline PerformanceReport average_reports(const std::vector<PerformanceReport>& reports) {
  PerformanceReport out;
  if (reports.empty()) return out;
  std::map<std::size_t, std::size_t> seen;
  for (const auto& r : reports) {
    out.correctness += r.correctness;
    out.expected_distance_km += r.expected_distance_km;
    out.accuracy += r.accuracy;
    out.n_test += r.n_test;
    for (const auto& [k, g] : r.per_hashtag_count) {
      auto& o = out.per_hashtag_count[k];
      o.accuracy += g.accuracy;
      o.correctness += g.correctness;
      o.n += g.n;
      ++seen[k];
    }
  }
  const auto n = static_cast<double>(reports.size());
  out.correctness /= n;
  out.expected_distance_km /= n;
  out.accuracy /= n;
  out.n_test = static_cast<std::size_t>(std::llround(static_cast<double>(out.n_test) / n));
  for (auto& [k, g] : out.per_hashtag_count) {
    g.accuracy /= static_cast<double>(seen[k]);
    g.correctness /= static_cast<double>(seen[k]);
    g.n = static_cast<std::size_t>(std::llround(static_cast<double>(g.n) / static_cast<double>(seen[k])));
  }
  return out;
}

inline nlohmann::json to_json(const PerformanceReport& r) {
  nlohmann::json groups = nlohmann::json::array();
  for (const auto& [k, g] : r.per_hashtag_count) {
    groups.push_back({{"hashtag_count", k}, {"accuracy", g.accuracy}, {"correctness", g.correctness}, {"n", g.n}});
  }
  return {{"correctness", r.correctness},
          {"expected_distance_km", r.expected_distance_km},
          {"accuracy", r.accuracy},
          {"n_test", r.n_test},
          {"per_hashtag_count", std::move(groups)}};
}

/// Curve data: one row per hashtag count.
inline void write_count_csv(std::ostream& out, const PerformanceReport& r) {
  out << "hashtag_count,n,accuracy,correctness\n";
  for (const auto& [k, g] : r.per_hashtag_count) {
    out << k << ',' << g.n << ',' << nlohmann::json(g.accuracy).dump() << ',' << nlohmann::json(g.correctness).dump()
        << '\n';
  }
}

}  // namespace hashloc

#endif  // HASHLOC_METRICS_HPP_
