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
#ifndef HASHLOC_EMBEDDING_HPP_
#define HASHLOC_EMBEDDING_HPP_

// Hashtag vectors trained with skip-gram + negative sampling, where the
// context of a hashtag is every other hashtag of the same post. Set
// embeddings are member means; utility loss is their Euclidean distance.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "hashloc/corpus.hpp"
#include "hashloc/rng.hpp"
#include "hashloc/taxonomy.hpp"

namespace hashloc {

class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  EmbeddingTable(std::size_t count, std::size_t dim) : dim_(dim), data_(count * dim, 0.0) {}

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return dim_ == 0 ? 0 : data_.size() / dim_; }
  bool contains(HashtagId h) const noexcept { return h < size(); }

  std::span<const double> operator[](HashtagId h) const { return {data_.data() + std::size_t{h} * dim_, dim_}; }
  std::span<double> operator[](HashtagId h) { return {data_.data() + std::size_t{h} * dim_, dim_}; }

  void resize(std::size_t count) { data_.resize(count * dim_, 0.0); }

  friend bool operator==(const EmbeddingTable&, const EmbeddingTable&) = default;

 private:
  std::size_t dim_ = 0;
  std::vector<double> data_;
};

struct EmbeddingParams {
  std::size_t dim = 100;
  std::size_t epochs = 5;
  std::size_t negative_samples = 5;
  double learning_rate = 0.025;
  std::uint64_t seed = 1;
};

struct EmbeddingTraining {
  EmbeddingTable table;
  /// Hashtags that never share a post with another hashtag; they keep their
  /// initialization vectors.
  std::vector<HashtagId> isolated;
};

inline EmbeddingTraining train_embeddings(const Corpus& c, const EmbeddingParams& params = {}) {
  if (c.posts.empty()) throw Error("train_embeddings: empty corpus");
  if (params.dim == 0) throw Error("train_embeddings: dim must be >= 1");
  const std::size_t n = c.vocab.size();
  const std::size_t dim = params.dim;

  std::vector<std::uint64_t> freq(n, 0);
  std::vector<char> has_context(n, 0);
  std::uint64_t total_pairs = 0;
  for (const Post& p : c.posts) {
    for (HashtagId h : p.hashtags) {
      ++freq[h];
      if (p.hashtags.size() > 1) has_context[h] = 1;
    }
    total_pairs += p.hashtags.size() * (p.hashtags.size() - (p.hashtags.empty() ? 0 : 1));
  }

  // Negative sampling distribution: unigram^0.75, drawn by inverse CDF.
  std::vector<double> cdf(n);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    acc += std::pow(static_cast<double>(freq[i]), 0.75);
    cdf[i] = acc;
  }

  Rng rng(params.seed);
  EmbeddingTable in(n, dim);
  std::vector<double> out(n * dim, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (double& x : in[static_cast<HashtagId>(i)]) x = (rng.uniform() - 0.5) / static_cast<double>(dim);
  }

  auto sample_negative = [&]() -> HashtagId {
    const double u = rng.uniform() * acc;
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    return static_cast<HashtagId>(std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), n - 1));
  };

  std::vector<double> grad(dim);
  const double steps = static_cast<double>(std::max<std::uint64_t>(1, total_pairs * params.epochs));
  std::uint64_t done = 0;
  for (std::size_t epoch = 0; epoch < params.epochs; ++epoch) {
    for (const Post& p : c.posts) {
      for (HashtagId target : p.hashtags) {
        for (HashtagId context : p.hashtags) {
          if (context == target) continue;
          const double lr =
              params.learning_rate * std::max(1e-4, 1.0 - static_cast<double>(done++) / steps);
          auto v = in[target];
          std::fill(grad.begin(), grad.end(), 0.0);
          for (std::size_t d = 0; d <= params.negative_samples; ++d) {
            HashtagId other = context;
            double label = 1.0;
            if (d > 0) {
              other = sample_negative();
              if (other == context) continue;
              label = 0.0;
            }
            double* w = &out[std::size_t{other} * dim];
            const double f = std::inner_product(v.begin(), v.end(), w, 0.0);
            const double g = (label - 1.0 / (1.0 + std::exp(-f))) * lr;
            for (std::size_t k = 0; k < dim; ++k) {
              grad[k] += g * w[k];
              w[k] += g * v[k];
            }
          }
          for (std::size_t k = 0; k < dim; ++k) v[k] += grad[k];
        }
      }
    }
  }

  EmbeddingTraining result{std::move(in), {}};
  for (std::size_t i = 0; i < n; ++i) {
    if (!has_context[i]) result.isolated.push_back(static_cast<HashtagId>(i));
  }
  return result;
}

/// Grows the table to `vocab_size` rows. Each category token without a
/// trained vector gets the centroid of the hashtags generalizing to it.
inline void add_category_vectors(EmbeddingTable& t, const CategoryTaxonomy& tax, std::size_t vocab_size) {
  const std::size_t trained = t.size();
  if (vocab_size > trained) t.resize(vocab_size);
  for (const auto& [token, members] : tax.members()) {
    if (token < trained) continue;
    auto dst = t[token];
    std::size_t n = 0;
    for (HashtagId h : members) {
      if (h >= trained) continue;
      auto src = t[h];
      for (std::size_t k = 0; k < t.dim(); ++k) dst[k] += src[k];
      ++n;
    }
    if (n > 0) {
      for (double& x : dst) x /= static_cast<double>(n);
    }
  }
}

// ---------------------------------------------------------------------------
// Text format: "<count> <dim>" then "<hashtag> v1 ... v_dim" per line.

inline void write_embeddings(std::ostream& out, const EmbeddingTable& t, const Vocabulary& vocab) {
  out << t.size() << ' ' << t.dim() << '\n';
  char buf[64];
  for (std::size_t i = 0; i < t.size(); ++i) {
    out << vocab.text(static_cast<std::uint32_t>(i));
    for (double x : t[static_cast<HashtagId>(i)]) {
      auto res = std::to_chars(buf, buf + sizeof buf, x);
      out << ' ' << std::string_view(buf, static_cast<std::size_t>(res.ptr - buf));
    }
    out << '\n';
  }
}

/// Every vocabulary entry must receive exactly one row.
inline EmbeddingTable parse_embeddings(std::istream& in, const Vocabulary& vocab) {
  std::string line;
  if (!std::getline(in, line)) throw Error("embeddings: missing header");
  std::size_t count = 0, dim = 0;
  {
    std::istringstream hdr(line);
    if (!(hdr >> count >> dim) || dim == 0) throw Error("embeddings: malformed header \"" + line + "\"");
  }
  EmbeddingTable t(vocab.size(), dim);
  std::vector<char> filled(vocab.size(), 0);
  std::size_t rows = 0;
  for (std::size_t line_no = 2; std::getline(in, line); ++line_no) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream row(line);
    std::string text;
    row >> text;
    const auto id = vocab.find(text);
    const std::string where = "embeddings line " + std::to_string(line_no);
    if (!id) throw Error(where + ": unknown hashtag \"" + text + "\"");
    if (filled[*id]) throw Error(where + ": duplicate hashtag \"" + text + "\"");
    std::vector<double> values;
    for (std::string tok; row >> tok;) {
      double x = 0.0;
      auto res = std::from_chars(tok.data(), tok.data() + tok.size(), x);
      if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size() || !std::isfinite(x)) {
        throw Error(where + ": bad value \"" + tok + "\"");
      }
      values.push_back(x);
    }
    if (values.size() != dim) {
      throw Error(where + ": expected " + std::to_string(dim) + " values, found " + std::to_string(values.size()));
    }
    std::copy(values.begin(), values.end(), t[*id].begin());
    filled[*id] = 1;
    ++rows;
  }
  if (rows != count) throw Error("embeddings: header announces " + std::to_string(count) + " rows, found " + std::to_string(rows));
  for (std::size_t i = 0; i < filled.size(); ++i) {
    if (!filled[i]) throw Error("embeddings: no vector for \"" + vocab.text(static_cast<std::uint32_t>(i)) + "\"");
  }
  return t;
}

inline void save_embeddings(const EmbeddingTable& t, const Vocabulary& vocab, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write embeddings file: " + path);
  write_embeddings(out, t, vocab);
}

inline EmbeddingTable load_embeddings(const std::string& path, const Vocabulary& vocab) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open embeddings file: " + path);
  return parse_embeddings(in, vocab);
}

// ---------------------------------------------------------------------------

/// Mean of the member vectors; the empty set maps to the zero vector.
inline std::vector<double> set_embedding(std::span<const HashtagId> hashtags, const EmbeddingTable& t) {
  std::vector<double> mean(t.dim(), 0.0);
  for (HashtagId h : hashtags) {
    if (!t.contains(h)) throw Error("hashtag id " + std::to_string(h) + " has no embedding");
    auto v = t[h];
    for (std::size_t k = 0; k < mean.size(); ++k) mean[k] += v[k];
  }
  if (!hashtags.empty()) {
    for (double& x : mean) x /= static_cast<double>(hashtags.size());
  }
  return mean;
}

/// sme(H): defined for non-empty sets only.
inline std::vector<double> sme(std::span<const HashtagId> hashtags, const EmbeddingTable& t) {
  if (hashtags.empty()) throw Error("sme: empty hashtag set");
  return set_embedding(hashtags, t);
}

inline double euclidean(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    s += d * d;
  }
  return std::sqrt(s);
}

/// ||sme(original) - sme(candidate)||; an empty candidate counts as the zero
/// vector.
inline double utility_loss(std::span<const HashtagId> original, std::span<const HashtagId> candidate,
                           const EmbeddingTable& t) {
  if (original.empty()) throw Error("utility_loss: empty original set");
  return euclidean(set_embedding(original, t), set_embedding(candidate, t));
}

/// The k hashtags closest to h by Euclidean distance among ids below `pool`
/// (default: the whole table), ascending by distance, ties to the lower id.
inline std::vector<HashtagId> nearest_neighbors(HashtagId h, std::size_t k, const EmbeddingTable& t,
                                                std::size_t pool = SIZE_MAX) {
  if (!t.contains(h)) throw Error("nearest_neighbors: hashtag id " + std::to_string(h) + " not in table");
  pool = std::min(pool, t.size());
  const std::size_t others = pool - (h < pool ? 1 : 0);
  if (k > others) throw Error("nearest_neighbors: k exceeds the number of other hashtags");
  std::vector<std::pair<double, HashtagId>> dist;
  dist.reserve(others);
  const auto v = t[h];
  for (std::size_t i = 0; i < pool; ++i) {
    if (i == h) continue;
    const auto w = t[static_cast<HashtagId>(i)];
    double s = 0.0;
    for (std::size_t d = 0; d < v.size(); ++d) {
      const double x = v[d] - w[d];
      s += x * x;
    }
    dist.push_back({s, static_cast<HashtagId>(i)});
  }
  std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
  std::vector<HashtagId> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) out.push_back(dist[i].second);
  return out;
}

}  // namespace hashloc

#endif  // HASHLOC_EMBEDDING_HPP_
