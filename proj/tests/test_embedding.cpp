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

#include <gtest/gtest.h>

#include <sstream>

#include "support.hpp"

namespace hashloc {
namespace {

using testing::make_corpus;
using testing::RawPost;

EmbeddingTable table(const std::vector<std::vector<double>>& rows) {
  EmbeddingTable t(rows.size(), rows.at(0).size());
  for (std::size_t i = 0; i < rows.size(); ++i) std::copy(rows[i].begin(), rows[i].end(), t[static_cast<HashtagId>(i)].begin());
  return t;
}

double cosine(std::span<const double> a, std::span<const double> b) {
  double ab = 0, aa = 0, bb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  return ab / std::sqrt(aa * bb);
}

Corpus three_clusters() {
  // Cluster c: hashtags c_a, c_b, c_c always posted together.
  std::vector<RawPost> posts;
  Rng rng(2);
  for (int i = 0; i < 300; ++i) {
    const std::string c = std::to_string(rng.uniform_index(3));
    std::vector<std::string> hs{"c" + c + "_a", "c" + c + "_b"};
    if (rng.bernoulli(0.5)) hs.push_back("c" + c + "_c");
    posts.push_back({"u", "L0", hs});
  }
  return make_corpus(posts, 1);
}

TEST(Sgns, IntraClusterMoreSimilarThanInter) {
  const Corpus c = three_clusters();
  EmbeddingParams p;
  p.dim = 16;
  p.epochs = 10;
  const auto t = train_embeddings(c, p).table;
  for (int k = 0; k < 3; ++k) {
    const auto a = *c.vocab.find("c" + std::to_string(k) + "_a");
    const auto b = *c.vocab.find("c" + std::to_string(k) + "_b");
    const double within = cosine(t[a], t[b]);
    for (int o = 0; o < 3; ++o) {
      if (o == k) continue;
      for (const char* s : {"_a", "_b", "_c"}) {
        const auto x = *c.vocab.find("c" + std::to_string(o) + s);
        EXPECT_GT(within, cosine(t[a], t[x])) << k << " vs " << o << s;
      }
    }
  }
}

TEST(Sgns, DimensionAndDeterminism) {
  const Corpus c = three_clusters();
  EmbeddingParams p;
  p.epochs = 2;
  const auto a = train_embeddings(c, p);
  EXPECT_EQ(a.table.dim(), 100u);
  EXPECT_EQ(a.table.size(), c.vocab.size());
  EXPECT_TRUE(a.isolated.empty());
  EXPECT_EQ(a.table, train_embeddings(c, p).table);
  p.seed = 2;
  EXPECT_FALSE(a.table == train_embeddings(c, p).table);
}

TEST(Sgns, SingletonPostHashtagsAreIsolated) {
  const Corpus c = make_corpus({{"u", "L0", {"alone"}}, {"u", "L0", {"x", "y"}}}, 1);
  EmbeddingParams p;
  p.dim = 4;
  const auto r = train_embeddings(c, p);
  EXPECT_EQ(r.isolated, (std::vector<HashtagId>{*c.vocab.find("alone")}));
}

TEST(EmbeddingFile, ParsesRows) {
  Vocabulary v;
  for (const char* s : {"a", "b", "c"}) v.intern(s);
  std::istringstream in("3 4\na 1 2 3 4\nb 0 0 0 0\nc -1 0.5 1e-3 2\n");
  const auto t = parse_embeddings(in, v);
  EXPECT_EQ(t.size(), 3u);
  EXPECT_EQ(t.dim(), 4u);
  EXPECT_EQ(t[2][2], 1e-3);
}

TEST(EmbeddingFile, RejectsMalformedInput) {
  Vocabulary v;
  for (const char* s : {"a", "b", "c"}) v.intern(s);
  auto fails = [&](const std::string& text) {
    std::istringstream in(text);
    EXPECT_THROW(parse_embeddings(in, v), Error) << text;
  };
  fails("3 4\na 1 2 3 4\nb 0 0 0\nc 1 1 1 1\n");  // short row
  fails("3 4\na 1 2 3 4\nb 0 0 0 0\n");            // missing vector
  fails("3 4\na 1 2 3 4\nb 0 0 0 0\nz 1 1 1 1\n");  // unknown hashtag
  fails("3 4\na 1 2 3 4\na 0 0 0 0\nc 1 1 1 1\n");  // duplicate
  fails("3 4\na 1 2 3 x\nb 0 0 0 0\nc 1 1 1 1\n");  // bad value
  fails("");
}

TEST(EmbeddingFile, RoundTripIsExact) {
  const Corpus c = three_clusters();
  EmbeddingParams p;
  p.dim = 8;
  const auto t = train_embeddings(c, p).table;
  testing::TempDir dir;
  save_embeddings(t, c.vocab, dir.str("e.txt"));
  EXPECT_EQ(load_embeddings(dir.str("e.txt"), c.vocab), t);
}

TEST(CategoryVectors, CentroidOfMembers) {
  Vocabulary v;
  v.intern("a");
  v.intern("b");
  auto t = table({{1, 0}, {3, 2}});
  const auto tax = CategoryTaxonomy::build({{"a", "cat", "top"}, {"b", "cat", "top"}}, v);
  add_category_vectors(t, tax, v.size());
  ASSERT_EQ(t.size(), 4u);
  const auto cat = *v.find("cat");
  EXPECT_EQ(t[cat][0], 2.0);
  EXPECT_EQ(t[cat][1], 1.0);
}

TEST(SetEmbedding, Basics) {
  const auto t = table({{1, 2, 3}, {-1, -2, -3}, {4, 0, 2}});
  EXPECT_EQ(sme(std::vector<HashtagId>{2}, t), (std::vector<double>{4, 0, 2}));
  EXPECT_EQ(sme(std::vector<HashtagId>{0, 1}, t), (std::vector<double>{0, 0, 0}));
  EXPECT_THROW(sme(std::vector<HashtagId>{}, t), Error);
  EXPECT_EQ(set_embedding(std::vector<HashtagId>{}, t), (std::vector<double>{0, 0, 0}));
}

TEST(SetEmbedding, MatchesComponentSums) {
  Rng rng(5);
  EmbeddingTable t(20, 7);
  for (HashtagId h = 0; h < 20; ++h) {
    for (double& x : t[h]) x = rng.uniform() * 2 - 1;
  }
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<HashtagId> s;
    for (std::size_t j = 0, n = 1 + rng.uniform_index(6); j < n; ++j) s.push_back(static_cast<HashtagId>(rng.uniform_index(20)));
    const auto m = sme(s, t);
    const auto want = testing::oracle::mean_vector(s, t);
    for (std::size_t d = 0; d < 7; ++d) EXPECT_NEAR(m[d], want[d], 1e-12);
  }
}

TEST(UtilityLoss, Basics) {
  const auto t = table({{1, 2}, {4, 6}, {0, 0}});
  const std::vector<HashtagId> a{0}, b{1}, ab{0, 1}, none{};
  EXPECT_EQ(utility_loss(ab, ab, t), 0.0);
  EXPECT_DOUBLE_EQ(utility_loss(a, b, t), 5.0);
  EXPECT_DOUBLE_EQ(utility_loss(a, b, t), utility_loss(b, a, t));
  EXPECT_DOUBLE_EQ(utility_loss(a, none, t), std::sqrt(5.0));
  EXPECT_THROW(utility_loss(none, a, t), Error);
}

TEST(Neighbors, ExhaustiveAndDuplicate) {
  const auto t = table({{0, 0}, {3, 0}, {1, 0}, {0, 0}, {-2, 0}});
  EXPECT_EQ(nearest_neighbors(0, 4, t), (std::vector<HashtagId>{3, 2, 4, 1}));
  EXPECT_EQ(nearest_neighbors(0, 1, t).front(), 3u);  // planted duplicate
  EXPECT_THROW(nearest_neighbors(0, 5, t), Error);
  EXPECT_EQ(nearest_neighbors(1, 2, t, 3), (std::vector<HashtagId>{2, 0}));
}

TEST(Neighbors, MatchScanOracle) {
  Rng rng(12);
  EmbeddingTable t(60, 5);
  for (HashtagId h = 0; h < 60; ++h) {
    for (double& x : t[h]) x = static_cast<double>(rng.uniform_index(5));  // coarse grid forces ties
  }
  for (HashtagId h = 0; h < 60; ++h) {
    const std::size_t k = 1 + rng.uniform_index(59);
    EXPECT_EQ(nearest_neighbors(h, k, t), testing::oracle::neighbors(h, k, t, 60)) << h;
  }
}

}  // namespace
}  // namespace hashloc
