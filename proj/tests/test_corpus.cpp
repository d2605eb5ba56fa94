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

TEST(Normalize, LowercasesAndStripsHash) {
  EXPECT_EQ(normalize_hashtag("#London"), "london");
  EXPECT_EQ(normalize_hashtag("  #Big Ben "), "bigben");
  EXPECT_EQ(normalize_hashtag("#"), "");
}

TEST(Parse, CountsPostsAndHashtags) {
  std::istringstream locs(testing::locations_jsonl(2));
  std::istringstream posts(
      R"({"user":"a","location":"L0","time":1,"hashtags":["#x","y"]})"
      "\n"
      R"({"user":"b","location":"L1","time":2,"hashtags":["Y","z"]})"
      "\n");
  const Corpus c = parse_corpus(posts, parse_locations(locs));
  EXPECT_EQ(c.posts.size(), 2u);
  EXPECT_EQ(c.vocab.size(), 3u);
  EXPECT_EQ(c.users.size(), 2u);
  ASSERT_EQ(c.by_location.size(), 2u);
  EXPECT_EQ(c.by_location[1].at(*c.vocab.find("y")), 1u);
}

TEST(Parse, EmptyFileGivesEmptyCorpus) {
  std::istringstream posts(""), locs("");
  const Corpus c = parse_corpus(posts, parse_locations(locs));
  EXPECT_TRUE(c.posts.empty());
  EXPECT_TRUE(c.vocab.empty());
  EXPECT_TRUE(c.locations.empty());
  EXPECT_EQ(c.users.size(), 0u);
}

TEST(Parse, LatitudeOutOfRangeNamesRecord) {
  std::istringstream locs(R"({"id":"ok","name":"a","lat":1,"lon":1})"
                          "\n"
                          R"({"id":"bad","name":"b","lat":91,"lon":0})"
                          "\n");
  try {
    parse_locations(locs);
    FAIL() << "expected a coordinate error";
  } catch (const Error& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("bad"), std::string::npos) << msg;
    EXPECT_NE(msg.find("line 2"), std::string::npos) << msg;
  }
}

TEST(Parse, RejectsUnknownLocationAndOversizedPosts) {
  std::istringstream locs(testing::locations_jsonl(1));
  const auto locations = parse_locations(locs);
  std::istringstream unknown(R"({"user":"a","location":"nope","time":1,"hashtags":["x"]})");
  EXPECT_THROW(parse_corpus(unknown, locations), Error);
  nlohmann::json big = {{"user", "a"}, {"location", "L0"}, {"time", 1}, {"hashtags", nlohmann::json::array()}};
  for (int i = 0; i < 31; ++i) big["hashtags"].push_back("t" + std::to_string(i));
  std::istringstream oversized(big.dump());
  EXPECT_THROW(parse_corpus(oversized, locations), Error);
}

TEST(Parse, PostsWithoutLocationAreKept) {
  std::istringstream locs(testing::locations_jsonl(1));
  std::istringstream posts(R"({"user":"a","time":1,"hashtags":["x"]})");
  const Corpus c = parse_corpus(posts, parse_locations(locs));
  ASSERT_EQ(c.posts.size(), 1u);
  EXPECT_FALSE(c.posts[0].location.has_value());
}

TEST(Parse, RoundTripThroughWriters) {
  const Corpus c = make_corpus({{"a", "L0", {"x", "y"}}, {"b", "L1", {"z"}}}, 2);
  std::ostringstream posts, locs;
  write_posts(posts, c);
  write_locations(locs, c);
  std::istringstream pin(posts.str()), lin(locs.str());
  const Corpus d = parse_corpus(pin, parse_locations(lin));
  EXPECT_EQ(testing::post_strings(c), testing::post_strings(d));
  EXPECT_EQ(c.vocab.texts(), d.vocab.texts());
}

// ---------------------------------------------------------------------------

std::vector<RawPost> repeat(const RawPost& p, std::size_t n) { return std::vector<RawPost>(n, p); }

void append(std::vector<RawPost>& out, const std::vector<RawPost>& more) { out.insert(out.end(), more.begin(), more.end()); }

TEST(Filter, DropsRareHashtag) {
  std::vector<RawPost> posts = repeat({"u0", "L0", {"common"}}, 30);
  append(posts, repeat({"u0", "L0", {"common", "rare"}}, 19));
  append(posts, repeat({"u1", "L0", {"common"}}, 20));
  const Corpus out = filter_corpus(make_corpus(posts, 1), {20, 20, 50});
  EXPECT_FALSE(out.vocab.find("rare").has_value());
  EXPECT_TRUE(out.vocab.find("common").has_value());
  EXPECT_EQ(out.posts.size(), posts.size());
}

TEST(Filter, SatisfiedCorpusIsAFixedPoint) {
  std::vector<RawPost> posts = repeat({"u0", "L0", {"a", "b"}}, 25);
  append(posts, repeat({"u1", "L1", {"b", "c"}}, 25));
  const Corpus in = make_corpus(posts, 2);
  const Corpus out = filter_corpus(in, {20, 20, 20});
  EXPECT_EQ(testing::post_strings(in), testing::post_strings(out));
  EXPECT_EQ(out.vocab.texts(), in.vocab.texts());
}

TEST(Filter, CascadeMatchesFixedPointOracleNotOnePass) {
  // u1 has 20 check-ins, 5 of them at L1, which only has 10 posts. Dropping
  // L1 pushes u1 below 20, so a second round must remove u1 entirely.
  std::vector<RawPost> posts = repeat({"u0", "L0", {"a"}}, 60);
  append(posts, repeat({"u1", "L0", {"a"}}, 15));
  append(posts, repeat({"u1", "L1", {"a"}}, 5));
  append(posts, repeat({"u2", "L1", {"a"}}, 5));
  const Corpus in = make_corpus(posts, 2);
  const FilterThresholds th{20, 20, 50};

  const Corpus out = filter_corpus(in, th);
  EXPECT_EQ(testing::post_strings(out), testing::oracle::filter(in, th));
  EXPECT_FALSE(out.users.find("u1").has_value());
  EXPECT_EQ(out.posts.size(), 60u);

  // A single simultaneous pass keeps u1's L0 posts, so it differs.
  std::size_t one_pass = 0;
  std::map<std::string, std::size_t> u, l;
  for (const auto& p : posts) ++u[p.user], ++l[p.location];
  for (const auto& p : posts) one_pass += (u[p.user] >= 20 && l[p.location] >= 50) ? 1 : 0;
  EXPECT_EQ(one_pass, 75u);
  EXPECT_NE(one_pass, out.posts.size());
}

TEST(Filter, RandomCorporaMatchOracle) {
  Rng rng(99);
  for (int trial = 0; trial < 40; ++trial) {
    std::vector<RawPost> posts;
    const std::size_t n = 50 + rng.uniform_index(150);
    for (std::size_t i = 0; i < n; ++i) {
      RawPost p{"u" + std::to_string(rng.uniform_index(8)), "L" + std::to_string(rng.uniform_index(5)), {}};
      const std::size_t k = 1 + rng.uniform_index(4);
      for (std::size_t j = 0; j < k; ++j) p.hashtags.push_back("t" + std::to_string(rng.uniform_index(15)));
      posts.push_back(p);
    }
    const Corpus in = make_corpus(posts, 5);
    const FilterThresholds th{1 + rng.uniform_index(20), 1 + rng.uniform_index(20), 1 + rng.uniform_index(40)};
    const Corpus out = filter_corpus(in, th);
    EXPECT_EQ(testing::post_strings(out), testing::oracle::filter(in, th)) << "trial " << trial;
    // Relabelling keeps relative order.
    EXPECT_TRUE(std::is_sorted(out.vocab.texts().begin(), out.vocab.texts().end(), [&](auto& a, auto& b) {
      return *in.vocab.find(a) < *in.vocab.find(b);
    }));
  }
}

TEST(Filter, RejectsZeroThreshold) {
  const Corpus c = make_corpus({{"a", "L0", {"x"}}}, 1);
  EXPECT_THROW(filter_corpus(c, {0, 1, 1}), Error);
}

// ---------------------------------------------------------------------------

Corpus hundred_posts() {
  std::vector<RawPost> posts;
  for (int i = 0; i < 100; ++i) posts.push_back({"u" + std::to_string(i % 10), "L" + std::to_string(i % 3), {"x"}});
  return make_corpus(posts, 3);
}

TEST(Split, A1ExactFraction) {
  const Corpus c = hundred_posts();
  const Split s = split(c, {Adversary::A1, 0.8, 5, 10}, 0);
  EXPECT_EQ(s.train.size(), 80u);
  EXPECT_EQ(s.test.size(), 20u);
}

TEST(Split, A2UsersDisjoint) {
  const Corpus c = hundred_posts();
  for (std::size_t rep = 0; rep < 10; ++rep) {
    const Split s = split(c, {Adversary::A2, 0.8, 5, 10}, rep);
    std::set<UserId> train, test;
    for (std::size_t i = 0; i < s.train.size(); ++i) train.insert(s.train[i].user);
    for (std::size_t i = 0; i < s.test.size(); ++i) test.insert(s.test[i].user);
    for (UserId u : test) EXPECT_FALSE(train.contains(u));
    EXPECT_EQ(train.size(), 8u);
    EXPECT_EQ(s.train.size() + s.test.size(), c.posts.size());
  }
}

TEST(Split, DeterministicAndDistinctAcrossRepetitions) {
  const Corpus c = hundred_posts();
  const SplitSpec spec{Adversary::A1, 0.8, 11, 10};
  EXPECT_EQ(split(c, spec, 3).train.posts, split(c, spec, 3).train.posts);
  EXPECT_NE(split(c, spec, 3).train.posts, split(c, spec, 4).train.posts);
}

TEST(Split, PartitionIsDisjointAndExhaustive) {
  const Corpus c = hundred_posts();
  for (Adversary a : {Adversary::A1, Adversary::A2}) {
    const Split s = split(c, {a, 0.7, 2, 3}, 1);
    std::vector<std::size_t> all = s.train.posts;
    all.insert(all.end(), s.test.posts.begin(), s.test.posts.end());
    std::sort(all.begin(), all.end());
    for (std::size_t i = 0; i < all.size(); ++i) EXPECT_EQ(all[i], i);
  }
}

TEST(Split, RejectsBadArguments) {
  const Corpus c = hundred_posts();
  EXPECT_THROW(split(c, {Adversary::A1, 1.0, 0, 10}, 0), Error);
  EXPECT_THROW(split(c, {Adversary::A1, 0.8, 0, 10}, 10), Error);
}

// ---------------------------------------------------------------------------

TEST(Histogram, Counts) {
  std::istringstream locs(testing::locations_jsonl(1));
  std::istringstream posts(R"({"user":"a","location":"L0","time":1,"hashtags":[]})"
                           "\n"
                           R"({"user":"a","location":"L0","time":1,"hashtags":[]})"
                           "\n"
                           R"({"user":"a","location":"L0","time":1,"hashtags":["x"]})"
                           "\n"
                           R"({"user":"a","location":"L0","time":1,"hashtags":["x","y"]})"
                           "\n");
  const auto h = hashtag_count_histogram(parse_corpus(posts, parse_locations(locs)));
  const std::map<std::size_t, double> want{{0, 0.5}, {1, 0.25}, {2, 0.25}};
  EXPECT_EQ(h, want);
}

TEST(Histogram, UniformCountAndEmpty) {
  SynthConfig cfg;
  cfg.n_locations = 4;
  cfg.posts_per_location = 10;
  cfg.hashtags_per_post = 3;
  EXPECT_EQ(hashtag_count_histogram(generate_synthetic(cfg).corpus), (std::map<std::size_t, double>{{3, 1.0}}));
  EXPECT_THROW(hashtag_count_histogram(Corpus{}), Error);
}

// ---------------------------------------------------------------------------

TEST(Synth, PostCount) {
  SynthConfig cfg;
  cfg.n_locations = 50;
  cfg.posts_per_location = 200;
  EXPECT_EQ(generate_synthetic(cfg).corpus.posts.size(), 10000u);
}

TEST(Synth, FullSignatureSingleHashtagIdentifiesLocation) {
  SynthConfig cfg;
  cfg.n_locations = 10;
  cfg.posts_per_location = 20;
  cfg.hashtags_per_post = 1;
  cfg.signature_rate = 1.0;
  const Corpus c = generate_synthetic(cfg).corpus;
  std::map<HashtagId, std::set<LocationId>> where;
  for (const auto& p : c.posts) where[p.hashtags.at(0)].insert(*p.location);
  for (const auto& [h, locs] : where) EXPECT_EQ(locs.size(), 1u) << c.vocab.text(h);
}

TEST(Synth, SameSeedSameCorpus) {
  SynthConfig cfg = testing::load_config("defense.json");
  std::ostringstream a, b;
  write_posts(a, generate_synthetic(cfg).corpus);
  write_posts(b, generate_synthetic(cfg).corpus);
  EXPECT_EQ(a.str(), b.str());
  cfg.seed += 1;
  std::ostringstream c;
  write_posts(c, generate_synthetic(cfg).corpus);
  EXPECT_NE(a.str(), c.str());
}

TEST(Synth, VariablePostLengthAndUserStructure) {
  SynthConfig cfg = testing::load_config("defense.json");
  const Corpus c = generate_synthetic(cfg).corpus;
  std::size_t lo = 99, hi = 0;
  for (const auto& p : c.posts) {
    lo = std::min(lo, p.hashtags.size());
    hi = std::max(hi, p.hashtags.size());
  }
  EXPECT_EQ(lo, cfg.hashtags_per_post);
  EXPECT_EQ(hi, cfg.hashtags_per_post_max);

  SynthConfig users = testing::load_config("adversary.json");
  users.posts_per_location = 40;
  const Corpus u = generate_synthetic(users).corpus;
  std::map<UserId, std::set<LocationId>> visited;
  for (const auto& p : u.posts) visited[p.user].insert(*p.location);
  for (const auto& [user, locs] : visited) EXPECT_LE(locs.size(), users.locations_per_user);
}

TEST(Synth, RejectsBadConfigs) {
  SynthConfig cfg;
  cfg.signature_rate = 1.5;
  EXPECT_THROW(generate_synthetic(cfg), Error);
  cfg = {};
  cfg.max_vocabulary = 10;
  EXPECT_THROW(generate_synthetic(cfg), Error);
  EXPECT_THROW(nlohmann::json::parse(R"({"n_location": 3})").get<SynthConfig>(), Error);
}

// ---------------------------------------------------------------------------

TEST(Taxonomy, BuildsCategoryTokens) {
  Vocabulary vocab;
  vocab.intern("harrods");
  vocab.intern("tea");
  const std::vector<TaxonomyEntry> rows = {{"#Harrods", "Department Store", "Shop"}, {"missing", "x", "y"}};
  const auto tax = CategoryTaxonomy::build(rows, vocab);
  ASSERT_TRUE(tax.generalizable(*vocab.find("harrods")));
  EXPECT_FALSE(tax.generalizable(*vocab.find("tea")));
  const auto cats = *tax.find(*vocab.find("harrods"));
  EXPECT_EQ(vocab.text(cats.l2), "departmentstore");
  EXPECT_EQ(vocab.text(cats.l1), "shop");
  EXPECT_EQ(tax.size(), 1u);
}

TEST(Taxonomy, RejectsTwoParents) {
  Vocabulary vocab;
  vocab.intern("a");
  vocab.intern("b");
  EXPECT_THROW(CategoryTaxonomy::build({{"a", "x", "p"}, {"b", "x", "q"}}, vocab), Error);
}

TEST(Taxonomy, FileRoundTrip) {
  const std::vector<TaxonomyEntry> rows = {{"a", "x", "p"}, {"b", "y", "p"}};
  std::ostringstream out;
  write_taxonomy(out, rows);
  std::istringstream in(out.str());
  const auto back = parse_taxonomy(in);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[1].hashtag, "b");
  EXPECT_EQ(back[1].category_l2, "y");
}

}  // namespace
}  // namespace hashloc
