#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <set>

#include "convoforge/error.hpp"
#include "convoforge/random.hpp"
#include "convoforge/topics.hpp"

using namespace convoforge;

namespace {

// n points per blob around orthogonal unit axes.
std::vector<Vector> blobs(std::size_t per_blob, std::size_t num_blobs, double noise, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Vector> out;
  for (std::size_t b = 0; b < num_blobs; ++b) {
    for (std::size_t i = 0; i < per_blob; ++i) {
      Vector v(num_blobs + 2, 0.0);
      v[b] = 1.0;
      for (auto& x : v) x += noise * rng.normal();
      out.push_back(normalized(v));
    }
  }
  return out;
}

}  // namespace

TEST(ConversationEmbedding, MeanThenNormalize) {
  const std::vector<Vector> v{{2, 0}, {0, 2}};
  const auto e = conversation_embedding(v);
  EXPECT_NEAR(e[0], std::sqrt(0.5), 1e-15);
  EXPECT_NEAR(e[1], std::sqrt(0.5), 1e-15);
  const std::vector<Vector> cancel{{1, 0}, {-1, 0}};
  EXPECT_EQ(conversation_embedding(cancel), (Vector{0, 0}));
}

TEST(ClusterTopics, RecoversSeparatedBlobs) {
  const auto x = blobs(20, 3, 0.05, 4);
  TopicOptions opts;
  opts.k = 3;
  opts.coverage_target = 1.0;
  opts.seed = 1;
  const auto a = cluster_topics(x, opts);
  ASSERT_EQ(a.topics.size(), 60u);
  for (std::size_t b = 0; b < 3; ++b) {
    std::set<std::size_t> ids(a.topics.begin() + b * 20, a.topics.begin() + (b + 1) * 20);
    EXPECT_EQ(ids.size(), 1u);
    EXPECT_LT(*ids.begin(), 3u);
  }
  std::set<std::size_t> all(a.topics.begin(), a.topics.end());
  EXPECT_EQ(all.size(), 3u);
}

TEST(ClusterTopics, ResidualShareMatchesCoverage) {
  const auto x = blobs(40, 5, 0.3, 5);
  TopicOptions opts;
  opts.k = 5;
  opts.coverage_target = 0.65;
  opts.seed = 2;
  const auto a = cluster_topics(x, opts);
  const auto residual = std::count(a.topics.begin(), a.topics.end(), a.residual_id());
  EXPECT_EQ(residual, 70);
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (a.topics[i] == a.residual_id()) {
      EXPECT_LE(a.similarity[i], a.threshold);
    } else {
      EXPECT_GE(a.similarity[i], a.threshold);
    }
  }
}

TEST(ClusterTopics, DeterministicAndObjectiveNonIncreasing) {
  const auto x = blobs(30, 4, 0.4, 6);
  TopicOptions opts;
  opts.k = 6;
  opts.seed = 9;
  const auto a = cluster_topics(x, opts);
  const auto b = cluster_topics(x, opts);
  EXPECT_EQ(a.topics, b.topics);
  EXPECT_EQ(a.centroids, b.centroids);
  ASSERT_FALSE(a.objective_history.empty());
  for (std::size_t i = 1; i < a.objective_history.size(); ++i) {
    EXPECT_LE(a.objective_history[i], a.objective_history[i - 1] + 1e-12);
  }
}

TEST(ClusterTopics, RejectsTooFewPoints) {
  const auto x = blobs(1, 2, 0.0, 1);
  TopicOptions opts;
  opts.k = 3;
  EXPECT_THROW(cluster_topics(x, opts), ValidationError);
}

TEST(Ctfidf, HandRankedCase) {
  // Totals a:2 b:2 c:1; class 1 favours the rarer "c".
  const std::vector<std::size_t> topics{0, 1};
  const std::vector<std::vector<std::string>> docs{{"a", "a", "b"}, {"b", "c"}};
  const auto words = ctfidf_words(topics, docs, 2, 10);
  EXPECT_EQ(words[0], (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(words[1], (std::vector<std::string>{"c", "b"}));
  EXPECT_EQ(ctfidf_words(topics, docs, 2, 1)[0], (std::vector<std::string>{"a"}));
}

TEST(Ctfidf, TiesAlphabeticalAndEmptyClass) {
  const std::vector<std::size_t> topics{0};
  const std::vector<std::vector<std::string>> docs{{"y", "x"}};
  const auto words = ctfidf_words(topics, docs, 2, 10);
  EXPECT_EQ(words[0], (std::vector<std::string>{"x", "y"}));
  EXPECT_TRUE(words[1].empty());
}

TEST(DummyEncode, OneHotWithResidualLast) {
  const std::vector<std::size_t> topics{0, 2, 1};
  const auto rows = dummy_encode(topics, 2);
  EXPECT_EQ(rows[0], (std::vector<double>{1, 0, 0}));
  EXPECT_EQ(rows[1], (std::vector<double>{0, 0, 1}));
  EXPECT_EQ(rows[2], (std::vector<double>{0, 1, 0}));
  const std::vector<std::size_t> bad{3};
  EXPECT_THROW(dummy_encode(bad, 2), ValidationError);
}

TEST(TopicReport, SharesSumToOne) {
  const auto x = blobs(10, 3, 0.1, 3);
  TopicOptions opts;
  opts.k = 3;
  opts.seed = 4;
  const auto a = cluster_topics(x, opts);
  const std::vector<std::vector<std::string>> words(4, std::vector<std::string>{"w"});
  const auto report = topic_report(a, words);
  ASSERT_EQ(report.size(), 4u);
  double share = 0;
  std::size_t size = 0;
  for (const auto& t : report) {
    share += t["share"].get<double>();
    size += t["size"].get<std::size_t>();
  }
  EXPECT_NEAR(share, 1.0, 1e-12);
  EXPECT_EQ(size, 30u);
  EXPECT_EQ(report.back()["topic_id"], "residual");
}
