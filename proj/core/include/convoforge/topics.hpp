#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "convoforge/vectors.hpp"
#include "json.hpp"

namespace convoforge {

// Mean of the utterance vectors, L2-normalized.
Vector conversation_embedding(std::span<const Vector> utterance_vectors);

struct TopicOptions {
  std::size_t k = 30;
  double coverage_target = 0.65;
  std::uint64_t seed = 0;
  std::size_t max_iterations = 100;
  double tolerance = 1e-6;
};

struct TopicAssignment {
  // Topic id per conversation in [0, k), or k for the residual topic.
  std::vector<std::size_t> topics;
  std::vector<Vector> centroids;
  // Cosine similarity of each conversation to its nearest centroid.
  std::vector<double> similarity;
  double threshold = 0.0;
  // Within-cluster sum of squared distances after each k-means iteration.
  std::vector<double> objective_history;
  std::size_t k = 0;

  std::size_t residual_id() const noexcept { return k; }
};

// Seeded k-means (k-means++ seeding, Lloyd iterations). Afterwards the
// round((1 - coverage_target) * N) conversations least similar to their
// centroid move to the residual topic.
TopicAssignment cluster_topics(std::span<const Vector> embeddings, const TopicOptions& options);

// Per topic class c (residual included, last), the top_n words by
// tf(w, c) * ln(1 + A / f(w)); ties broken alphabetically.
std::vector<std::vector<std::string>> ctfidf_words(std::span<const std::size_t> topics,
                                                   std::span<const std::vector<std::string>> documents,
                                                   std::size_t num_classes, std::size_t top_n = 10);

// One-hot rows of width k + 1; the residual topic owns the last column.
std::vector<std::vector<double>> dummy_encode(std::span<const std::size_t> topics, std::size_t k);

// [{topic_id, size, share, top_words, label?}]; the residual entry has
// topic_id "residual".
nlohmann::json topic_report(const TopicAssignment& assignment,
                            std::span<const std::vector<std::string>> top_words);

}  // namespace convoforge
