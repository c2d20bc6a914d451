#include "convoforge/topics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "convoforge/error.hpp"
#include "convoforge/random.hpp"

namespace convoforge {

Vector conversation_embedding(std::span<const Vector> utterance_vectors) {
  if (utterance_vectors.empty()) return {};
  Vector mean(utterance_vectors[0].size(), 0.0);
  for (const auto& v : utterance_vectors) {
    if (v.size() != mean.size()) throw ValidationError("conversation_embedding: dimension mismatch");
    for (std::size_t k = 0; k < v.size(); ++k) mean[k] += v[k];
  }
  for (auto& x : mean) x /= static_cast<double>(utterance_vectors.size());
  // Cancellation can leave rounding noise where the exact mean is zero.
  if (norm(mean) < 1e-12) return Vector(mean.size(), 0.0);
  return normalized(mean);
}

namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d += (a[i] - b[i]) * (a[i] - b[i]);
  return d;
}

std::size_t nearest(std::span<const double> x, const std::vector<Vector>& centroids, double* dist) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centroids.size(); ++c) {
    const double d = squared_distance(x, centroids[c]);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  if (dist) *dist = best_d;
  return best;
}

std::vector<Vector> kmeans_plus_plus(std::span<const Vector> x, std::size_t k, Rng& rng) {
  std::vector<Vector> centroids;
  centroids.push_back(x[rng.uniform_index(x.size())]);
  std::vector<double> d2(x.size());
  while (centroids.size() < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      nearest(x[i], centroids, &d2[i]);
      total += d2[i];
    }
    std::size_t pick = 0;
    if (total > 0.0) {
      const double u = rng.uniform01() * total;
      double acc = 0.0;
      pick = x.size() - 1;
      for (std::size_t i = 0; i < x.size(); ++i) {
        acc += d2[i];
        if (acc > u) {
          pick = i;
          break;
        }
      }
    } else {
      pick = rng.uniform_index(x.size());
    }
    centroids.push_back(x[pick]);
  }
  return centroids;
}

}  // namespace

TopicAssignment cluster_topics(std::span<const Vector> embeddings, const TopicOptions& options) {
  const std::size_t n = embeddings.size();
  const std::size_t k = options.k;
  if (k == 0) throw ValidationError("cluster_topics: k must be positive");
  if (k > n) {
    throw ValidationError("cluster_topics: k = " + std::to_string(k) + " exceeds the " +
                          std::to_string(n) + " conversations");
  }
  if (!(options.coverage_target > 0.0 && options.coverage_target <= 1.0)) {
    throw ValidationError("cluster_topics: coverage_target must lie in (0, 1]");
  }
  const std::size_t dim = embeddings[0].size();
  for (const auto& e : embeddings) {
    if (e.size() != dim) throw ValidationError("cluster_topics: dimension mismatch");
  }

  Rng rng(options.seed);
  TopicAssignment out;
  out.k = k;
  out.centroids = kmeans_plus_plus(embeddings, k, rng);
  std::vector<std::size_t> assign(n, 0);

  for (std::size_t it = 0; it < options.max_iterations; ++it) {
    double objective = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double d = 0.0;
      assign[i] = nearest(embeddings[i], out.centroids, &d);
      objective += d;
    }
    std::vector<Vector> next(k, Vector(dim, 0.0));
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < dim; ++j) next[assign[i]][j] += embeddings[i][j];
      ++counts[assign[i]];
    }
    double shift = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) {
        next[c] = out.centroids[c];  // empty cluster keeps its centroid
      } else {
        for (auto& x : next[c]) x /= static_cast<double>(counts[c]);
      }
      shift = std::max(shift, std::sqrt(squared_distance(next[c], out.centroids[c])));
    }
    out.centroids = std::move(next);
    double after = 0.0;
    for (std::size_t i = 0; i < n; ++i) after += squared_distance(embeddings[i], out.centroids[assign[i]]);
    if (out.objective_history.empty()) out.objective_history.push_back(objective);
    out.objective_history.push_back(after);
    if (shift <= options.tolerance) break;
  }

  out.topics.resize(n);
  out.similarity.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.topics[i] = nearest(embeddings[i], out.centroids, nullptr);
    out.similarity[i] = cosine(embeddings[i], out.centroids[out.topics[i]]);
  }

  const auto residual_count = static_cast<std::size_t>(
      std::llround((1.0 - options.coverage_target) * static_cast<double>(n)));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return out.similarity[a] < out.similarity[b];
  });
  out.threshold = residual_count < n ? out.similarity[order[residual_count]]
                                     : std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < residual_count; ++r) out.topics[order[r]] = k;
  return out;
}

std::vector<std::vector<std::string>> ctfidf_words(std::span<const std::size_t> topics,
                                                   std::span<const std::vector<std::string>> documents,
                                                   std::size_t num_classes, std::size_t top_n) {
  if (topics.size() != documents.size()) throw ValidationError("ctfidf_words: size mismatch");
  std::vector<std::map<std::string, double>> class_counts(num_classes);
  std::vector<double> class_tokens(num_classes, 0.0);
  std::map<std::string, double> total_counts;
  for (std::size_t d = 0; d < documents.size(); ++d) {
    if (topics[d] >= num_classes) throw ValidationError("ctfidf_words: topic id out of range");
    for (const auto& w : documents[d]) {
      class_counts[topics[d]][w] += 1.0;
      class_tokens[topics[d]] += 1.0;
      total_counts[w] += 1.0;
    }
  }
  double populated = 0.0;
  double token_sum = 0.0;
  for (const double t : class_tokens) {
    if (t > 0.0) {
      populated += 1.0;
      token_sum += t;
    }
  }
  const double average = populated > 0.0 ? token_sum / populated : 0.0;

  std::vector<std::vector<std::string>> out(num_classes);
  for (std::size_t c = 0; c < num_classes; ++c) {
    std::vector<std::pair<double, std::string>> scored;
    for (const auto& [w, count] : class_counts[c]) {
      const double tf = count / class_tokens[c];
      scored.emplace_back(tf * std::log(1.0 + average / total_counts[w]), w);
    }
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
      return a.first != b.first ? a.first > b.first : a.second < b.second;
    });
    for (std::size_t i = 0; i < std::min(top_n, scored.size()); ++i) out[c].push_back(scored[i].second);
  }
  return out;
}

std::vector<std::vector<double>> dummy_encode(std::span<const std::size_t> topics, std::size_t k) {
  std::vector<std::vector<double>> rows;
  rows.reserve(topics.size());
  for (const std::size_t t : topics) {
    if (t > k) throw ValidationError("dummy_encode: topic id out of range");
    std::vector<double> row(k + 1, 0.0);
    row[t] = 1.0;
    rows.push_back(std::move(row));
  }
  return rows;
}

nlohmann::json topic_report(const TopicAssignment& assignment,
                            std::span<const std::vector<std::string>> top_words) {
  std::vector<std::size_t> sizes(assignment.k + 1, 0);
  for (const std::size_t t : assignment.topics) ++sizes[t];
  const auto n = static_cast<double>(assignment.topics.size());
  nlohmann::json report = nlohmann::json::array();
  for (std::size_t t = 0; t <= assignment.k; ++t) {
    nlohmann::json entry;
    if (t == assignment.k) {
      entry["topic_id"] = "residual";
    } else {
      entry["topic_id"] = t;
    }
    entry["size"] = sizes[t];
    entry["share"] = n > 0.0 ? static_cast<double>(sizes[t]) / n : 0.0;
    entry["top_words"] = t < top_words.size() ? top_words[t] : std::vector<std::string>{};
    entry["label"] = nullptr;
    report.push_back(std::move(entry));
  }
  return report;
}

}  // namespace convoforge
