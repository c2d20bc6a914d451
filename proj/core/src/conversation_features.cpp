#include "convoforge/conversation_features.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>

#include "convoforge/error.hpp"

namespace convoforge {

double gini(std::span<const double> values) {
  if (values.empty()) return 0.0;
  double total = 0.0;
  for (const double v : values) {
    if (v < 0.0) throw ValidationError("gini: negative value");
    total += v;
  }
  if (total == 0.0) return 0.0;
  // Sorted form of the pairwise sum: Sum_{i<j} (x_j - x_i) over ascending x.
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const auto n = static_cast<double>(sorted.size());
  double weighted = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    weighted += (2.0 * static_cast<double>(i) - n + 1.0) * sorted[i];
  }
  const double mean = total / n;
  return (2.0 * weighted) / (2.0 * n * n * mean);
}

double turn_taking_index(std::span<const std::string> speakers) {
  if (speakers.empty()) return 0.0;
  std::size_t runs = 1;
  for (std::size_t i = 1; i < speakers.size(); ++i) runs += speakers[i] != speakers[i - 1] ? 1 : 0;
  return static_cast<double>(runs) / static_cast<double>(speakers.size());
}

double burstiness(std::span<const std::int64_t> timestamps) {
  if (timestamps.size() < 3) return 0.0;
  std::vector<double> gaps;
  for (std::size_t i = 1; i < timestamps.size(); ++i) {
    gaps.push_back(static_cast<double>(timestamps[i] - timestamps[i - 1]));
  }
  double mean = 0.0;
  for (const double g : gaps) mean += g;
  mean /= static_cast<double>(gaps.size());
  double var = 0.0;
  for (const double g : gaps) var += (g - mean) * (g - mean);
  const double sd = std::sqrt(var / static_cast<double>(gaps.size()));
  if (sd + mean == 0.0) return 0.0;
  return (sd - mean) / (sd + mean);
}

std::array<std::size_t, 4> stage_boundaries(std::size_t n) {
  const std::size_t base = n / 3;
  const std::size_t rem = n % 3;
  std::array<std::size_t, 4> b{};
  for (std::size_t k = 0; k < 3; ++k) b[k + 1] = b[k] + base + (k < rem ? 1 : 0);
  return b;
}

namespace {

double population_variance(std::span<const double> values) {
  if (values.size() < 2) return 0.0;
  double mean = 0.0;
  for (const double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double var = 0.0;
  for (const double v : values) var += (v - mean) * (v - mean);
  return var / static_cast<double>(values.size());
}

using Centroids = std::vector<std::optional<Vector>>;  // indexed by speaker

Centroids speaker_centroids(std::span<const std::size_t> speaker_of, std::span<const Vector> unit,
                            std::size_t num_speakers, std::size_t begin, std::size_t end) {
  Centroids sums(num_speakers);
  std::vector<std::size_t> counts(num_speakers, 0);
  for (std::size_t i = begin; i < end; ++i) {
    auto& c = sums[speaker_of[i]];
    if (!c) c = Vector(unit[i].size(), 0.0);
    for (std::size_t k = 0; k < unit[i].size(); ++k) (*c)[k] += unit[i][k];
    ++counts[speaker_of[i]];
  }
  for (std::size_t s = 0; s < num_speakers; ++s) {
    if (sums[s]) {
      for (auto& x : *sums[s]) x /= static_cast<double>(counts[s]);
    }
  }
  return sums;
}

// Mean pairwise cosine distance among present centroids; nullopt if fewer
// than two are present.
std::optional<double> mean_pairwise_distance(const Centroids& centroids) {
  double total = 0.0;
  std::size_t pairs = 0;
  for (std::size_t a = 0; a < centroids.size(); ++a) {
    if (!centroids[a]) continue;
    for (std::size_t b = a + 1; b < centroids.size(); ++b) {
      if (!centroids[b]) continue;
      total += 1.0 - cosine(*centroids[a], *centroids[b]);
      ++pairs;
    }
  }
  if (pairs == 0) return std::nullopt;
  return total / static_cast<double>(pairs);
}

}  // namespace

DiscursiveDiversity discursive_diversity_family(std::span<const std::string> speakers,
                                                std::span<const Vector> embeddings,
                                                bool as_distance) {
  if (speakers.size() != embeddings.size()) {
    throw ValidationError("discursive diversity: speakers and embeddings differ in length");
  }
  std::map<std::string, std::size_t> speaker_index;
  std::vector<std::size_t> speaker_of;
  for (const auto& s : speakers) {
    const auto [it, inserted] = speaker_index.try_emplace(s, speaker_index.size());
    speaker_of.push_back(it->second);
  }
  const std::size_t num_speakers = speaker_index.size();
  DiscursiveDiversity out;
  if (num_speakers < 2) return out;

  std::vector<Vector> unit;
  unit.reserve(embeddings.size());
  for (const auto& v : embeddings) unit.push_back(normalized(v));

  const auto to_diversity = [as_distance](double distance) {
    return as_distance ? distance : 1.0 - distance;
  };

  const auto whole = speaker_centroids(speaker_of, unit, num_speakers, 0, unit.size());
  out.discursive_diversity = to_diversity(*mean_pairwise_distance(whole));

  const auto bounds = stage_boundaries(unit.size());
  std::array<Centroids, 3> stages;
  std::vector<double> stage_dd;
  for (std::size_t k = 0; k < 3; ++k) {
    stages[k] = speaker_centroids(speaker_of, unit, num_speakers, bounds[k], bounds[k + 1]);
    if (const auto d = mean_pairwise_distance(stages[k])) stage_dd.push_back(to_diversity(*d));
  }
  out.variance_in_dd = population_variance(stage_dd);

  std::vector<double> shift1, shift2;
  for (std::size_t s = 0; s < num_speakers; ++s) {
    std::vector<double> own;
    if (stages[0][s] && stages[1][s]) {
      shift1.push_back(1.0 - cosine(*stages[0][s], *stages[1][s]));
      own.push_back(shift1.back());
    }
    if (stages[1][s] && stages[2][s]) {
      shift2.push_back(1.0 - cosine(*stages[1][s], *stages[2][s]));
      own.push_back(shift2.back());
    }
    if (!own.empty()) {
      double sum = 0.0;
      for (const double x : own) sum += x;
      out.within_person_disc_range += sum / static_cast<double>(own.size());
    }
  }
  out.incongruent_modulation = population_variance(shift1) + population_variance(shift2);
  return out;
}

}  // namespace convoforge
