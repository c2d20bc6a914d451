#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "convoforge/lexicon.hpp"
#include "convoforge/vectors.hpp"

namespace convoforge {

// Sum_i Sum_j |x_i - x_j| / (2 n^2 mean). 0 for an empty or all-zero input;
// throws ValidationError on a negative value.
double gini(std::span<const double> values);

// Maximal same-speaker runs divided by utterance count, in (0, 1].
double turn_taking_index(std::span<const std::string> speakers);

// (sd - mean) / (sd + mean) over inter-message gaps with population sd.
// Fewer than two gaps, or sd = mean = 0, gives 0.
double burstiness(std::span<const std::int64_t> timestamps);

struct DiscursiveDiversity {
  double discursive_diversity = 0.0;
  double variance_in_dd = 0.0;
  double incongruent_modulation = 0.0;
  double within_person_disc_range = 0.0;
};

// speakers[i] authored the utterance with embedding embeddings[i]. Thirds are
// taken by utterance index with the remainder assigned to earlier thirds.
// With as_distance the diversity values are mean pairwise cosine distances
// instead of 1 minus that mean.
DiscursiveDiversity discursive_diversity_family(std::span<const std::string> speakers,
                                                std::span<const Vector> embeddings,
                                                bool as_distance = false);

// Boundaries [0, b1, b2, n) of the three conversation stages.
std::array<std::size_t, 4> stage_boundaries(std::size_t n);

struct LdaOptions {
  std::size_t num_topics = 2;
  std::size_t iterations = 500;
  std::uint64_t seed = 0;
  // alpha <= 0 selects 50 / num_topics.
  double alpha = 0.0;
  double beta = 0.01;
};

// Lowercase tokens with stop words and words shorter than 3 removed, then a
// light suffix-stripping lemmatizer.
std::vector<std::string> lda_preprocess(std::span<const std::string> tokens,
                                        const Lexicon& stopwords);

std::string light_lemma(std::string_view word);

// max(2, round(ln(num_chats))).
std::size_t lda_topic_count(std::size_t num_chats);

// Collapsed Gibbs sampling with symmetric priors. Returns one topic
// distribution per document; empty documents get the prior mean.
std::vector<Vector> fit_lda(std::span<const std::vector<std::string>> documents,
                            const LdaOptions& options);

// Mean over documents of 1 - cosine(topic_i, mean topic vector).
double information_diversity(std::span<const Vector> topic_vectors);

}  // namespace convoforge
