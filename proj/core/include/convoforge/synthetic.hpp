#pragma once

#include <cstddef>
#include <cstdint>

#include "convoforge/corpus.hpp"

namespace convoforge {

// Labeled benchmark corpus. Destructive conversations carry three injected
// signals: negative-lexicon words, one speaker holding >= 70% of the
// messages, and long same-speaker runs (low turn alternation). Each signal
// is independently swapped to the other class's pattern with probability
// `flip_probability`, so no single signal separates the classes alone.
struct SyntheticOptions {
  std::size_t n_conversations = 400;
  std::uint64_t seed = 0;
  double destructive_share = 0.5;
  std::size_t min_utterances = 10;
  std::size_t max_utterances = 18;
  double flip_probability = 0.03;
  // Utterance-level chance of a negative word in each class.
  double destructive_negative_rate = 0.65;
  double constructive_negative_rate = 0.05;
};

Corpus generate_synthetic_corpus(const SyntheticOptions& options);

}  // namespace convoforge
