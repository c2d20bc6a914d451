#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "convoforge/corpus.hpp"
#include "convoforge/resources.hpp"
#include "convoforge/utterance_features.hpp"
#include "convoforge/vectors.hpp"

namespace convoforge {

enum class ZScope { kWithinConversation, kAcrossCorpus };

struct FeaturizeOptions {
  ZScope info_exchange_scope = ZScope::kWithinConversation;
  ZScope positivity_scope = ZScope::kWithinConversation;
  bool dd_as_distance = false;
  std::size_t lda_iterations = 500;
  std::uint64_t lda_seed = 0;
  std::size_t jobs = 1;
};

// One row per conversation; columns are registry feature names.
struct FeatureTable {
  std::vector<std::string> columns;
  std::vector<std::string> conversation_ids;
  std::vector<Label> labels;
  std::vector<std::vector<double>> rows;

  std::optional<std::size_t> column_index(std::string_view name) const;
  std::vector<double> column(std::size_t c) const;

  // conversation_id,label,<columns...>; an optional leading "# ..." comment.
  void write_csv(std::ostream& out, std::string_view comment = {}) const;
  static FeatureTable read_csv(std::istream& in);
};

// Per-utterance values of every utterance-level feature except the
// turn-based accommodation pair. Corpus-scope z-score statistics are passed
// in when that scope is selected.
struct CorpusStats {
  double info_exchange_mean = 0.0;
  double info_exchange_sd = 0.0;
  double positivity_mean = 0.0;
  double positivity_sd = 0.0;
};

std::vector<FeatureRow> utterance_feature_rows(const Conversation& conv,
                                               std::span<const TokenizedUtterance> tokens,
                                               const Resources& resources,
                                               const VectorProvider& vectors,
                                               const FeaturizeOptions& options,
                                               const CorpusStats& stats);

// Aggregated utterance features plus the ten conversation-level features.
FeatureRow conversation_features(const Conversation& conv, const Resources& resources,
                                 const VectorProvider& vectors, const TermFrequencies& tf,
                                 const FeaturizeOptions& options, const CorpusStats& stats);

// Every non-topic registry column for every conversation, in corpus order.
// Throws if the computed feature set and the registry disagree.
FeatureTable featurize_corpus(const Corpus& corpus, const Resources& resources,
                              const VectorProvider& vectors, const FeaturizeOptions& options);

// Appends topic dummy columns (registry topic block order).
void append_topic_columns(FeatureTable& table, std::span<const std::vector<double>> dummies,
                          const FeatureRegistry& registry);

}  // namespace convoforge
