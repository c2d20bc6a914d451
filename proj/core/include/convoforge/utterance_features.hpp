#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "convoforge/lexicon.hpp"
#include "convoforge/text.hpp"
#include "convoforge/vectors.hpp"

namespace convoforge {

// feature name -> value for one utterance (or one conversation after
// aggregation).
using FeatureRow = std::map<std::string, double>;

struct QuantityFeatures {
  double num_words = 0.0;
  double num_chars = 0.0;
  double num_messages = 1.0;
};

QuantityFeatures quantity_features(const TokenizedUtterance& tok);

// Lexicon name -> matches per 100 words.
std::map<std::string, double> lexical_rates(const TokenizedUtterance& tok,
                                            std::span<const Lexicon> lexicons);

double type_token_ratio(const TokenizedUtterance& tok);

// {i, me, my, mine, myself, we, us, our, ours, ourselves} / words.
double first_person_proportion(const TokenizedUtterance& tok);

// Word count minus first-person singular pronouns.
double information_exchange_raw(const TokenizedUtterance& tok);

// Population z-scores. A zero-variance (or single-element) input maps to all
// zeros.
std::vector<double> zscore_population(std::span<const double> values);

// 0.1579 * percent difficult words + 0.0496 * words per sentence; 0 when the
// utterance has no sentence.
double dale_chall(const TokenizedUtterance& tok, const Lexicon& easy_words);

struct PolaritySubjectivity {
  double polarity = 0.0;      // mean score of matched words
  double subjectivity = 0.0;  // matched-word fraction
};

PolaritySubjectivity polarity_subjectivity(const TokenizedUtterance& tok,
                                           const ScoredLexicon& polarity);

// Mean score over matched words, 0 without matches.
double scored_lexicon_average(const TokenizedUtterance& tok, const ScoredLexicon& lexicon);

struct DiscussionTags {
  std::size_t all_caps = 0;
  std::size_t links = 0;
  std::size_t reddit_users = 0;
  std::size_t emphasis = 0;
  std::size_t bullet_points = 0;
  std::size_t numbered_points = 0;
  std::size_t line_breaks = 0;
  std::size_t quotes = 0;
  std::size_t block_quote_responses = 0;
  std::size_t ellipses = 0;
  std::size_t parentheses = 0;
  std::size_t emoji = 0;
};

DiscussionTags discussion_tags(std::string_view text);

struct HedgeScores {
  double rate_per_100 = 0.0;
  double naive = 0.0;  // 1 when any hedge phrase occurs
};

// Phrases: sort of, kind of, I guess, I think, a little, maybe, possibly,
// probably.
HedgeScores hedges(const TokenizedUtterance& tok);

struct QuestionRepair {
  double num_question_naive = 0.0;  // '?' characters
  double repair = 0.0;              // 1 when the repair pattern matches
};

QuestionRepair questions_and_repair(std::string_view text);

// Corpus-wide token counts, filled in one pass before featurization.
class TermFrequencies {
 public:
  void add(std::span<const std::string> tokens);
  std::size_t count(const std::string& word) const;

 private:
  std::unordered_map<std::string, std::size_t> counts_;
};

struct Accommodation {
  double function_word = 0.0;
  double content_word = 0.0;
};

// Per turn. Function-word accommodation counts tokens of turn t that are
// function words whose type occurs in turn t-1; content-word accommodation
// sums 1/tf over the remaining such tokens. The first turn gets zeros.
std::vector<Accommodation> accommodation(std::span<const TokenizedUtterance> turns,
                                         const Lexicon& function_words,
                                         const TermFrequencies& tf);

struct FlowScores {
  double mimicry = 0.0;
  double moving_mimicry = 0.0;
  double forward_flow = 0.0;
};

// Mimicry compares each utterance with its predecessor, moving mimicry is the
// running mean of mimicry from the second utterance on, and forward flow
// compares with the mean of all earlier vectors. First utterance: zeros.
std::vector<FlowScores> vector_flow(std::span<const Vector> embeddings);

std::vector<double> time_diff(std::span<const std::int64_t> timestamps);

// Per-feature arithmetic mean over rows. Features listed in sum_features are
// summed instead.
FeatureRow aggregate_mean(std::span<const FeatureRow> rows,
                          std::span<const std::string> sum_features = {});

}  // namespace convoforge
