#pragma once

#include <cstdint>
#include <functional>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace convoforge {

enum class Label { kConstructive, kDestructive, kUnlabeled };
enum class Provenance { kSynthetic, kReddit, kOther };
enum class CorpusFormat { kJsonl, kCsv };

std::string_view to_string(Label label);
Label parse_label(std::string_view text);  // throws ValidationError
std::string_view to_string(Provenance provenance);
Provenance parse_provenance(std::string_view text);

// 1 for Destructive, 0 for Constructive. Unlabeled is rejected.
int label_to_int(Label label);

struct Utterance {
  std::string utterance_id;
  std::string conversation_id;
  std::string speaker_id;
  std::int64_t timestamp = 0;
  std::string text;
  std::optional<std::string> reply_to;
  // Platform score (e.g. Reddit karma) when the source provides one.
  std::optional<double> score;
};

struct Conversation {
  std::string conversation_id;
  std::vector<Utterance> utterances;
  Label label = Label::kUnlabeled;
};

struct Corpus {
  std::vector<Conversation> conversations;
  Provenance provenance = Provenance::kOther;
};

// Groups records by conversation_id (first-appearance order) and sorts each
// conversation by timestamp, ties kept in input order. Records without a
// timestamp get their index within the conversation; a conversation must not
// mix stamped and unstamped records.
Corpus parse_corpus(std::istream& in, CorpusFormat format,
                    Provenance provenance = Provenance::kOther);

// Applies conversation labels from a CSV with columns conversation_id,label.
void attach_labels_csv(Corpus& corpus, std::istream& in);

// Writes one JSONL record per utterance. parse_corpus reads it back unchanged
// and ignores the optional config_hash field.
void write_corpus_jsonl(const Corpus& corpus, std::ostream& out, std::string_view config_hash = {});

// Consecutive utterances by the same speaker collapse into one turn.
Conversation merge_consecutive_turns(const Conversation& conv);

// Removes hyperlinks and block quotes. The paragraph right after a removed
// quote becomes its own segment. Always returns at least one segment.
std::vector<std::string> strip_reddit_markup(std::string_view text);

// Replaces every utterance by its stripped segments ("<id>@k" for k >= 1).
Conversation apply_markup_stripping(const Conversation& conv);

// Chunks utterances longer than max_words on whitespace word boundaries.
Conversation split_long_utterances(const Conversation& conv, std::size_t max_words = 50);

// Drops the first utterance (the thread's opening post) when more remain.
Conversation drop_thread_root(const Conversation& conv);

struct Confounder {
  std::string name;
  // Returns std::nullopt when the value is not available for a conversation.
  std::function<std::optional<double>(const Conversation&)> value;
};

// The four default confounders: conversation length, words per chat,
// characters per chat and meta score per chat.
std::vector<Confounder> default_confounders();
std::optional<Confounder> find_confounder(std::string_view name);

// Sequential decile-bin downsampling, one pass per confounder. A confounder
// missing for any conversation is skipped.
Corpus balance_by_confounders(const Corpus& corpus, std::span<const Confounder> confounders,
                              std::uint64_t seed);

// Draws n indices with replacement, n/2 from each class.
std::vector<std::size_t> balanced_resample(std::span<const Label> labels, std::size_t n,
                                           std::uint64_t seed);

struct CorpusSplit {
  Corpus train;
  Corpus test;
};

struct IndexSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

// Stratified index split behind train_test_split; both halves stay in input
// order.
IndexSplit stratified_split(std::span<const Label> labels, double test_fraction,
                            std::uint64_t seed);

// Stratified conversation-level split; test size is round(N * test_fraction).
CorpusSplit train_test_split(const Corpus& corpus, double test_fraction, std::uint64_t seed);

// Whitespace-delimited words, as used by splitting and confounders.
std::vector<std::string_view> split_whitespace(std::string_view text);

}  // namespace convoforge
