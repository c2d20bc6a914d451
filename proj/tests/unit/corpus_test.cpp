#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "convoforge/corpus.hpp"
#include "convoforge/error.hpp"
#include "convoforge/random.hpp"

using namespace convoforge;

namespace {

Corpus parse_jsonl(const std::string& text) {
  std::istringstream in(text);
  return parse_corpus(in, CorpusFormat::kJsonl);
}

Conversation conv_of(const std::vector<std::string>& speakers, const std::vector<std::string>& texts = {}) {
  Conversation c;
  c.conversation_id = "c";
  for (std::size_t i = 0; i < speakers.size(); ++i) {
    Utterance u;
    u.conversation_id = "c";
    u.utterance_id = "u" + std::to_string(i);
    u.speaker_id = speakers[i];
    u.timestamp = static_cast<std::int64_t>(i);
    u.text = texts.empty() ? "t" + std::to_string(i) : texts[i];
    c.utterances.push_back(u);
  }
  return c;
}

std::string words(std::size_t n) {
  std::string s;
  for (std::size_t i = 0; i < n; ++i) s += (i ? " w" : "w") + std::to_string(i);
  return s;
}

Corpus labeled_corpus(std::size_t destructive, std::size_t constructive, std::uint64_t seed = 1) {
  Corpus corpus;
  Rng rng(seed);
  for (std::size_t i = 0; i < destructive + constructive; ++i) {
    Conversation c = conv_of({"a", "b"}, {words(1 + rng.uniform_index(30)), words(1 + rng.uniform_index(30))});
    c.conversation_id = "c" + std::to_string(i);
    for (auto& u : c.utterances) {
      u.conversation_id = c.conversation_id;
      u.utterance_id = c.conversation_id + u.utterance_id;
    }
    c.label = i < destructive ? Label::kDestructive : Label::kConstructive;
    corpus.conversations.push_back(c);
  }
  return corpus;
}

}  // namespace

TEST(ParseCorpus, GroupsRecordsByConversation) {
  const auto corpus = parse_jsonl(
      R"({"conversation_id":"c1","speaker_id":"a","timestamp":1,"text":"x"}
{"conversation_id":"c1","speaker_id":"b","timestamp":2,"text":"y"}
{"conversation_id":"c1","speaker_id":"a","timestamp":3,"text":"z"}
)");
  ASSERT_EQ(corpus.conversations.size(), 1u);
  EXPECT_EQ(corpus.conversations[0].utterances.size(), 3u);
}

TEST(ParseCorpus, SortsByTimestamp) {
  const auto corpus = parse_jsonl(
      R"({"conversation_id":"c","speaker_id":"a","timestamp":5,"text":"five"}
{"conversation_id":"c","speaker_id":"a","timestamp":3,"text":"three"}
{"conversation_id":"c","speaker_id":"a","timestamp":4,"text":"four"}
)");
  const auto& u = corpus.conversations[0].utterances;
  EXPECT_EQ(u[0].timestamp, 3);
  EXPECT_EQ(u[1].timestamp, 4);
  EXPECT_EQ(u[2].timestamp, 5);
}

TEST(ParseCorpus, TimestampTiesKeepInputOrder) {
  const auto corpus = parse_jsonl(
      R"({"conversation_id":"c","speaker_id":"a","timestamp":1,"text":"first"}
{"conversation_id":"c","speaker_id":"a","timestamp":1,"text":"second"}
)");
  EXPECT_EQ(corpus.conversations[0].utterances[0].text, "first");
}

TEST(ParseCorpus, MissingTextIsSchemaErrorAtLine) {
  try {
    parse_jsonl(R"({"conversation_id":"c","speaker_id":"a","timestamp":1,"text":"ok"}
{"conversation_id":"c","speaker_id":"a","timestamp":2}
)");
    FAIL() << "expected SchemaError";
  } catch (const SchemaError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(ParseCorpus, MalformedJsonIsParseError) {
  EXPECT_THROW(parse_jsonl("{not json}\n"), ParseError);
}

TEST(ParseCorpus, SynthesizesUtteranceIdsAndIndexTimestamps) {
  const auto corpus = parse_jsonl(
      R"({"conversation_id":"c","speaker_id":"a","text":"x"}
{"conversation_id":"c","speaker_id":"b","text":"y"}
)");
  const auto& u = corpus.conversations[0].utterances;
  EXPECT_EQ(u[0].utterance_id, "c:0");
  EXPECT_EQ(u[1].utterance_id, "c:1");
  EXPECT_EQ(u[1].timestamp, 1);
}

TEST(ParseCorpus, MixedStampedAndUnstampedIsError) {
  EXPECT_THROW(parse_jsonl(R"({"conversation_id":"c","speaker_id":"a","timestamp":4,"text":"x"}
{"conversation_id":"c","speaker_id":"b","text":"y"}
)"),
               SchemaError);
}

TEST(ParseCorpus, DuplicateUtteranceIdIsError) {
  EXPECT_THROW(parse_jsonl(R"({"conversation_id":"c","utterance_id":"u","speaker_id":"a","timestamp":1,"text":"x"}
{"conversation_id":"d","utterance_id":"u","speaker_id":"b","timestamp":2,"text":"y"}
)"),
               SchemaError);
}

TEST(ParseCorpus, NegativeTimestampIsError) {
  EXPECT_THROW(parse_jsonl(R"({"conversation_id":"c","speaker_id":"a","timestamp":-1,"text":"x"})"
                           "\n"),
               SchemaError);
}

TEST(ParseCorpus, CsvWithQuotedMultilineField) {
  std::istringstream in(
      "conversation_id,speaker_id,timestamp,text,label\n"
      "c1,a,1,\"hello, \"\"there\"\"\nsecond line\",destructive\n"
      "c1,b,2,reply,destructive\n");
  const auto corpus = parse_corpus(in, CorpusFormat::kCsv);
  ASSERT_EQ(corpus.conversations.size(), 1u);
  EXPECT_EQ(corpus.conversations[0].utterances[0].text, "hello, \"there\"\nsecond line");
  EXPECT_EQ(corpus.conversations[0].label, Label::kDestructive);
}

TEST(ParseCorpus, CsvMissingColumnIsSchemaError) {
  std::istringstream in("conversation_id,timestamp,text\nc,1,x\n");
  EXPECT_THROW(parse_corpus(in, CorpusFormat::kCsv), SchemaError);
}

TEST(ParseCorpus, LabelsFromSeparateCsv) {
  auto corpus = parse_jsonl(R"({"conversation_id":"c1","speaker_id":"a","timestamp":1,"text":"x"}
{"conversation_id":"c2","speaker_id":"a","timestamp":1,"text":"y"}
)");
  std::istringstream labels("conversation_id,label\nc1,destructive\nc2,constructive\n");
  attach_labels_csv(corpus, labels);
  EXPECT_EQ(corpus.conversations[0].label, Label::kDestructive);
  EXPECT_EQ(corpus.conversations[1].label, Label::kConstructive);
}

TEST(ParseCorpus, SerializeRoundTripIsIdentity) {
  Rng rng(3);
  Corpus corpus = labeled_corpus(3, 2);
  corpus.conversations[0].utterances[0].reply_to = "x";
  corpus.conversations[1].utterances[1].score = 12.5;
  corpus.conversations[2].utterances[0].text = "quote \"inside\"\nnew line \xC3\xA9";
  std::ostringstream out;
  write_corpus_jsonl(corpus, out, "abc");
  const auto back = parse_jsonl(out.str());
  ASSERT_EQ(back.conversations.size(), corpus.conversations.size());
  for (std::size_t i = 0; i < corpus.conversations.size(); ++i) {
    const auto& a = corpus.conversations[i];
    const auto& b = back.conversations[i];
    EXPECT_EQ(a.conversation_id, b.conversation_id);
    EXPECT_EQ(a.label, b.label);
    ASSERT_EQ(a.utterances.size(), b.utterances.size());
    for (std::size_t k = 0; k < a.utterances.size(); ++k) {
      EXPECT_EQ(a.utterances[k].utterance_id, b.utterances[k].utterance_id);
      EXPECT_EQ(a.utterances[k].speaker_id, b.utterances[k].speaker_id);
      EXPECT_EQ(a.utterances[k].timestamp, b.utterances[k].timestamp);
      EXPECT_EQ(a.utterances[k].text, b.utterances[k].text);
      EXPECT_EQ(a.utterances[k].reply_to, b.utterances[k].reply_to);
      EXPECT_EQ(a.utterances[k].score, b.utterances[k].score);
    }
  }
}

TEST(MergeTurns, MergesConsecutiveRuns) {
  EXPECT_EQ(merge_consecutive_turns(conv_of({"A", "A", "B"})).utterances.size(), 2u);
  EXPECT_EQ(merge_consecutive_turns(conv_of({"A", "B", "A"})).utterances.size(), 3u);
  const auto merged = merge_consecutive_turns(conv_of({"A", "A", "A"}, {"x", "y", "z"}));
  ASSERT_EQ(merged.utterances.size(), 1u);
  EXPECT_EQ(merged.utterances[0].text, "x y z");
  EXPECT_EQ(merged.utterances[0].utterance_id, "u0");
  EXPECT_EQ(merged.utterances[0].timestamp, 0);
}

TEST(StripMarkup, RemovesLinks) {
  EXPECT_EQ(strip_reddit_markup("see https://x.y for proof"), std::vector<std::string>{"see  for proof"});
}

TEST(StripMarkup, QuoteStartsNewSegment) {
  EXPECT_EQ(strip_reddit_markup("> quoted claim\nmy rebuttal\n\nmore text"),
            (std::vector<std::string>{"my rebuttal", "more text"}));
}

TEST(StripMarkup, PlainTextUnchanged) {
  EXPECT_EQ(strip_reddit_markup("no markup here"), std::vector<std::string>{"no markup here"});
}

TEST(StripMarkup, MarkdownLinkKeepsText) {
  const auto out = strip_reddit_markup("read [the study](https://example.org/a) first");
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].find("https"), std::string::npos);
  EXPECT_NE(out[0].find("the study"), std::string::npos);
}

TEST(StripMarkup, EverythingStrippedLeavesOneSegment) {
  EXPECT_EQ(strip_reddit_markup("> only a quote").size(), 1u);
}

TEST(SplitLong, HundredTwentyWordsGiveFiftyFiftyTwenty) {
  const auto out = split_long_utterances(conv_of({"a"}, {words(120)}), 50);
  ASSERT_EQ(out.utterances.size(), 3u);
  EXPECT_EQ(split_whitespace(out.utterances[0].text).size(), 50u);
  EXPECT_EQ(split_whitespace(out.utterances[1].text).size(), 50u);
  EXPECT_EQ(split_whitespace(out.utterances[2].text).size(), 20u);
  EXPECT_EQ(out.utterances[0].utterance_id, "u0#1");
  EXPECT_EQ(out.utterances[2].utterance_id, "u0#3");
  EXPECT_EQ(out.utterances[2].speaker_id, "a");
}

TEST(SplitLong, BoundaryAndEmptyUnchanged) {
  EXPECT_EQ(split_long_utterances(conv_of({"a"}, {words(50)}), 50).utterances.size(), 1u);
  const auto empty = split_long_utterances(conv_of({"a"}, {""}), 50);
  ASSERT_EQ(empty.utterances.size(), 1u);
  EXPECT_EQ(empty.utterances[0].utterance_id, "u0");
}

TEST(SplitLong, PreservesWordMultiset) {
  Rng rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::string> texts;
    std::vector<std::string> speakers;
    for (int i = 0; i < 5; ++i) {
      texts.push_back(words(rng.uniform_index(140)));
      speakers.push_back("s" + std::to_string(i % 2));
    }
    const auto conv = conv_of(speakers, texts);
    const std::size_t max_words = 1 + rng.uniform_index(60);
    const auto out = split_long_utterances(conv, max_words);
    std::multiset<std::string> before, after;
    for (const auto& u : conv.utterances)
      for (auto w : split_whitespace(u.text)) before.insert(std::string(w));
    for (const auto& u : out.utterances) {
      const auto ws = split_whitespace(u.text);
      EXPECT_LE(ws.size(), max_words);
      for (auto w : ws) after.insert(std::string(w));
    }
    EXPECT_EQ(before, after);
  }
}

TEST(SplitLong, ZeroMaxWordsIsError) {
  EXPECT_THROW(split_long_utterances(conv_of({"a"}), 0), ValidationError);
}

TEST(Balance, IdenticalConfoundersAlreadyBalancedKeepsAll) {
  Corpus corpus;
  for (int i = 0; i < 20; ++i) {
    Conversation c = conv_of({"a", "b"}, {"same words here", "same words here"});
    c.conversation_id = "c" + std::to_string(i);
    for (auto& u : c.utterances) u.utterance_id = c.conversation_id + u.utterance_id;
    c.label = i < 10 ? Label::kDestructive : Label::kConstructive;
    corpus.conversations.push_back(c);
  }
  const auto out = balance_by_confounders(corpus, default_confounders(), 5);
  EXPECT_EQ(out.conversations.size(), 20u);
}

TEST(Balance, SingleBinDownsamplesLargerClass) {
  Corpus corpus = labeled_corpus(6, 2);
  // A constant confounder puts every conversation in one bin.
  const Confounder constant{"constant", [](const Conversation&) { return std::optional<double>(1.0); }};
  const auto out = balance_by_confounders(corpus, std::span(&constant, 1), 3);
  std::size_t d = 0, c = 0;
  for (const auto& conv : out.conversations) (conv.label == Label::kDestructive ? d : c)++;
  EXPECT_EQ(d, 2u);
  EXPECT_EQ(c, 2u);
}

TEST(Balance, OutputIsBalancedSubsetAndDeterministic) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Corpus corpus = labeled_corpus(40 + seed, 25, seed);
    const auto a = balance_by_confounders(corpus, default_confounders(), seed);
    const auto b = balance_by_confounders(corpus, default_confounders(), seed);
    std::size_t d = 0, c = 0;
    std::set<std::string> ids;
    for (const auto& conv : corpus.conversations) ids.insert(conv.conversation_id);
    ASSERT_EQ(a.conversations.size(), b.conversations.size());
    for (std::size_t i = 0; i < a.conversations.size(); ++i) {
      EXPECT_EQ(a.conversations[i].conversation_id, b.conversations[i].conversation_id);
      EXPECT_TRUE(ids.count(a.conversations[i].conversation_id));
      (a.conversations[i].label == Label::kDestructive ? d : c)++;
    }
    EXPECT_EQ(d, c);
  }
}

TEST(Balance, UnlabeledIsError) {
  Corpus corpus = labeled_corpus(2, 2);
  corpus.conversations[0].label = Label::kUnlabeled;
  EXPECT_THROW(balance_by_confounders(corpus, default_confounders(), 0), ValidationError);
}

TEST(BalancedResample, HalfPerClass) {
  std::vector<Label> labels;
  for (int i = 0; i < 37; ++i) labels.push_back(i % 3 ? Label::kConstructive : Label::kDestructive);
  const auto sample = balanced_resample(labels, 500, 4);
  ASSERT_EQ(sample.size(), 500u);
  std::size_t d = 0;
  for (auto i : sample) d += labels[i] == Label::kDestructive;
  EXPECT_EQ(d, 250u);
  EXPECT_EQ(sample, balanced_resample(labels, 500, 4));
}

TEST(BalancedResample, ForcedPairAndErrors) {
  const std::vector<Label> two{Label::kDestructive, Label::kConstructive};
  auto s = balanced_resample(two, 2, 0);
  std::sort(s.begin(), s.end());
  EXPECT_EQ(s, (std::vector<std::size_t>{0, 1}));
  const std::vector<Label> one_class{Label::kDestructive, Label::kDestructive};
  EXPECT_THROW(balanced_resample(one_class, 2, 0), ValidationError);
  EXPECT_THROW(balanced_resample(two, 3, 0), ValidationError);
}

TEST(TrainTestSplit, StratifiedEightyTwenty) {
  const Corpus corpus = labeled_corpus(50, 50);
  const auto split = train_test_split(corpus, 0.2, 8);
  EXPECT_EQ(split.train.conversations.size(), 80u);
  EXPECT_EQ(split.test.conversations.size(), 20u);
  std::size_t d = 0;
  for (const auto& c : split.test.conversations) d += c.label == Label::kDestructive;
  EXPECT_EQ(d, 10u);
  const auto again = train_test_split(corpus, 0.2, 8);
  for (std::size_t i = 0; i < 20; ++i) {
    EXPECT_EQ(split.test.conversations[i].conversation_id, again.test.conversations[i].conversation_id);
  }
}

TEST(TrainTestSplit, FloorOfOnePerClass) {
  const auto split = train_test_split(labeled_corpus(2, 2), 0.5, 1);
  ASSERT_EQ(split.test.conversations.size(), 2u);
  EXPECT_NE(split.test.conversations[0].label, split.test.conversations[1].label);
}

TEST(TrainTestSplit, PartitionProperty) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Corpus corpus = labeled_corpus(3 + seed, 7 + 2 * seed, seed);
    std::vector<Label> labels;
    for (const auto& c : corpus.conversations) labels.push_back(c.label);
    const auto split = stratified_split(labels, 0.3, seed);
    std::vector<std::size_t> all = split.train;
    all.insert(all.end(), split.test.begin(), split.test.end());
    std::sort(all.begin(), all.end());
    EXPECT_EQ(all.size(), corpus.conversations.size());
    EXPECT_TRUE(std::adjacent_find(all.begin(), all.end()) == all.end());
    EXPECT_EQ(split.test.size(),
              static_cast<std::size_t>(std::llround(0.3 * static_cast<double>(corpus.conversations.size()))));
  }
}

TEST(TrainTestSplit, TooFewPerClassIsError) {
  EXPECT_THROW(train_test_split(labeled_corpus(1, 5), 0.2, 0), ValidationError);
}

TEST(ConfounderValues, MetaScoreAbsentWithoutScores) {
  const auto meta = find_confounder("meta_score_per_chat");
  ASSERT_TRUE(meta.has_value());
  EXPECT_FALSE(meta->value(conv_of({"a"})).has_value());
  const auto length = find_confounder("conversation_length");
  ASSERT_TRUE(length.has_value());
  EXPECT_DOUBLE_EQ(*length->value(conv_of({"a", "b", "a"})), 3.0);
}
