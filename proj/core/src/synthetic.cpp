#include "convoforge/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "convoforge/error.hpp"
#include "convoforge/random.hpp"

namespace convoforge {

namespace {

constexpr std::array<std::array<std::string_view, 10>, 8> kTopicWords{{
    {"budget", "tax", "policy", "spending", "deficit", "revenue", "economy", "inflation", "wages", "markets"},
    {"climate", "carbon", "energy", "solar", "emissions", "warming", "nuclear", "grid", "fuel", "weather"},
    {"school", "teacher", "students", "tuition", "classroom", "degree", "exam", "college", "homework", "campus"},
    {"vaccine", "doctor", "hospital", "insurance", "patient", "medicine", "clinic", "treatment", "nurse", "disease"},
    {"game", "team", "season", "coach", "league", "player", "score", "match", "stadium", "playoff"},
    {"phone", "software", "privacy", "internet", "device", "app", "browser", "server", "update", "code"},
    {"movie", "album", "series", "actor", "novel", "director", "music", "episode", "author", "film"},
    {"housing", "rent", "city", "transit", "zoning", "suburb", "traffic", "landlord", "mortgage", "neighborhood"},
}};

constexpr std::array<std::string_view, 24> kFiller{
    "the", "a", "we", "i", "think", "that", "is", "it", "about", "because",
    "and", "this", "would", "should", "people", "point", "some", "maybe", "view", "really",
    "not", "so", "when", "there"};

// Negative-affect lexicon entries outside the polarity list and the
// politeness/receptiveness negativity markers, so the lexicon rate carries
// the signal rather than being split across near-duplicate features.
constexpr std::array<std::string_view, 12> kNegative{
    "stupidity", "idiots", "idiocy", "ruined", "ruining", "insulting",
    "insults", "lies", "lying", "fools", "morons", "liars"};

// Turn order with balanced airtime and mostly alternating speakers.
std::vector<std::size_t> balanced_order(std::size_t n, std::size_t speakers, Rng& rng) {
  std::vector<std::size_t> order;
  std::size_t prev = rng.uniform_index(speakers);
  order.push_back(prev);
  while (order.size() < n) {
    std::size_t next = prev;
    if (rng.bernoulli(0.9)) {
      next = (prev + 1 + rng.uniform_index(speakers - 1)) % speakers;
    }
    order.push_back(next);
    prev = next;
  }
  return order;
}

// One dominant speaker with >= 70% of messages, posted in long runs.
std::vector<std::size_t> dominated_order(std::size_t n, std::size_t speakers, Rng& rng) {
  const std::size_t dominant = rng.uniform_index(speakers);
  const auto min_dom = static_cast<std::size_t>(std::ceil(0.7 * static_cast<double>(n)));
  const std::size_t n_dom = std::min(n - 1, min_dom + rng.uniform_index(n - min_dom));
  const std::size_t n_other = n - n_dom;
  // Other speakers' messages come in at most two blocks.
  const std::size_t blocks = n_other >= 2 && rng.bernoulli(0.5) ? 2 : 1;
  std::vector<std::size_t> block_sizes(blocks, n_other / blocks);
  block_sizes[0] += n_other % blocks;
  std::vector<std::size_t> dom_runs(blocks + 1, n_dom / (blocks + 1));
  for (std::size_t i = 0; i < n_dom % (blocks + 1); ++i) ++dom_runs[i];

  std::vector<std::size_t> order;
  for (std::size_t b = 0; b <= blocks; ++b) {
    order.insert(order.end(), dom_runs[b], dominant);
    if (b < blocks) {
      const std::size_t other = (dominant + 1 + rng.uniform_index(speakers - 1)) % speakers;
      order.insert(order.end(), block_sizes[b], other);
    }
  }
  return order;
}

std::vector<std::size_t> interleave(const std::vector<std::size_t>& order) {
  std::vector<std::size_t> counts;
  for (const std::size_t s : order) {
    if (s >= counts.size()) counts.resize(s + 1, 0);
    ++counts[s];
  }
  const auto dominant = static_cast<std::size_t>(std::max_element(counts.begin(), counts.end()) - counts.begin());
  std::vector<std::size_t> others;
  for (const std::size_t s : order) {
    if (s != dominant) others.push_back(s);
  }
  const std::size_t n = order.size();
  std::vector<std::size_t> out(n, dominant);
  // Other messages land at evenly spaced odd positions.
  for (std::size_t j = 0; j < others.size(); ++j) {
    out[std::min(n - 1, (2 * j + 1) * n / (2 * others.size() + 1))] = others[j];
  }
  return out;
}

std::string make_text(std::size_t topic, double negative_rate, Rng& rng) {
  const std::size_t words = 8 + rng.uniform_index(10);
  const bool negative = rng.bernoulli(negative_rate);
  const std::size_t negative_slot = rng.uniform_index(words);
  std::string text;
  for (std::size_t w = 0; w < words; ++w) {
    if (!text.empty()) text += ' ';
    if (negative && w == negative_slot) {
      text += kNegative[rng.uniform_index(kNegative.size())];
    } else if (rng.bernoulli(0.4)) {
      text += kTopicWords[topic][rng.uniform_index(kTopicWords[topic].size())];
    } else {
      text += kFiller[rng.uniform_index(kFiller.size())];
    }
  }
  text += rng.bernoulli(0.2) ? "?" : ".";
  return text;
}

}  // namespace

Corpus generate_synthetic_corpus(const SyntheticOptions& options) {
  if (options.n_conversations < 2) throw ValidationError("synthetic corpus needs at least 2 conversations");
  if (options.min_utterances < 4 || options.max_utterances < options.min_utterances) {
    throw ValidationError("synthetic corpus: need 4 <= min_utterances <= max_utterances");
  }
  Rng rng(options.seed);
  Corpus corpus;
  corpus.provenance = Provenance::kSynthetic;
  const auto n_destructive = static_cast<std::size_t>(
      std::llround(options.destructive_share * static_cast<double>(options.n_conversations)));
  std::vector<Label> labels(options.n_conversations, Label::kConstructive);
  std::fill_n(labels.begin(), std::min(n_destructive, labels.size()), Label::kDestructive);
  rng.shuffle(std::span<Label>(labels));

  for (std::size_t c = 0; c < options.n_conversations; ++c) {
    const bool destructive = labels[c] == Label::kDestructive;
    auto signal = [&] { return rng.bernoulli(options.flip_probability) ? !destructive : destructive; };
    const bool negative = signal();
    const bool dominated = signal();
    const bool runs = signal();

    const std::size_t n = options.min_utterances +
                          rng.uniform_index(options.max_utterances - options.min_utterances + 1);
    const std::size_t speakers = 2 + rng.uniform_index(3);
    std::vector<std::size_t> order;
    if (dominated) {
      order = dominated_order(n, speakers, rng);
      // Dominance without runs: interleave the other speakers' messages as
      // single turns spread across the conversation.
      if (!runs) order = interleave(order);
    } else {
      order = balanced_order(n, speakers, rng);
      // Runs without dominance: group messages by speaker.
      if (runs) std::stable_sort(order.begin(), order.end());
    }

    Conversation conv;
    conv.conversation_id = "syn" + std::to_string(c);
    conv.label = labels[c];
    const std::size_t topic = rng.uniform_index(kTopicWords.size());
    std::int64_t t = 1600000000 + static_cast<std::int64_t>(rng.uniform_index(1000000));
    const double rate = negative ? options.destructive_negative_rate : options.constructive_negative_rate;
    for (std::size_t i = 0; i < n; ++i) {
      Utterance u;
      u.conversation_id = conv.conversation_id;
      u.utterance_id = conv.conversation_id + "_" + std::to_string(i);
      u.speaker_id = "speaker" + std::to_string(order[i] + 1);
      u.timestamp = t;
      u.text = make_text(topic, rate, rng);
      conv.utterances.push_back(std::move(u));
      t += 30 + static_cast<std::int64_t>(rng.uniform_index(600));
    }
    corpus.conversations.push_back(std::move(conv));
  }
  return corpus;
}

}  // namespace convoforge
