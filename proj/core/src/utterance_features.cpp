#include "convoforge/utterance_features.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <regex>
#include <set>
#include <unordered_set>

#include "convoforge/corpus.hpp"

namespace convoforge {

QuantityFeatures quantity_features(const TokenizedUtterance& tok) {
  QuantityFeatures q;
  q.num_words = static_cast<double>(tok.num_words);
  q.num_chars = static_cast<double>(tok.num_chars);
  q.num_messages = 1.0;
  return q;
}

std::map<std::string, double> lexical_rates(const TokenizedUtterance& tok,
                                            std::span<const Lexicon> lexicons) {
  std::map<std::string, double> rates;
  for (const auto& lex : lexicons) {
    rates[lex.name()] = rate_per_100(count_matches(tok.tokens, lex), tok.num_words);
  }
  return rates;
}

double type_token_ratio(const TokenizedUtterance& tok) {
  if (tok.num_words == 0) return 0.0;
  const std::unordered_set<std::string> types(tok.tokens.begin(), tok.tokens.end());
  return static_cast<double>(types.size()) / static_cast<double>(tok.num_words);
}

namespace {

const std::unordered_set<std::string>& first_person_pronouns() {
  static const std::unordered_set<std::string> words = {
      "i", "me", "my", "mine", "myself", "we", "us", "our", "ours", "ourselves"};
  return words;
}

const std::unordered_set<std::string>& first_person_singular() {
  static const std::unordered_set<std::string> words = {"i", "me", "my", "mine", "myself"};
  return words;
}

std::size_t count_in(std::span<const std::string> tokens,
                     const std::unordered_set<std::string>& words) {
  return static_cast<std::size_t>(
      std::count_if(tokens.begin(), tokens.end(), [&](const std::string& t) { return words.contains(t); }));
}

}  // namespace

double first_person_proportion(const TokenizedUtterance& tok) {
  if (tok.num_words == 0) return 0.0;
  return static_cast<double>(count_in(tok.tokens, first_person_pronouns())) /
         static_cast<double>(tok.num_words);
}

double information_exchange_raw(const TokenizedUtterance& tok) {
  return static_cast<double>(tok.num_words - count_in(tok.tokens, first_person_singular()));
}

std::vector<double> zscore_population(std::span<const double> values) {
  std::vector<double> z(values.size(), 0.0);
  if (values.size() < 2) return z;
  double mean = 0.0;
  for (const double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double var = 0.0;
  for (const double v : values) var += (v - mean) * (v - mean);
  var /= static_cast<double>(values.size());
  const double sd = std::sqrt(var);
  if (!(sd > 0.0)) return z;
  for (std::size_t i = 0; i < values.size(); ++i) z[i] = (values[i] - mean) / sd;
  return z;
}

double dale_chall(const TokenizedUtterance& tok, const Lexicon& easy_words) {
  if (tok.sentences.empty() || tok.num_words == 0) return 0.0;
  const auto difficult = static_cast<double>(
      std::count_if(tok.tokens.begin(), tok.tokens.end(),
                    [&](const std::string& t) { return !easy_words.matches(t); }));
  const auto words = static_cast<double>(tok.num_words);
  return 0.1579 * (100.0 * difficult / words) +
         0.0496 * (words / static_cast<double>(tok.sentences.size()));
}

PolaritySubjectivity polarity_subjectivity(const TokenizedUtterance& tok,
                                           const ScoredLexicon& polarity) {
  PolaritySubjectivity out;
  double total = 0.0;
  std::size_t matched = 0;
  for (const auto& t : tok.tokens) {
    if (const double* s = polarity.find(t)) {
      total += *s;
      ++matched;
    }
  }
  if (matched == 0) return out;
  out.polarity = std::clamp(total / static_cast<double>(matched), -1.0, 1.0);
  out.subjectivity =
      std::clamp(static_cast<double>(matched) / static_cast<double>(tok.num_words), 0.0, 1.0);
  return out;
}

double scored_lexicon_average(const TokenizedUtterance& tok, const ScoredLexicon& lexicon) {
  double total = 0.0;
  std::size_t matched = 0;
  for (const auto& t : tok.tokens) {
    if (const double* s = lexicon.find(t)) {
      total += *s;
      ++matched;
    }
  }
  return matched == 0 ? 0.0 : total / static_cast<double>(matched);
}

namespace {

std::size_t count_regex(const std::string& text, const std::regex& re) {
  return static_cast<std::size_t>(
      std::distance(std::sregex_iterator(text.begin(), text.end(), re), std::sregex_iterator()));
}

std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto nl = text.find('\n', start);
    if (nl == std::string_view::npos) {
      lines.push_back(text.substr(start));
      break;
    }
    lines.push_back(text.substr(start, nl - start));
    start = nl + 1;
  }
  return lines;
}

std::string_view ltrim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t");
  return first == std::string_view::npos ? std::string_view() : s.substr(first);
}

bool is_all_caps_word(std::string_view word) {
  std::size_t letters = 0;
  for (const char c : word) {
    const auto u = static_cast<unsigned char>(c);
    if (std::isalpha(u)) {
      if (std::islower(u)) return false;
      ++letters;
    }
  }
  return letters >= 2;
}

// Decodes UTF-8 and counts code points in the common emoji blocks.
std::size_t count_unicode_emoji(std::string_view text) {
  std::size_t n = 0;
  std::size_t i = 0;
  while (i < text.size()) {
    const auto c = static_cast<unsigned char>(text[i]);
    std::uint32_t cp = 0;
    std::size_t len = 1;
    if (c < 0x80) {
      cp = c;
    } else if ((c >> 5) == 0x6) {
      cp = c & 0x1F;
      len = 2;
    } else if ((c >> 4) == 0xE) {
      cp = c & 0x0F;
      len = 3;
    } else if ((c >> 3) == 0x1E) {
      cp = c & 0x07;
      len = 4;
    }
    if (i + len > text.size()) break;
    for (std::size_t k = 1; k < len; ++k) {
      cp = (cp << 6) | (static_cast<unsigned char>(text[i + k]) & 0x3F);
    }
    if ((cp >= 0x1F300 && cp <= 0x1FAFF) || (cp >= 0x2600 && cp <= 0x27BF)) ++n;
    i += len;
  }
  return n;
}

}  // namespace

DiscussionTags discussion_tags(std::string_view text) {
  static const std::regex link_re(R"((https?://|www\.)\S+)", std::regex::icase);
  static const std::regex user_re(R"(\bu/[A-Za-z0-9_-]+)");
  static const std::regex emphasis_re(R"(\*\*[^*\n]+\*\*)");
  static const std::regex quote_re("\"[^\"\\n]+\"|\xE2\x80\x9C[^\n]*?\xE2\x80\x9D");
  static const std::regex numbered_re(R"(^\d+[.)]\s)");
  static const std::regex emoticon_re(R"([:;]-?[)(D])");

  DiscussionTags tags;
  const std::string owned(text);
  for (const auto word : split_whitespace(text)) tags.all_caps += is_all_caps_word(word) ? 1 : 0;
  tags.links = count_regex(owned, link_re);
  tags.reddit_users = count_regex(owned, user_re);
  tags.emphasis = count_regex(owned, emphasis_re);
  tags.quotes = count_regex(owned, quote_re);
  tags.line_breaks = static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));

  for (const auto raw : lines_of(text)) {
    const auto line = ltrim(raw);
    if (line.empty()) continue;
    if (line.front() == '>') ++tags.block_quote_responses;
    const bool dash_or_star = (line.front() == '-' || line.front() == '*') && line.size() > 1 &&
                              (line[1] == ' ' || line[1] == '\t');
    const bool bullet_glyph = line.starts_with("\xE2\x80\xA2");
    if (dash_or_star || bullet_glyph) ++tags.bullet_points;
    const std::string line_str(line);
    if (std::regex_search(line_str, numbered_re)) ++tags.numbered_points;
  }

  for (std::size_t i = 0; i < text.size();) {
    if (text[i] == '.') {
      std::size_t j = i;
      while (j < text.size() && text[j] == '.') ++j;
      if (j - i >= 3) ++tags.ellipses;
      i = j;
    } else if (text.substr(i).starts_with("\xE2\x80\xA6")) {
      ++tags.ellipses;
      i += 3;
    } else {
      ++i;
    }
  }

  std::size_t open = 0;
  for (const char c : text) {
    if (c == '(') {
      ++open;
    } else if (c == ')' && open > 0) {
      --open;
      ++tags.parentheses;
    }
  }

  tags.emoji = count_regex(owned, emoticon_re) + count_unicode_emoji(text);
  return tags;
}

namespace {

const std::vector<std::vector<std::string>>& hedge_phrases() {
  static const std::vector<std::vector<std::string>> phrases = {
      {"sort", "of"}, {"kind", "of"}, {"i", "guess"}, {"i", "think"},
      {"a", "little"}, {"maybe"}, {"possibly"}, {"probably"}};
  return phrases;
}

}  // namespace

HedgeScores hedges(const TokenizedUtterance& tok) {
  std::size_t count = 0;
  for (const auto& phrase : hedge_phrases()) {
    if (phrase.size() > tok.tokens.size()) continue;
    for (std::size_t i = 0; i + phrase.size() <= tok.tokens.size(); ++i) {
      if (std::equal(phrase.begin(), phrase.end(), tok.tokens.begin() + static_cast<std::ptrdiff_t>(i))) {
        ++count;
      }
    }
  }
  HedgeScores h;
  h.rate_per_100 = rate_per_100(count, tok.num_words);
  h.naive = count > 0 ? 1.0 : 0.0;
  return h;
}

QuestionRepair questions_and_repair(std::string_view text) {
  static const std::regex repair_re(
      R"(what\?+|sorry|excuse me|huh\??|who\?+|pardon\?+|say.*again\??|what'?s that|what is that)",
      std::regex::icase);
  QuestionRepair q;
  q.num_question_naive = static_cast<double>(std::count(text.begin(), text.end(), '?'));
  const std::string owned(text);
  q.repair = std::regex_search(owned, repair_re) ? 1.0 : 0.0;
  return q;
}

void TermFrequencies::add(std::span<const std::string> tokens) {
  for (const auto& t : tokens) ++counts_[t];
}

std::size_t TermFrequencies::count(const std::string& word) const {
  const auto it = counts_.find(word);
  return it == counts_.end() ? 0 : it->second;
}

std::vector<Accommodation> accommodation(std::span<const TokenizedUtterance> turns,
                                         const Lexicon& function_words,
                                         const TermFrequencies& tf) {
  std::vector<Accommodation> out(turns.size());
  for (std::size_t t = 1; t < turns.size(); ++t) {
    const std::unordered_set<std::string> previous(turns[t - 1].tokens.begin(),
                                                   turns[t - 1].tokens.end());
    for (const auto& token : turns[t].tokens) {
      if (!previous.contains(token)) continue;
      if (function_words.matches(token)) {
        out[t].function_word += 1.0;
      } else {
        const std::size_t freq = tf.count(token);
        if (freq > 0) out[t].content_word += 1.0 / static_cast<double>(freq);
      }
    }
  }
  return out;
}

std::vector<FlowScores> vector_flow(std::span<const Vector> embeddings) {
  std::vector<FlowScores> out(embeddings.size());
  if (embeddings.empty()) return out;
  Vector running_sum(embeddings[0].begin(), embeddings[0].end());
  double mimicry_sum = 0.0;
  for (std::size_t t = 1; t < embeddings.size(); ++t) {
    out[t].mimicry = cosine(embeddings[t], embeddings[t - 1]);
    mimicry_sum += out[t].mimicry;
    out[t].moving_mimicry = mimicry_sum / static_cast<double>(t);
    // cosine is scale-invariant, so the running sum stands in for the mean.
    out[t].forward_flow = cosine(embeddings[t], running_sum);
    for (std::size_t k = 0; k < running_sum.size(); ++k) running_sum[k] += embeddings[t][k];
  }
  return out;
}

std::vector<double> time_diff(std::span<const std::int64_t> timestamps) {
  std::vector<double> out(timestamps.size(), 0.0);
  for (std::size_t i = 1; i < timestamps.size(); ++i) {
    out[i] = static_cast<double>(timestamps[i] - timestamps[i - 1]);
  }
  return out;
}

FeatureRow aggregate_mean(std::span<const FeatureRow> rows, std::span<const std::string> sum_features) {
  FeatureRow totals;
  std::map<std::string, std::size_t> counts;
  for (const auto& row : rows) {
    for (const auto& [name, value] : row) {
      totals[name] += value;
      ++counts[name];
    }
  }
  const std::set<std::string> summed(sum_features.begin(), sum_features.end());
  for (auto& [name, total] : totals) {
    if (!summed.contains(name)) total /= static_cast<double>(counts[name]);
  }
  return totals;
}

}  // namespace convoforge
