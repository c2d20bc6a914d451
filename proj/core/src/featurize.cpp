#include "convoforge/featurize.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <set>
#include <thread>

#include "convoforge/conversation_features.hpp"
#include "convoforge/csv.hpp"
#include "convoforge/error.hpp"
#include "convoforge/random.hpp"

namespace convoforge {

std::optional<std::size_t> FeatureTable::column_index(std::string_view name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == name) return i;
  }
  return std::nullopt;
}

std::vector<double> FeatureTable::column(std::size_t c) const {
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& row : rows) out.push_back(row[c]);
  return out;
}

namespace {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void FeatureTable::write_csv(std::ostream& out, std::string_view comment) const {
  if (!comment.empty()) out << "# " << comment << '\n';
  std::vector<std::string> header = {"conversation_id", "label"};
  header.insert(header.end(), columns.begin(), columns.end());
  csv::write_row(out, header);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    std::vector<std::string> fields = {conversation_ids[r], std::string(to_string(labels[r]))};
    for (const double v : rows[r]) fields.push_back(format_double(v));
    csv::write_row(out, fields);
  }
}

FeatureTable FeatureTable::read_csv(std::istream& in) {
  csv::Reader reader(in);
  const auto header = reader.next();
  if (!header || header->size() < 2 || (*header)[0] != "conversation_id" || (*header)[1] != "label") {
    throw ParseError(reader.line(), "feature CSV must start with conversation_id,label");
  }
  FeatureTable table;
  table.columns.assign(header->begin() + 2, header->end());
  while (auto row = reader.next()) {
    if (row->size() != header->size()) {
      throw ParseError(reader.line(), "expected " + std::to_string(header->size()) + " fields");
    }
    table.conversation_ids.push_back((*row)[0]);
    try {
      table.labels.push_back(parse_label((*row)[1]));
    } catch (const ValidationError& e) {
      throw SchemaError(reader.line(), e.what());
    }
    std::vector<double> values;
    values.reserve(table.columns.size());
    for (std::size_t c = 2; c < row->size(); ++c) {
      try {
        std::size_t used = 0;
        const double v = std::stod((*row)[c], &used);
        if (used != (*row)[c].size() || !std::isfinite(v)) throw std::invalid_argument("bad");
        values.push_back(v);
      } catch (const std::exception&) {
        throw SchemaError(reader.line(), "column '" + table.columns[c - 2] + "' is not a finite number");
      }
    }
    table.rows.push_back(std::move(values));
  }
  return table;
}

namespace {

double zscore_with(double value, double mean, double sd) {
  return sd > 0.0 ? (value - mean) / sd : 0.0;
}

std::uint64_t id_hash(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

std::vector<FeatureRow> utterance_feature_rows(const Conversation& conv,
                                               std::span<const TokenizedUtterance> tokens,
                                               const Resources& resources,
                                               const VectorProvider& vectors,
                                               const FeaturizeOptions& options,
                                               const CorpusStats& stats) {
  const std::size_t n = conv.utterances.size();
  std::vector<FeatureRow> rows(n);
  std::vector<Vector> embeddings;
  std::vector<double> info_raw, positivity;
  std::vector<std::int64_t> stamps;
  embeddings.reserve(n);

  for (std::size_t i = 0; i < n; ++i) {
    const Utterance& u = conv.utterances[i];
    const TokenizedUtterance& tok = tokens[i];
    FeatureRow& row = rows[i];

    const auto q = quantity_features(tok);
    row["num_words"] = q.num_words;
    row["num_chars"] = q.num_chars;
    row["num_messages"] = q.num_messages;

    for (const auto& [name, rate] : lexical_rates(tok, resources.category_lexicons)) {
      row[name + std::string(kLexicalSuffix)] = rate;
    }
    const auto h = hedges(tok);
    row[std::string(kHedgeWordsCategory) + std::string(kLexicalSuffix)] = h.rate_per_100;
    row["hedge_naive"] = h.naive;

    const auto qr = questions_and_repair(u.text);
    row["num_question_naive"] = qr.num_question_naive;
    row["NTRI"] = qr.repair;

    row["word_TTR"] = type_token_ratio(tok);
    row["first_pronouns_proportion"] = first_person_proportion(tok);
    row["dale_chall_score"] = dale_chall(tok, resources.easy_words);

    const auto ps = polarity_subjectivity(tok, resources.polarity);
    row["textblob_polarity"] = ps.polarity;
    row["textblob_subjectivity"] = ps.subjectivity;
    row["certainty_rocklage"] = scored_lexicon_average(tok, resources.certainty);

    const auto sentiment = vectors.sentiment(u.utterance_id, tok.tokens, resources.polarity);
    row["positive_bert"] = sentiment.positive;
    row["negative_bert"] = sentiment.negative;
    row["neutral_bert"] = sentiment.neutral;
    positivity.push_back(sentiment.positive);

    for (const auto& [marker, count] : match_pattern_set(u.text, tok.tokens, resources.politeness)) {
      row[marker] = static_cast<double>(count);
    }
    for (const auto& [marker, count] : match_pattern_set(u.text, tok.tokens, resources.receptiveness)) {
      row[marker] = static_cast<double>(count);
    }
    row["Token_count"] = static_cast<double>(tok.num_words);

    const auto tags = discussion_tags(u.text);
    row["num_all_caps"] = static_cast<double>(tags.all_caps);
    row["num_links"] = static_cast<double>(tags.links);
    row["num_reddit_users"] = static_cast<double>(tags.reddit_users);
    row["num_emphasis"] = static_cast<double>(tags.emphasis);
    row["num_bullet_points"] = static_cast<double>(tags.bullet_points);
    row["num_numbered_points"] = static_cast<double>(tags.numbered_points);
    row["num_line_breaks"] = static_cast<double>(tags.line_breaks);
    row["num_quotes"] = static_cast<double>(tags.quotes);
    row["num_block_quote_responses"] = static_cast<double>(tags.block_quote_responses);
    row["num_ellipses"] = static_cast<double>(tags.ellipses);
    row["num_parentheses"] = static_cast<double>(tags.parentheses);
    row["num_emoji"] = static_cast<double>(tags.emoji);

    info_raw.push_back(information_exchange_raw(tok));
    embeddings.push_back(vectors.embedding(u.utterance_id, u.text));
    stamps.push_back(u.timestamp);
  }

  const auto within_info = zscore_population(info_raw);
  const auto within_pos = zscore_population(positivity);
  const auto flows = vector_flow(embeddings);
  const auto gaps = time_diff(stamps);
  for (std::size_t i = 0; i < n; ++i) {
    rows[i]["info_exchange_zscore_chats"] =
        options.info_exchange_scope == ZScope::kWithinConversation
            ? within_info[i]
            : zscore_with(info_raw[i], stats.info_exchange_mean, stats.info_exchange_sd);
    rows[i]["positivity_zscore_chats"] =
        options.positivity_scope == ZScope::kWithinConversation
            ? within_pos[i]
            : zscore_with(positivity[i], stats.positivity_mean, stats.positivity_sd);
    rows[i]["mimicry_bert"] = flows[i].mimicry;
    rows[i]["moving_mimicry"] = flows[i].moving_mimicry;
    rows[i]["forward_flow"] = flows[i].forward_flow;
    rows[i]["time_diff"] = gaps[i];
  }
  return rows;
}

FeatureRow conversation_features(const Conversation& conv, const Resources& resources,
                                 const VectorProvider& vectors, const TermFrequencies& tf,
                                 const FeaturizeOptions& options, const CorpusStats& stats) {
  if (conv.utterances.empty()) {
    throw ValidationError("conversation '" + conv.conversation_id + "' has no utterances");
  }
  std::vector<TokenizedUtterance> tokens;
  tokens.reserve(conv.utterances.size());
  for (const auto& u : conv.utterances) tokens.push_back(tokenize(u.text));

  const auto rows = utterance_feature_rows(conv, tokens, resources, vectors, options, stats);
  const std::vector<std::string> summed = {"num_messages"};
  FeatureRow out = aggregate_mean(rows, summed);

  // Accommodation runs over merged turns.
  const Conversation turns = merge_consecutive_turns(conv);
  std::vector<TokenizedUtterance> turn_tokens;
  for (const auto& t : turns.utterances) turn_tokens.push_back(tokenize(t.text));
  const auto acc = accommodation(turn_tokens, resources.function_words, tf);
  double fwa = 0.0, cwa = 0.0;
  for (const auto& a : acc) {
    fwa += a.function_word;
    cwa += a.content_word;
  }
  out["function_word_accommodation"] = fwa / static_cast<double>(acc.size());
  out["content_word_accommodation"] = cwa / static_cast<double>(acc.size());

  std::vector<std::string> speakers;
  std::vector<std::int64_t> stamps;
  std::vector<Vector> embeddings;
  std::map<std::string, std::array<double, 3>> per_speaker;
  for (std::size_t i = 0; i < conv.utterances.size(); ++i) {
    const auto& u = conv.utterances[i];
    speakers.push_back(u.speaker_id);
    stamps.push_back(u.timestamp);
    embeddings.push_back(vectors.embedding(u.utterance_id, u.text));
    auto& totals = per_speaker[u.speaker_id];
    totals[0] += rows[i].at("num_words");
    totals[1] += rows[i].at("num_chars");
    totals[2] += rows[i].at("num_messages");
  }
  std::array<std::vector<double>, 3> sums;
  for (const auto& [speaker, totals] : per_speaker) {
    for (std::size_t k = 0; k < 3; ++k) sums[k].push_back(totals[k]);
  }
  out["gini_coefficient_sum_num_words"] = gini(sums[0]);
  out["gini_coefficient_sum_num_chars"] = gini(sums[1]);
  out["gini_coefficient_sum_num_messages"] = gini(sums[2]);
  out["turn_taking_index"] = turn_taking_index(speakers);
  out["team_burstiness"] = burstiness(stamps);

  const auto dd = discursive_diversity_family(speakers, embeddings, options.dd_as_distance);
  out["discursive_diversity"] = dd.discursive_diversity;
  out["variance_in_DD"] = dd.variance_in_dd;
  out["incongruent_modulation"] = dd.incongruent_modulation;
  out["within_person_disc_range"] = dd.within_person_disc_range;

  std::vector<std::vector<std::string>> docs;
  bool any_word = false;
  for (const auto& tok : tokens) {
    docs.push_back(lda_preprocess(tok.tokens, resources.stopwords));
    any_word = any_word || !docs.back().empty();
  }
  double info_div = 0.0;
  if (any_word) {
    LdaOptions lda;
    lda.num_topics = lda_topic_count(docs.size());
    lda.iterations = options.lda_iterations;
    lda.seed = mix_seed(options.lda_seed, id_hash(conv.conversation_id));
    info_div = information_diversity(fit_lda(docs, lda));
  }
  out["info_diversity"] = info_div;
  return out;
}

namespace {

CorpusStats corpus_stats(const Corpus& corpus, const Resources& resources,
                         const VectorProvider& vectors, const FeaturizeOptions& options,
                         TermFrequencies& tf) {
  const bool need_info = options.info_exchange_scope == ZScope::kAcrossCorpus;
  const bool need_pos = options.positivity_scope == ZScope::kAcrossCorpus;
  std::vector<double> info, pos;
  for (const auto& conv : corpus.conversations) {
    for (const auto& u : conv.utterances) {
      const auto tok = tokenize(u.text);
      tf.add(tok.tokens);
      if (need_info) info.push_back(information_exchange_raw(tok));
      if (need_pos) pos.push_back(vectors.sentiment(u.utterance_id, tok.tokens, resources.polarity).positive);
    }
  }
  const auto mean_sd = [](const std::vector<double>& v) -> std::pair<double, double> {
    if (v.empty()) return {0.0, 0.0};
    double mean = 0.0;
    for (const double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double var = 0.0;
    for (const double x : v) var += (x - mean) * (x - mean);
    return {mean, std::sqrt(var / static_cast<double>(v.size()))};
  };
  CorpusStats stats;
  std::tie(stats.info_exchange_mean, stats.info_exchange_sd) = mean_sd(info);
  std::tie(stats.positivity_mean, stats.positivity_sd) = mean_sd(pos);
  return stats;
}

}  // namespace

FeatureTable featurize_corpus(const Corpus& corpus, const Resources& resources,
                              const VectorProvider& vectors, const FeaturizeOptions& options) {
  TermFrequencies tf;
  const CorpusStats stats = corpus_stats(corpus, resources, vectors, options, tf);

  FeatureTable table;
  for (const auto& def : resources.registry.entries()) {
    if (def.category != FeatureCategory::kContentTopic) table.columns.push_back(def.name);
  }

  const std::size_t n = corpus.conversations.size();
  std::vector<FeatureRow> computed(n);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  const auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        computed[i] = conversation_features(corpus.conversations[i], resources, vectors, tf, options, stats);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = n;
      }
    }
  };
  const std::size_t jobs = std::max<std::size_t>(1, std::min(options.jobs, n));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> threads;
    for (std::size_t j = 0; j < jobs; ++j) threads.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  if (n > 0) {
    const std::set<std::string> expected(table.columns.begin(), table.columns.end());
    std::set<std::string> produced;
    for (const auto& [name, value] : computed[0]) produced.insert(name);
    for (const auto& name : produced) {
      if (!expected.contains(name)) {
        throw ValidationError("computed feature '" + name + "' is missing from the registry");
      }
    }
    for (const auto& name : expected) {
      if (!produced.contains(name)) {
        throw ValidationError("registry feature '" + name + "' is not computed by the featurizer");
      }
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    const auto& conv = corpus.conversations[i];
    table.conversation_ids.push_back(conv.conversation_id);
    table.labels.push_back(conv.label);
    std::vector<double> values;
    values.reserve(table.columns.size());
    for (const auto& name : table.columns) {
      const double v = computed[i].at(name);
      if (!std::isfinite(v)) {
        throw ValidationError("feature '" + name + "' is not finite for conversation '" +
                              conv.conversation_id + "'");
      }
      values.push_back(v);
    }
    table.rows.push_back(std::move(values));
  }
  return table;
}

void append_topic_columns(FeatureTable& table, std::span<const std::vector<double>> dummies,
                          const FeatureRegistry& registry) {
  const auto names = registry.names_where(FeatureCategory::kContentTopic);
  if (dummies.size() != table.rows.size()) {
    throw ValidationError("topic dummy rows do not match the feature table");
  }
  for (const auto& row : dummies) {
    if (row.size() != names.size()) {
      throw ValidationError("topic dummy width " + std::to_string(row.size()) +
                            " does not match the registry topic block (" +
                            std::to_string(names.size()) + ")");
    }
  }
  table.columns.insert(table.columns.end(), names.begin(), names.end());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    table.rows[r].insert(table.rows[r].end(), dummies[r].begin(), dummies[r].end());
  }
}

}  // namespace convoforge
