#include "convoforge/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <regex>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "convoforge/csv.hpp"
#include "convoforge/error.hpp"
#include "convoforge/random.hpp"
#include "json.hpp"

namespace convoforge {

using nlohmann::json;

std::string_view to_string(Label label) {
  switch (label) {
    case Label::kConstructive: return "constructive";
    case Label::kDestructive: return "destructive";
    case Label::kUnlabeled: return "unlabeled";
  }
  return "unlabeled";
}

Label parse_label(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "constructive" || lower == "0") return Label::kConstructive;
  if (lower == "destructive" || lower == "1") return Label::kDestructive;
  if (lower.empty() || lower == "unlabeled") return Label::kUnlabeled;
  throw ValidationError("unknown label '" + std::string(text) + "'");
}

std::string_view to_string(Provenance provenance) {
  switch (provenance) {
    case Provenance::kSynthetic: return "synthetic";
    case Provenance::kReddit: return "reddit";
    case Provenance::kOther: return "other";
  }
  return "other";
}

Provenance parse_provenance(std::string_view text) {
  if (text == "synthetic") return Provenance::kSynthetic;
  if (text == "reddit") return Provenance::kReddit;
  if (text == "other") return Provenance::kOther;
  throw ValidationError("unknown provenance '" + std::string(text) + "'");
}

int label_to_int(Label label) {
  switch (label) {
    case Label::kConstructive: return 0;
    case Label::kDestructive: return 1;
    case Label::kUnlabeled: break;
  }
  throw ValidationError("unlabeled conversation where a label is required");
}

std::vector<std::string_view> split_whitespace(std::string_view text) {
  std::vector<std::string_view> words;
  std::size_t i = 0;
  const auto is_space = [](char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
  };
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    const std::size_t start = i;
    while (i < text.size() && !is_space(text[i])) ++i;
    if (i > start) words.push_back(text.substr(start, i - start));
  }
  return words;
}

namespace {

struct RawRecord {
  std::size_t line = 0;
  Utterance utterance;
  bool has_timestamp = false;
  Label label = Label::kUnlabeled;
};

class CorpusBuilder {
 public:
  void add(RawRecord record) {
    const std::string& cid = record.utterance.conversation_id;
    auto [it, inserted] = index_.try_emplace(cid, groups_.size());
    if (inserted) groups_.emplace_back();
    groups_[it->second].push_back(std::move(record));
  }

  Corpus build(Provenance provenance) {
    Corpus corpus;
    corpus.provenance = provenance;
    std::unordered_set<std::string> seen_ids;
    for (auto& group : groups_) {
      Conversation conv;
      conv.conversation_id = group.front().utterance.conversation_id;
      const bool stamped = group.front().has_timestamp;
      for (std::size_t i = 0; i < group.size(); ++i) {
        RawRecord& rec = group[i];
        if (rec.has_timestamp != stamped) {
          throw SchemaError(rec.line, "conversation '" + conv.conversation_id +
                                          "' mixes records with and without timestamp");
        }
        if (!stamped) rec.utterance.timestamp = static_cast<std::int64_t>(i);
        if (rec.utterance.utterance_id.empty()) {
          rec.utterance.utterance_id = conv.conversation_id + ":" + std::to_string(i);
        }
        if (!seen_ids.insert(rec.utterance.utterance_id).second) {
          throw SchemaError(rec.line, "duplicate utterance_id '" + rec.utterance.utterance_id + "'");
        }
        if (rec.label != Label::kUnlabeled) {
          if (conv.label != Label::kUnlabeled && conv.label != rec.label) {
            throw SchemaError(rec.line, "conflicting labels for conversation '" +
                                            conv.conversation_id + "'");
          }
          conv.label = rec.label;
        }
      }
      std::stable_sort(group.begin(), group.end(), [](const RawRecord& a, const RawRecord& b) {
        return a.utterance.timestamp < b.utterance.timestamp;
      });
      conv.utterances.reserve(group.size());
      for (auto& rec : group) conv.utterances.push_back(std::move(rec.utterance));
      corpus.conversations.push_back(std::move(conv));
    }
    return corpus;
  }

 private:
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::vector<RawRecord>> groups_;
};

std::int64_t parse_timestamp(std::string_view text, std::size_t line) {
  try {
    std::size_t used = 0;
    const long long value = std::stoll(std::string(text), &used);
    if (used != text.size()) throw std::invalid_argument("trailing characters");
    if (value < 0) throw SchemaError(line, "negative timestamp");
    return value;
  } catch (const SchemaError&) {
    throw;
  } catch (const std::exception&) {
    throw SchemaError(line, "timestamp is not an integer: '" + std::string(text) + "'");
  }
}

Label record_label(std::string_view text, std::size_t line) {
  try {
    return parse_label(text);
  } catch (const ValidationError& e) {
    throw SchemaError(line, e.what());
  }
}

RawRecord record_from_json(const json& obj, std::size_t line) {
  if (!obj.is_object()) throw ParseError(line, "record is not a JSON object");
  RawRecord rec;
  rec.line = line;
  const auto required_string = [&](const char* key) -> std::string {
    const auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) {
      throw SchemaError(line, std::string("missing required field '") + key + "'");
    }
    if (!it->is_string()) throw SchemaError(line, std::string("field '") + key + "' must be a string");
    return it->get<std::string>();
  };
  Utterance& u = rec.utterance;
  u.conversation_id = required_string("conversation_id");
  if (u.conversation_id.empty()) throw SchemaError(line, "empty conversation_id");
  u.speaker_id = required_string("speaker_id");
  u.text = required_string("text");
  if (const auto it = obj.find("utterance_id"); it != obj.end() && !it->is_null()) {
    if (!it->is_string()) throw SchemaError(line, "field 'utterance_id' must be a string");
    u.utterance_id = it->get<std::string>();
  }
  if (const auto it = obj.find("timestamp"); it != obj.end() && !it->is_null()) {
    if (!it->is_number_integer()) throw SchemaError(line, "field 'timestamp' must be an integer");
    const auto value = it->get<std::int64_t>();
    if (value < 0) throw SchemaError(line, "negative timestamp");
    u.timestamp = value;
    rec.has_timestamp = true;
  }
  if (const auto it = obj.find("reply_to"); it != obj.end() && !it->is_null()) {
    if (!it->is_string()) throw SchemaError(line, "field 'reply_to' must be a string");
    u.reply_to = it->get<std::string>();
  }
  if (const auto it = obj.find("score"); it != obj.end() && !it->is_null()) {
    if (!it->is_number()) throw SchemaError(line, "field 'score' must be a number");
    u.score = it->get<double>();
  }
  if (const auto it = obj.find("label"); it != obj.end() && !it->is_null()) {
    if (!it->is_string()) throw SchemaError(line, "field 'label' must be a string");
    rec.label = record_label(it->get<std::string>(), line);
  }
  return rec;
}

Corpus parse_jsonl(std::istream& in, Provenance provenance) {
  CorpusBuilder builder;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(line_no, std::string("invalid JSON: ") + e.what());
    }
    builder.add(record_from_json(obj, line_no));
  }
  return builder.build(provenance);
}

Corpus parse_csv(std::istream& in, Provenance provenance) {
  csv::Reader reader(in);
  const auto header = reader.next();
  if (!header) throw ParseError(1, "missing CSV header row");
  std::unordered_map<std::string, std::size_t> column;
  for (std::size_t i = 0; i < header->size(); ++i) column[(*header)[i]] = i;
  for (const char* key : {"conversation_id", "speaker_id", "text"}) {
    if (!column.contains(key)) {
      throw SchemaError(reader.line(), std::string("missing required column '") + key + "'");
    }
  }
  const auto optional_column = [&](const char* key) -> std::optional<std::size_t> {
    const auto it = column.find(key);
    return it == column.end() ? std::nullopt : std::optional<std::size_t>(it->second);
  };
  const auto ts_col = optional_column("timestamp");
  const auto id_col = optional_column("utterance_id");
  const auto reply_col = optional_column("reply_to");
  const auto label_col = optional_column("label");
  const auto score_col = optional_column("score");

  CorpusBuilder builder;
  while (auto row = reader.next()) {
    const std::size_t line = reader.line();
    if (row->size() != header->size()) {
      throw ParseError(line, "expected " + std::to_string(header->size()) + " fields, got " +
                                 std::to_string(row->size()));
    }
    RawRecord rec;
    rec.line = line;
    Utterance& u = rec.utterance;
    u.conversation_id = (*row)[column["conversation_id"]];
    if (u.conversation_id.empty()) throw SchemaError(line, "empty conversation_id");
    u.speaker_id = (*row)[column["speaker_id"]];
    u.text = (*row)[column["text"]];
    if (id_col) u.utterance_id = (*row)[*id_col];
    if (ts_col && !(*row)[*ts_col].empty()) {
      u.timestamp = parse_timestamp((*row)[*ts_col], line);
      rec.has_timestamp = true;
    }
    if (reply_col && !(*row)[*reply_col].empty()) u.reply_to = (*row)[*reply_col];
    if (score_col && !(*row)[*score_col].empty()) {
      try {
        u.score = std::stod((*row)[*score_col]);
      } catch (const std::exception&) {
        throw SchemaError(line, "score is not a number");
      }
    }
    if (label_col) rec.label = record_label((*row)[*label_col], line);
    builder.add(std::move(rec));
  }
  return builder.build(provenance);
}

}  // namespace

Corpus parse_corpus(std::istream& in, CorpusFormat format, Provenance provenance) {
  return format == CorpusFormat::kJsonl ? parse_jsonl(in, provenance) : parse_csv(in, provenance);
}

void attach_labels_csv(Corpus& corpus, std::istream& in) {
  csv::Reader reader(in);
  const auto header = reader.next();
  if (!header) throw ParseError(1, "missing CSV header row");
  std::optional<std::size_t> id_col, label_col;
  for (std::size_t i = 0; i < header->size(); ++i) {
    if ((*header)[i] == "conversation_id") id_col = i;
    if ((*header)[i] == "label") label_col = i;
  }
  if (!id_col || !label_col) {
    throw SchemaError(reader.line(), "label CSV needs conversation_id and label columns");
  }
  std::unordered_map<std::string, Conversation*> by_id;
  for (auto& conv : corpus.conversations) by_id[conv.conversation_id] = &conv;
  while (auto row = reader.next()) {
    if (row->size() != header->size()) throw ParseError(reader.line(), "wrong field count");
    const auto it = by_id.find((*row)[*id_col]);
    if (it == by_id.end()) continue;
    it->second->label = record_label((*row)[*label_col], reader.line());
  }
}

void write_corpus_jsonl(const Corpus& corpus, std::ostream& out, std::string_view config_hash) {
  for (const auto& conv : corpus.conversations) {
    for (const auto& u : conv.utterances) {
      json obj = {{"conversation_id", u.conversation_id},
                  {"utterance_id", u.utterance_id},
                  {"speaker_id", u.speaker_id},
                  {"timestamp", u.timestamp},
                  {"text", u.text}};
      if (u.reply_to) obj["reply_to"] = *u.reply_to;
      if (u.score) obj["score"] = *u.score;
      if (conv.label != Label::kUnlabeled) obj["label"] = std::string(to_string(conv.label));
      if (!config_hash.empty()) obj["config_hash"] = std::string(config_hash);
      out << obj.dump() << '\n';
    }
  }
}

Conversation merge_consecutive_turns(const Conversation& conv) {
  Conversation merged;
  merged.conversation_id = conv.conversation_id;
  merged.label = conv.label;
  for (const auto& u : conv.utterances) {
    if (!merged.utterances.empty() && merged.utterances.back().speaker_id == u.speaker_id) {
      merged.utterances.back().text += ' ';
      merged.utterances.back().text += u.text;
    } else {
      merged.utterances.push_back(u);
    }
  }
  return merged;
}

namespace {

std::string trim(std::string_view s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string_view::npos) return {};
  const auto end = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(begin, end - begin + 1));
}

std::string remove_links(std::string_view text) {
  // Markdown links keep their visible text; bare URLs vanish.
  static const std::regex markdown_link(R"(\[([^\]]*)\]\([^)\s]*\))");
  static const std::regex url(R"(https?://\S+)", std::regex::icase);
  std::string out = std::regex_replace(std::string(text), markdown_link, "$1");
  return std::regex_replace(out, url, "");
}

bool is_block_quote(std::string_view line) {
  const auto first = line.find_first_not_of(" \t");
  return first != std::string_view::npos && line[first] == '>';
}

bool is_blank(std::string_view line) {
  return line.find_first_not_of(" \t\r") == std::string_view::npos;
}

}  // namespace

std::vector<std::string> strip_reddit_markup(std::string_view text) {
  const std::string cleaned = remove_links(text);
  std::vector<std::string> lines;
  {
    std::istringstream in(cleaned);
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
  }

  std::vector<std::string> segments;
  std::string current;
  const auto flush = [&] {
    std::string seg = trim(current);
    if (!seg.empty()) segments.push_back(std::move(seg));
    current.clear();
  };

  // in_reply: collecting the paragraph right after a quote.
  bool in_reply = false;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string& line = lines[i];
    if (is_block_quote(line)) {
      flush();
      in_reply = true;
      continue;
    }
    if (is_blank(line)) {
      if (in_reply && !trim(current).empty()) {
        flush();
        in_reply = false;
      }
      if (!current.empty()) current += '\n';
      continue;
    }
    if (!current.empty() && !trim(current).empty()) current += '\n';
    current += line;
  }
  flush();
  if (segments.empty()) segments.emplace_back();
  return segments;
}

Conversation apply_markup_stripping(const Conversation& conv) {
  Conversation out;
  out.conversation_id = conv.conversation_id;
  out.label = conv.label;
  for (const auto& u : conv.utterances) {
    const auto segments = strip_reddit_markup(u.text);
    for (std::size_t k = 0; k < segments.size(); ++k) {
      Utterance part = u;
      part.text = segments[k];
      if (k > 0) part.utterance_id = u.utterance_id + "@" + std::to_string(k);
      out.utterances.push_back(std::move(part));
    }
  }
  return out;
}

Conversation split_long_utterances(const Conversation& conv, std::size_t max_words) {
  if (max_words == 0) throw ValidationError("max_words must be at least 1");
  Conversation out;
  out.conversation_id = conv.conversation_id;
  out.label = conv.label;
  for (const auto& u : conv.utterances) {
    const auto words = split_whitespace(u.text);
    if (words.size() <= max_words) {
      out.utterances.push_back(u);
      continue;
    }
    std::size_t part_no = 1;
    for (std::size_t start = 0; start < words.size(); start += max_words, ++part_no) {
      const std::size_t end = std::min(words.size(), start + max_words);
      Utterance part = u;
      part.utterance_id = u.utterance_id + "#" + std::to_string(part_no);
      part.text.clear();
      for (std::size_t w = start; w < end; ++w) {
        if (w > start) part.text += ' ';
        part.text += words[w];
      }
      out.utterances.push_back(std::move(part));
    }
  }
  return out;
}

Conversation drop_thread_root(const Conversation& conv) {
  if (conv.utterances.size() <= 1) return conv;
  Conversation out = conv;
  out.utterances.erase(out.utterances.begin());
  return out;
}

namespace {

std::optional<double> mean_per_chat(const Conversation& conv,
                                    const std::function<double(const Utterance&)>& f) {
  if (conv.utterances.empty()) return 0.0;
  double total = 0.0;
  for (const auto& u : conv.utterances) total += f(u);
  return total / static_cast<double>(conv.utterances.size());
}

}  // namespace

std::vector<Confounder> default_confounders() {
  std::vector<Confounder> out;
  out.push_back({"conversation_length", [](const Conversation& c) -> std::optional<double> {
                   return static_cast<double>(c.utterances.size());
                 }});
  out.push_back({"words_per_chat", [](const Conversation& c) {
                   return mean_per_chat(c, [](const Utterance& u) {
                     return static_cast<double>(split_whitespace(u.text).size());
                   });
                 }});
  out.push_back({"chars_per_chat", [](const Conversation& c) {
                   return mean_per_chat(c, [](const Utterance& u) {
                     return static_cast<double>(std::count_if(
                         u.text.begin(), u.text.end(),
                         [](unsigned char ch) { return std::isalnum(ch) != 0; }));
                   });
                 }});
  out.push_back({"meta_score_per_chat", [](const Conversation& c) -> std::optional<double> {
                   double total = 0.0;
                   for (const auto& u : c.utterances) {
                     if (!u.score) return std::nullopt;
                     total += *u.score;
                   }
                   return c.utterances.empty() ? 0.0 : total / static_cast<double>(c.utterances.size());
                 }});
  return out;
}

std::optional<Confounder> find_confounder(std::string_view name) {
  for (auto& c : default_confounders()) {
    if (c.name == name) return c;
  }
  return std::nullopt;
}

namespace {

// Bin edges at the 10%, ..., 90% order statistics of the pooled values.
std::vector<int> decile_bins(std::span<const double> values) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> edges;
  for (std::size_t k = 1; k < 10; ++k) edges.push_back(sorted[k * sorted.size() / 10]);
  std::vector<int> bins;
  bins.reserve(values.size());
  for (const double v : values) {
    bins.push_back(static_cast<int>(std::upper_bound(edges.begin(), edges.end(), v) - edges.begin()));
  }
  return bins;
}

}  // namespace

Corpus balance_by_confounders(const Corpus& corpus, std::span<const Confounder> confounders,
                              std::uint64_t seed) {
  for (const auto& conv : corpus.conversations) {
    if (conv.label == Label::kUnlabeled) {
      throw ValidationError("cannot balance: conversation '" + conv.conversation_id +
                            "' is unlabeled");
    }
  }
  std::vector<std::size_t> kept(corpus.conversations.size());
  std::iota(kept.begin(), kept.end(), 0);
  Rng rng(seed);

  for (const auto& confounder : confounders) {
    std::vector<double> values;
    values.reserve(kept.size());
    bool available = true;
    for (const std::size_t i : kept) {
      const auto v = confounder.value(corpus.conversations[i]);
      if (!v) {
        available = false;
        break;
      }
      values.push_back(*v);
    }
    if (!available || kept.empty()) continue;

    const auto bins = decile_bins(values);
    std::map<int, std::vector<std::size_t>> destructive, constructive;
    for (std::size_t j = 0; j < kept.size(); ++j) {
      const Label label = corpus.conversations[kept[j]].label;
      (label == Label::kDestructive ? destructive : constructive)[bins[j]].push_back(kept[j]);
    }
    std::vector<std::size_t> next;
    for (int bin = 0; bin < 10; ++bin) {
      auto d = destructive[bin];
      auto c = constructive[bin];
      if (d.empty() || c.empty()) continue;
      auto& larger = d.size() > c.size() ? d : c;
      const std::size_t target = std::min(d.size(), c.size());
      rng.shuffle(std::span<std::size_t>(larger));
      larger.resize(target);
      next.insert(next.end(), d.begin(), d.end());
      next.insert(next.end(), c.begin(), c.end());
    }
    std::sort(next.begin(), next.end());
    kept = std::move(next);
  }

  Corpus out;
  out.provenance = corpus.provenance;
  for (const std::size_t i : kept) out.conversations.push_back(corpus.conversations[i]);
  return out;
}

std::vector<std::size_t> balanced_resample(std::span<const Label> labels, std::size_t n,
                                           std::uint64_t seed) {
  if (n % 2 != 0) throw ValidationError("balanced_resample needs an even sample size");
  std::vector<std::size_t> destructive, constructive;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == Label::kDestructive) destructive.push_back(i);
    if (labels[i] == Label::kConstructive) constructive.push_back(i);
  }
  if (destructive.empty() || constructive.empty()) {
    throw ValidationError("balanced_resample needs both classes present");
  }
  Rng rng(seed);
  std::vector<std::size_t> sample;
  sample.reserve(n);
  for (const auto* pool : {&destructive, &constructive}) {
    for (std::size_t k = 0; k < n / 2; ++k) sample.push_back((*pool)[rng.uniform_index(pool->size())]);
  }
  return sample;
}

IndexSplit stratified_split(std::span<const Label> labels, double test_fraction,
                            std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw ValidationError("test_fraction must lie strictly between 0 and 1");
  }
  std::vector<std::size_t> by_class[2];
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[label_to_int(labels[i])].push_back(i);
  for (const auto& members : by_class) {
    if (members.size() < 2) throw ValidationError("train_test_split needs at least 2 conversations per class");
  }

  const auto total_test = static_cast<std::size_t>(std::llround(static_cast<double>(labels.size()) * test_fraction));
  // Largest-remainder apportionment of the test size across classes.
  std::size_t take[2];
  double remainder[2];
  for (int c = 0; c < 2; ++c) {
    const double exact = static_cast<double>(by_class[c].size()) * test_fraction;
    take[c] = static_cast<std::size_t>(std::floor(exact));
    remainder[c] = exact - std::floor(exact);
  }
  while (take[0] + take[1] < total_test) {
    const int c = remainder[1] > remainder[0] ? 1 : 0;
    ++take[c];
    remainder[c] = -1.0;
  }

  Rng rng(seed);
  std::vector<bool> in_test(labels.size(), false);
  for (int c = 0; c < 2; ++c) {
    auto members = by_class[c];
    rng.shuffle(std::span<std::size_t>(members));
    for (std::size_t k = 0; k < take[c]; ++k) in_test[members[k]] = true;
  }
  IndexSplit split;
  for (std::size_t i = 0; i < labels.size(); ++i) (in_test[i] ? split.test : split.train).push_back(i);
  return split;
}

CorpusSplit train_test_split(const Corpus& corpus, double test_fraction, std::uint64_t seed) {
  std::vector<Label> labels;
  labels.reserve(corpus.conversations.size());
  for (const auto& conv : corpus.conversations) labels.push_back(conv.label);
  const auto split = stratified_split(labels, test_fraction, seed);
  CorpusSplit out;
  out.train.provenance = out.test.provenance = corpus.provenance;
  for (const std::size_t i : split.train) out.train.conversations.push_back(corpus.conversations[i]);
  for (const std::size_t i : split.test) out.test.conversations.push_back(corpus.conversations[i]);
  return out;
}

}  // namespace convoforge
