#include "convoforge/lexicon.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "convoforge/error.hpp"

namespace convoforge {

namespace {

std::string lowercase(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string trim(std::string_view s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string_view::npos) return {};
  const auto end = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(begin, end - begin + 1));
}

std::ifstream open_or_throw(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path.string() + "'");
  return in;
}

// Strips a trailing comment and surrounding whitespace.
std::string content_of(const std::string& line) {
  const auto hash = line.find('#');
  return trim(hash == std::string::npos ? std::string_view(line)
                                        : std::string_view(line).substr(0, hash));
}

}  // namespace

Lexicon::Lexicon(std::string name, std::span<const std::string> entries) : name_(std::move(name)) {
  std::set<std::string> prefixes;
  for (const auto& raw : entries) {
    const std::string entry = lowercase(trim(raw));
    if (entry.empty()) continue;
    const auto star = entry.find('*');
    if (star == std::string::npos) {
      literals_.insert(entry);
    } else if (star == entry.size() - 1 && star > 0) {
      prefixes.insert(entry.substr(0, star));
    } else {
      throw ValidationError("lexicon '" + name_ + "': wildcard must be a single trailing '*' in '" +
                            entry + "'");
    }
  }
  prefixes_.assign(prefixes.begin(), prefixes.end());
  if (size() == 0) throw ValidationError("lexicon '" + name_ + "' is empty");
}

Lexicon Lexicon::parse(std::string name, std::istream& in) {
  std::vector<std::string> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string entry = content_of(line);
    if (entry.empty()) continue;
    const auto star = entry.find('*');
    if (star != std::string::npos && (star != entry.size() - 1 || star == 0)) {
      throw ParseError(line_no, "wildcard must be a single trailing '*': '" + entry + "'");
    }
    entries.push_back(std::move(entry));
  }
  return Lexicon(std::move(name), entries);
}

Lexicon Lexicon::load(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  try {
    return parse(path.stem().string(), in);
  } catch (const ParseError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

bool Lexicon::matches(std::string_view token) const {
  if (literals_.contains(std::string(token))) return true;
  return std::any_of(prefixes_.begin(), prefixes_.end(),
                     [&](const std::string& p) { return token.starts_with(p); });
}

std::vector<std::string> Lexicon::entries() const {
  std::vector<std::string> out(literals_.begin(), literals_.end());
  for (const auto& p : prefixes_) out.push_back(p + "*");
  std::sort(out.begin(), out.end());
  return out;
}

std::size_t count_matches(std::span<const std::string> tokens, const Lexicon& lexicon) {
  return static_cast<std::size_t>(std::count_if(
      tokens.begin(), tokens.end(), [&](const std::string& t) { return lexicon.matches(t); }));
}

double rate_per_100(std::size_t count, std::size_t num_words) {
  if (num_words == 0) return 0.0;
  return 100.0 * static_cast<double>(count) / static_cast<double>(num_words);
}

ScoredLexicon ScoredLexicon::parse(std::istream& in) {
  std::unordered_map<std::string, double> scores;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string content = content_of(line);
    if (content.empty()) continue;
    const auto tab = content.find('\t');
    if (tab == std::string::npos) throw ParseError(line_no, "expected 'word<TAB>score'");
    const std::string word = lowercase(trim(std::string_view(content).substr(0, tab)));
    try {
      scores[word] = std::stod(content.substr(tab + 1));
    } catch (const std::exception&) {
      throw ParseError(line_no, "score is not a number");
    }
  }
  if (scores.empty()) throw ValidationError("scored lexicon is empty");
  return ScoredLexicon(std::move(scores));
}

ScoredLexicon ScoredLexicon::load(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  try {
    return parse(in);
  } catch (const ParseError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

const double* ScoredLexicon::find(std::string_view word) const {
  const auto it = scores_.find(std::string(word));
  return it == scores_.end() ? nullptr : &it->second;
}

PatternRule PatternSet::make_rule(std::string marker, Position position, std::string pattern) {
  PatternRule rule;
  rule.marker = std::move(marker);
  rule.position = position;
  rule.pattern = std::move(pattern);
  try {
    rule.regex = std::regex(rule.pattern, std::regex::ECMAScript | std::regex::icase |
                                              std::regex::optimize);
  } catch (const std::regex_error& e) {
    throw ValidationError("marker '" + rule.marker + "': invalid pattern: " + e.what());
  }
  return rule;
}

PatternSet::PatternSet(std::string name, std::vector<PatternRule> rules)
    : name_(std::move(name)), rules_(std::move(rules)) {
  std::set<std::string> seen;
  for (const auto& rule : rules_) {
    if (!seen.insert(rule.marker).second) {
      throw ValidationError("pattern set '" + name_ + "': duplicate marker '" + rule.marker + "'");
    }
  }
}

PatternSet PatternSet::parse(std::string name, std::istream& in) {
  std::vector<PatternRule> rules;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty() || trim(line).front() == '#') continue;
    const auto t1 = line.find('\t');
    const auto t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
    if (t2 == std::string::npos) throw ParseError(line_no, "expected 'marker<TAB>position<TAB>pattern'");
    const std::string marker = trim(std::string_view(line).substr(0, t1));
    const std::string where = trim(std::string_view(line).substr(t1 + 1, t2 - t1 - 1));
    Position position;
    if (where == "anywhere") {
      position = Position::kAnywhere;
    } else if (where == "start") {
      position = Position::kUtteranceStart;
    } else {
      throw ParseError(line_no, "position must be 'anywhere' or 'start'");
    }
    try {
      rules.push_back(make_rule(marker, position, line.substr(t2 + 1)));
    } catch (const ValidationError& e) {
      throw ParseError(line_no, e.what());
    }
  }
  try {
    return PatternSet(std::move(name), std::move(rules));
  } catch (const ValidationError& e) {
    throw ParseError(line_no, e.what());
  }
}

PatternSet PatternSet::load(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  try {
    return parse(path.stem().string(), in);
  } catch (const ParseError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

namespace {

bool is_token_char(unsigned char c) {
  return std::isalnum(c) != 0 || c == '\'' || c >= 0x80;
}

}  // namespace

MarkerCounts match_pattern_set(std::string_view text, std::span<const std::string> tokens,
                               const PatternSet& set) {
  MarkerCounts counts;
  std::size_t first = 0;
  while (first < text.size() && !is_token_char(static_cast<unsigned char>(text[first]))) ++first;
  const std::string owned(text);
  for (const auto& rule : set.rules()) {
    std::size_t n = 0;
    if (rule.position == Position::kUtteranceStart) {
      if (!tokens.empty()) {
        n = std::regex_search(owned.cbegin() + static_cast<std::ptrdiff_t>(first), owned.cend(),
                              rule.regex, std::regex_constants::match_continuous)
                ? 1
                : 0;
      }
    } else {
      n = static_cast<std::size_t>(
          std::distance(std::sregex_iterator(owned.begin(), owned.end(), rule.regex),
                        std::sregex_iterator()));
    }
    counts[rule.marker] = n;
  }
  return counts;
}

}  // namespace convoforge
