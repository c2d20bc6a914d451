#pragma once

#include <cstddef>
#include <filesystem>
#include <istream>
#include <map>
#include <regex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace convoforge {

// Set of lowercase word patterns. An entry is either a literal word or a
// prefix pattern with a single trailing '*' ("mad*" matches "madness").
class Lexicon {
 public:
  Lexicon() = default;
  Lexicon(std::string name, std::span<const std::string> entries);

  // One pattern per line; '#' starts a comment. Entries are lowercased and
  // deduplicated. Throws on an empty lexicon or a non-trailing wildcard.
  static Lexicon parse(std::string name, std::istream& in);
  static Lexicon load(const std::filesystem::path& path);

  const std::string& name() const noexcept { return name_; }
  std::size_t size() const noexcept { return literals_.size() + prefixes_.size(); }
  bool matches(std::string_view token) const;
  std::vector<std::string> entries() const;

 private:
  std::string name_;
  std::unordered_set<std::string> literals_;
  std::vector<std::string> prefixes_;
};

std::size_t count_matches(std::span<const std::string> tokens, const Lexicon& lexicon);

// 100 * count / num_words, or 0 when there are no words.
double rate_per_100(std::size_t count, std::size_t num_words);

// Word to real score, e.g. polarity in [-1, 1]. Lines are "word<TAB>score".
class ScoredLexicon {
 public:
  ScoredLexicon() = default;
  explicit ScoredLexicon(std::unordered_map<std::string, double> scores)
      : scores_(std::move(scores)) {}

  static ScoredLexicon parse(std::istream& in);
  static ScoredLexicon load(const std::filesystem::path& path);

  const double* find(std::string_view word) const;
  std::size_t size() const noexcept { return scores_.size(); }

 private:
  std::unordered_map<std::string, double> scores_;
};

enum class Position { kAnywhere, kUtteranceStart };

struct PatternRule {
  std::string marker;
  Position position = Position::kAnywhere;
  std::string pattern;
  std::regex regex;
};

// Ordered, case-insensitive regular-expression markers. Lines are
// "marker_name<TAB>anywhere|start<TAB>pattern".
class PatternSet {
 public:
  PatternSet() = default;
  PatternSet(std::string name, std::vector<PatternRule> rules);

  static PatternSet parse(std::string name, std::istream& in);
  static PatternSet load(const std::filesystem::path& path);

  static PatternRule make_rule(std::string marker, Position position, std::string pattern);

  const std::string& name() const noexcept { return name_; }
  std::span<const PatternRule> rules() const noexcept { return rules_; }

 private:
  std::string name_;
  std::vector<PatternRule> rules_;
};

using MarkerCounts = std::map<std::string, std::size_t>;

// Non-overlapping match counts per marker. Start-constrained markers are
// tried only at the first token of the text and count at most once.
MarkerCounts match_pattern_set(std::string_view text, std::span<const std::string> tokens,
                               const PatternSet& set);

}  // namespace convoforge
