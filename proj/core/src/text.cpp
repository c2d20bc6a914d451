#include "convoforge/text.hpp"

#include <cctype>

namespace convoforge {

namespace {

bool is_word_char(unsigned char c) { return std::isalnum(c) != 0 || c == '\'' || c >= 0x80; }

bool is_terminal(char c) { return c == '.' || c == '!' || c == '?'; }

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

}  // namespace

std::string to_lower_ascii(std::string_view text) {
  std::string out(text);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

TokenizedUtterance tokenize(std::string_view text) {
  TokenizedUtterance tok;
  std::size_t sentence_start = 0;
  std::size_t words_in_sentence = 0;
  std::size_t i = 0;
  while (i < text.size()) {
    const auto c = static_cast<unsigned char>(text[i]);
    if (is_word_char(c)) {
      const std::size_t start = i;
      while (i < text.size() && is_word_char(static_cast<unsigned char>(text[i]))) ++i;
      std::string_view word = text.substr(start, i - start);
      while (!word.empty() && word.front() == '\'') word.remove_prefix(1);
      while (!word.empty() && word.back() == '\'') word.remove_suffix(1);
      if (!word.empty()) {
        tok.tokens.push_back(to_lower_ascii(word));
        ++words_in_sentence;
      }
      continue;
    }
    if (is_terminal(text[i])) {
      std::size_t j = i;
      while (j < text.size() && is_terminal(text[j])) ++j;
      if (j == text.size() || is_space(text[j])) {
        if (words_in_sentence > 0) tok.sentences.emplace_back(sentence_start, j);
        words_in_sentence = 0;
        sentence_start = j;
      }
      i = j;
      continue;
    }
    ++i;
  }
  if (words_in_sentence > 0) tok.sentences.emplace_back(sentence_start, text.size());
  tok.num_words = tok.tokens.size();
  for (const char ch : text) tok.num_chars += std::isalnum(static_cast<unsigned char>(ch)) ? 1 : 0;
  return tok;
}

}  // namespace convoforge
