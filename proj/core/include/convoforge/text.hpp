#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace convoforge {

struct TokenizedUtterance {
  std::vector<std::string> tokens;
  // [begin, end) byte offsets of each sentence in the source text.
  std::vector<std::pair<std::size_t, std::size_t>> sentences;
  std::size_t num_words = 0;
  std::size_t num_chars = 0;  // alphanumeric characters
};

// Words are maximal runs of letters, digits and apostrophes, lowercased, with
// edge apostrophes trimmed. Bytes >= 0x80 count as letters so UTF-8 words stay
// whole. Sentences end at '.', '!' or '?' followed by whitespace or the end of
// text; a sentence needs at least one word.
TokenizedUtterance tokenize(std::string_view text);

std::string to_lower_ascii(std::string_view text);

}  // namespace convoforge
