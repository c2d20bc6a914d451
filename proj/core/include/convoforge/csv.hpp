#pragma once

#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace convoforge::csv {

// RFC-4180 reader. Quoted fields may contain commas, doubled quotes and line
// breaks. Lines starting with '#' outside a record are treated as comments.
class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  // Reads the next record; std::nullopt at end of stream.
  std::optional<std::vector<std::string>> next();

  // 1-based line on which the most recently returned record started.
  std::size_t line() const noexcept { return record_line_; }

 private:
  std::istream& in_;
  std::size_t line_ = 0;
  std::size_t record_line_ = 0;
};

std::string escape(std::string_view field);
void write_row(std::ostream& out, const std::vector<std::string>& fields);

}  // namespace convoforge::csv
