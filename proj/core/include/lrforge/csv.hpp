#pragma once

#include <cstddef>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace lrforge {

// RFC 4180 reader: quoted fields may hold commas, doubled quotes and line
// breaks. Accepts LF and CRLF record terminators.
class CsvReader {
 public:
  explicit CsvReader(std::istream& in) : in_(in) {}

  // Reads the next record into `fields`. Returns false at end of input.
  // Throws Error(Errc::malformed_row) on an unterminated quote or stray
  // characters after a closing quote.
  bool next(std::vector<std::string>& fields);

  // 1-based index of the record last returned (the header is record 1).
  std::size_t record_number() const noexcept { return record_; }
  // Line on which the last returned record started.
  std::size_t start_line() const noexcept { return start_line_; }

 private:
  std::istream& in_;
  std::size_t record_ = 0;
  std::size_t line_ = 1;
  std::size_t start_line_ = 0;
};

class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out) : out_(out) {}
  void write_row(const std::vector<std::string>& fields);
  void write_row(std::initializer_list<std::string_view> fields);

 private:
  void write_field(std::string_view field);
  std::ostream& out_;
};

std::string csv_escape(std::string_view field);

}  // namespace lrforge
