#include "lrforge/csv.hpp"

#include "lrforge/error.hpp"

namespace lrforge {

bool CsvReader::next(std::vector<std::string>& fields) {
  fields.clear();
  int c = in_.get();
  if (c == std::char_traits<char>::eof()) return false;

  ++record_;
  start_line_ = line_;
  std::string field;
  const auto fail = [&](const std::string& what) {
    throw Error(Errc::malformed_row, "row " + std::to_string(record_) + " (line " +
                                         std::to_string(start_line_) + "): " + what);
  };

  while (true) {
    if (c == '"') {
      // Quoted field.
      while (true) {
        c = in_.get();
        if (c == std::char_traits<char>::eof()) fail("unterminated quoted field");
        if (c == '"') {
          if (in_.peek() == '"') {
            in_.get();
            field.push_back('"');
            continue;
          }
          break;
        }
        if (c == '\n') ++line_;
        field.push_back(static_cast<char>(c));
      }
      c = in_.get();
      if (c == '\r' && in_.peek() == '\n') c = in_.get();
      if (c != ',' && c != '\n' && c != std::char_traits<char>::eof()) {
        fail("unexpected character after closing quote");
      }
    } else {
      while (c != ',' && c != '\n' && c != std::char_traits<char>::eof()) {
        if (c == '"') fail("quote inside unquoted field");
        if (c == '\r' && in_.peek() == '\n') {
          c = in_.get();
          break;
        }
        field.push_back(static_cast<char>(c));
        c = in_.get();
      }
    }
    fields.push_back(std::move(field));
    field.clear();
    if (c == ',') {
      c = in_.get();
      continue;
    }
    if (c == '\n') ++line_;
    return true;
  }
}

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char ch : field) {
    if (ch == '"') out.push_back('"');
    out.push_back(ch);
  }
  out.push_back('"');
  return out;
}

void CsvWriter::write_field(std::string_view field) { out_ << csv_escape(field); }

void CsvWriter::write_row(const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out_ << ',';
    write_field(fields[i]);
  }
  out_ << '\n';
}

void CsvWriter::write_row(std::initializer_list<std::string_view> fields) {
  bool first = true;
  for (auto f : fields) {
    if (!first) out_ << ',';
    first = false;
    write_field(f);
  }
  out_ << '\n';
}

}  // namespace lrforge
