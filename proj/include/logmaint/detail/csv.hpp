#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "logmaint/error.hpp"

namespace logmaint::detail {

struct CsvRow {
  std::vector<std::string> fields;
  std::size_t line = 0;  // 1-based line where the row starts
};

/// RFC-4180 reader: quoted fields may hold separators, doubled quotes and
/// line breaks. CRLF and LF terminators are both accepted.
inline std::vector<CsvRow> parse_csv(std::string_view text, const std::string& path, char sep = ',') {
  std::vector<CsvRow> rows;
  CsvRow row;
  std::string field;
  std::size_t line = 1;
  row.line = 1;
  bool in_quotes = false;
  bool field_started = false;
  bool after_quote = false;

  const auto end_field = [&] {
    row.fields.push_back(std::move(field));
    field.clear();
    field_started = false;
    after_quote = false;
  };
  const auto end_row = [&] {
    end_field();
    // A line holding nothing at all is not a record.
    if (!(row.fields.size() == 1 && row.fields[0].empty())) rows.push_back(std::move(row));
    row = CsvRow{};
    row.line = line;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          in_quotes = false;
          after_quote = true;
        }
      } else {
        if (c == '\n') ++line;
        field += c;
      }
      continue;
    }
    if (c == '"') {
      if (field_started || after_quote) throw ParseError(path, line, "unexpected quote inside unquoted field");
      in_quotes = true;
      field_started = true;
    } else if (c == sep) {
      end_field();
    } else if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') {
      continue;
    } else if (c == '\n') {
      ++line;
      end_row();
    } else {
      if (after_quote) throw ParseError(path, line, "text after closing quote");
      field += c;
      field_started = true;
    }
  }
  if (in_quotes) throw ParseError(path, line, "unterminated quoted field");
  if (field_started || after_quote || !row.fields.empty()) end_row();
  return rows;
}

inline std::string csv_escape(std::string_view s, char sep = ',') {
  if (s.find_first_of(std::string{sep, '"', '\n', '\r'}) == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace logmaint::detail
