#include "brgy/csv.hpp"

#include <fmt/format.h>

#include "brgy/common.hpp"

namespace brgy::csv {

std::vector<Row> parse(std::string_view text) {
  std::vector<Row> rows;
  Row row;
  std::string field;
  bool in_quotes = false;
  bool after_quote = false;
  bool row_started = false;
  std::size_t line = 1;

  auto malformed = [&](const char* why) {
    throw Error(ErrorCode::MalformedCsv, fmt::format("line {}: {}", line, why), {{"line", line}});
  };
  auto end_field = [&] {
    row.push_back(std::move(field));
    field.clear();
    after_quote = false;
  };
  auto end_row = [&] {
    end_field();
    rows.push_back(std::move(row));
    row.clear();
    row_started = false;
    ++line;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
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
    row_started = true;
    if (c == ',') {
      end_field();
    } else if (c == '\r') {
      if (i + 1 < text.size() && text[i + 1] == '\n') ++i;
      end_row();
    } else if (c == '\n') {
      end_row();
    } else if (c == '"') {
      if (!field.empty() || after_quote) malformed("quote inside unquoted field");
      in_quotes = true;
    } else {
      if (after_quote) malformed("characters after closing quote");
      field += c;
    }
  }
  if (in_quotes) malformed("unterminated quoted field");
  if (row_started) end_row();
  return rows;
}

std::string quote_if_needed(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string format_row(std::span<const std::string> fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    out += quote_if_needed(fields[i]);
  }
  out += "\r\n";
  return out;
}

std::string format_row(std::initializer_list<std::string> fields) {
  return format_row(std::span<const std::string>(fields.begin(), fields.size()));
}

}  // namespace brgy::csv
