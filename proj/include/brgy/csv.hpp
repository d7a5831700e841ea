#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace brgy::csv {

using Row = std::vector<std::string>;

/// RFC 4180 reader. Accepts CRLF or LF record separators and an optional
/// trailing line break. Throws MALFORMED_CSV on unbalanced quotes or stray
/// characters after a closing quote.
std::vector<Row> parse(std::string_view text);

/// One record terminated by CRLF; fields quoted only when needed.
std::string format_row(std::span<const std::string> fields);
std::string format_row(std::initializer_list<std::string> fields);

std::string quote_if_needed(std::string_view field);

}  // namespace brgy::csv
