#include <doctest.h>

#include <random>

#include "brgy/csv.hpp"
#include "brgy/common.hpp"

using namespace brgy;

TEST_CASE("plain and quoted fields") {
  auto rows = csv::parse("a,b,c\r\n1,\"x, y\",\"he said \"\"hi\"\"\"\r\n");
  REQUIRE(rows.size() == 2);
  CHECK(rows[0] == csv::Row{"a", "b", "c"});
  CHECK(rows[1] == csv::Row{"1", "x, y", "he said \"hi\""});
}

TEST_CASE("LF endings, no trailing newline, embedded newlines") {
  auto rows = csv::parse("a,b\n\"line1\nline2\",z");
  REQUIRE(rows.size() == 2);
  CHECK(rows[1][0] == "line1\nline2");
  CHECK(rows[1][1] == "z");
}

TEST_CASE("empty fields survive") {
  auto rows = csv::parse(",,\n");
  REQUIRE(rows.size() == 1);
  CHECK(rows[0] == csv::Row{"", "", ""});
}

TEST_CASE("malformed input is rejected with a line number") {
  for (const char* bad : {"a,\"unterminated\n", "a,\"x\"y\n", "a,b\nc,d\"e\n"}) {
    try {
      csv::parse(bad);
      FAIL("accepted " << bad);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::MalformedCsv);
      CHECK(e.details().contains("line"));
    }
  }
}

TEST_CASE("format quotes only when needed") {
  CHECK(csv::format_row({"a", "b"}) == "a,b\r\n");
  CHECK(csv::format_row({"x,y", "say \"hi\"", "two\nlines"}) == "\"x,y\",\"say \"\"hi\"\"\",\"two\nlines\"\r\n");
  CHECK(csv::quote_if_needed("plain") == "plain");
}

TEST_CASE("format then parse is the identity on random rows") {
  std::mt19937_64 rng(7);
  const std::string alphabet = "ab ,\"\n\rxyz";
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<csv::Row> rows;
    std::string text;
    auto nrows = std::uniform_int_distribution<int>(1, 5)(rng);
    auto ncols = std::uniform_int_distribution<int>(1, 4)(rng);
    for (int r = 0; r < nrows; ++r) {
      csv::Row row;
      for (int c = 0; c < ncols; ++c) {
        std::string f;
        auto len = std::uniform_int_distribution<int>(0, 6)(rng);
        for (int i = 0; i < len; ++i) f += alphabet[std::uniform_int_distribution<std::size_t>(0, alphabet.size() - 1)(rng)];
        row.push_back(f);
      }
      // A lone empty field is indistinguishable from a blank line.
      if (ncols == 1 && row[0].empty()) row[0] = "q";
      text += csv::format_row(row);
      rows.push_back(row);
    }
    CHECK(csv::parse(text) == rows);
  }
}
