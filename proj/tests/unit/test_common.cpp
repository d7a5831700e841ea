#include <doctest.h>

#include "support/testing.hpp"

using namespace brgy;
using brgy::testing::ymd;

TEST_CASE("dates parse strictly") {
  CHECK(parse_date("2016-12-03") == ymd(2016, 12, 3));
  CHECK(parse_date("2016-02-29") == ymd(2016, 2, 29));
  CHECK(parse_date("2015-02-29") == std::nullopt);
  CHECK(parse_date("2016-13-01") == std::nullopt);
  CHECK(parse_date("2017-00-01") == std::nullopt);
  CHECK(parse_date("2016-1-3") == std::nullopt);
  CHECK(parse_date("") == std::nullopt);
  CHECK(parse_date("+016-12-03") == std::nullopt);
  CHECK(format_date(ymd(2013, 4, 3)) == "2013-04-03");
}

TEST_CASE("timestamps round-trip") {
  auto t = parse_timestamp("2016-12-04T08:15:30Z");
  REQUIRE(t);
  CHECK(format_timestamp(*t) == "2016-12-04T08:15:30Z");
  CHECK(format_timestamp(*parse_timestamp("2016-12-04")) == "2016-12-04T00:00:00Z");
  CHECK(parse_timestamp("2016-12-04 08:15:30") == std::nullopt);
  CHECK(parse_timestamp("2016-12-04T24:00:00Z") == std::nullopt);
  CHECK(date_of(*t) == ymd(2016, 12, 4));
  CHECK(format_month(ymd(2016, 12, 4)) == "2016-12");
}

TEST_CASE("age in whole years and age bands") {
  CHECK(age_on(ymd(1990, 5, 17), ymd(2016, 5, 16)) == 25);
  CHECK(age_on(ymd(1990, 5, 17), ymd(2016, 5, 17)) == 26);
  CHECK(age_on(ymd(2000, 2, 29), ymd(2001, 2, 28)) == 0);
  CHECK(age_band(0) == "<18");
  CHECK(age_band(17) == "<18");
  CHECK(age_band(18) == "18-25");
  CHECK(age_band(25) == "18-25");
  CHECK(age_band(26) == "26-40");
  CHECK(age_band(40) == "26-40");
  CHECK(age_band(41) == "41-60");
  CHECK(age_band(60) == "41-60");
  CHECK(age_band(61) == ">60");
}

TEST_CASE("date windows are inclusive") {
  DateWindow w{ymd(2016, 12, 1), ymd(2016, 12, 31)};
  CHECK(w.contains(ymd(2016, 12, 1)));
  CHECK(w.contains(ymd(2016, 12, 31)));
  CHECK_FALSE(w.contains(ymd(2017, 1, 1)));
  CHECK_FALSE(w.empty());
  CHECK(DateWindow{ymd(2017, 1, 1), ymd(2016, 1, 1)}.empty());
  CHECK(DateWindow{}.contains(ymd(1900, 1, 1)));
}

TEST_CASE("enumerations round-trip through text") {
  for (Role r : {Role::Secretary, Role::Treasurer, Role::HealthWorker, Role::Lgu, Role::ResidentPublic})
    CHECK(parse_role(to_string(r)) == r);
  CHECK(parse_role("mayor") == std::nullopt);
  CHECK(parse_gender("Female") == Gender::Female);
  CHECK(parse_residency("non-migrant") == Residency::NonMigrant);
  CHECK(parse_residency("migrant") == Residency::Migrant);
  CHECK(parse_tri("") == Tri::Unknown);
  CHECK(parse_tri("maybe") == std::nullopt);
  CHECK(to_string(ErrorCode::OverrideForbidden) == "OVERRIDE_FORBIDDEN");
  CHECK(to_string(ErrorCode::MalformedCsv) == "MALFORMED_CSV");
}

TEST_CASE("E.164 syntax") {
  CHECK(is_e164("+639171234567"));
  CHECK(is_e164("+12"));
  CHECK_FALSE(is_e164("09171234567"));
  CHECK_FALSE(is_e164("+0917123"));
  CHECK_FALSE(is_e164("+63 917 123 4567"));
  CHECK_FALSE(is_e164("+1234567890123456"));
}

TEST_CASE("coordinates validity") {
  CHECK(GeoPoint{14.58, 121.0}.valid());
  CHECK(GeoPoint{-90, 180}.valid());
  CHECK_FALSE(GeoPoint{90.5, 0}.valid());
  CHECK_FALSE(GeoPoint{0, -180.1}.valid());
  CHECK_FALSE(GeoPoint{std::nan(""), 0}.valid());
}

TEST_CASE("string helpers") {
  CHECK(trim("  a b \t\n") == "a b");
  CHECK(trim("   ").empty());
  CHECK(to_lower("ThEfT") == "theft");
}
