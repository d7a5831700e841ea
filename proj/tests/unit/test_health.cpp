#include <doctest.h>

#include "brgy/csv.hpp"
#include "support/testing.hpp"

using namespace brgy;
using namespace brgy::testing;

namespace {

const Officer kWorker{"bhw", Role::HealthWorker};

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error");
  return ErrorCode::InvalidField;
}

ChildRecord child(std::string last, std::string first, std::string middle, Date birth, Gender g) {
  ChildRecord c;
  c.last_name = std::move(last);
  c.first_name = std::move(first);
  c.middle_name = std::move(middle);
  c.birthdate = birth;
  c.gender = g;
  return c;
}

}  // namespace

TEST_CASE("child records") {
  FakeClock clock;
  System sys(memory_config(), zones(), nullptr, clock.clock());
  auto id = sys.health.register_child(child("Fernandez", "Nicolas", "Guerrero", ymd(2013, 4, 3), Gender::Male));
  auto kids = sys.health.list_children();
  REQUIRE(kids.size() == 1);
  CHECK(kids[0].child_id == id);
  CHECK(kids[0].birthdate == ymd(2013, 4, 3));
  CHECK(kids[0].gender == Gender::Male);

  // A zero month is not a calendar month.
  CHECK(!parse_date("2017-00-01"));
  CHECK(code_of([&] { sys.health.register_child(child("balay", "x", "", ymd(2017, 0, 1), Gender::Male)); }) ==
        ErrorCode::InvalidField);
  CHECK(code_of([&] { sys.health.register_child(child("Teneral", "x", "", ymd(2016, 12, 6), Gender::Male)); }) ==
        ErrorCode::InvalidField);
  auto orphan = child("Abella", "Jayson", "Agonillo", ymd(2010, 12, 31), Gender::Male);
  orphan.guardian_resident_id = "999999";
  CHECK(code_of([&] { sys.health.register_child(orphan); }) == ErrorCode::NotFound);
  CHECK(sys.health.list_children().size() == 1);
}

TEST_CASE("health cases") {
  FakeClock clock;
  System sys(memory_config(), zones(), nullptr, clock.clock());
  auto r = sys.registry.register_resident(person("Cruz", "Ana")).resident_id;
  auto k = sys.health.register_child(child("Araneta", "Bea", "Alcoro", ymd(2013, 1, 30), Gender::Female));

  HealthCaseInput in;
  in.subject = {HealthSubject::Kind::Resident, r};
  in.condition = "  Dengue ";
  in.location = zone_centre(5);
  auto id = sys.health.record_health_case(in, kWorker);
  auto cases = sys.health.list_cases();
  REQUIRE(cases.size() == 1);
  CHECK(cases[0].health_case_id == id);
  CHECK(cases[0].condition == "dengue");
  CHECK(cases[0].zone_id == 5);
  auto h = sys.registry.get_profile(r).history;
  REQUIRE(h.size() == 1);
  CHECK(h[0].kind == TransactionKind::HealthCase);

  in.subject = {HealthSubject::Kind::Child, k};
  sys.health.record_health_case(in, kWorker);
  CHECK(sys.registry.get_profile(r).history.size() == 1);

  in.subject = {HealthSubject::Kind::Child, "CH-999999"};
  CHECK(code_of([&] { sys.health.record_health_case(in, kWorker); }) == ErrorCode::NotFound);
  in.subject = {HealthSubject::Kind::Resident, r};
  in.location = {0, 200};
  CHECK(code_of([&] { sys.health.record_health_case(in, kWorker); }) == ErrorCode::InvalidLocation);
  in.location = zone_centre(1);
  in.condition = " ";
  CHECK(code_of([&] { sys.health.record_health_case(in, kWorker); }) == ErrorCode::InvalidField);

  // Every case has exactly one marker.
  auto markers = sys.db.read([](const Tables& t) { return geo::build_markers(t, geo::MarkerKind::Health, {}); });
  CHECK(markers.size() == sys.health.list_cases().size());
}

TEST_CASE("summary examples") {
  FakeClock clock;
  System sys(memory_config(), zones(), nullptr, clock.clock());
  CHECK(sys.health.health_summary({}, HealthGrouping::Zone).empty());
  auto r = sys.registry.register_resident(person("Cruz", "Ana")).resident_id;
  auto rec = [&](int zone, const char* cond) {
    HealthCaseInput in;
    in.subject = {HealthSubject::Kind::Resident, r};
    in.condition = cond;
    in.location = zone_centre(zone);
    sys.health.record_health_case(in, kWorker);
  };
  rec(1, "fever"), rec(1, "fever"), rec(1, "dengue"), rec(2, "fever"), rec(2, "cough");
  CHECK(sys.health.health_summary({}, HealthGrouping::Zone) == std::map<std::string, std::size_t>{{"1", 3}, {"2", 2}});
  CHECK(sys.health.health_summary({}, HealthGrouping::Condition) ==
        std::map<std::string, std::size_t>{{"cough", 1}, {"dengue", 1}, {"fever", 3}});
  CHECK(code_of([&] { sys.health.health_summary({ymd(2017, 1, 1), ymd(2016, 1, 1)}, HealthGrouping::Zone); }) ==
        ErrorCode::InvalidField);
}

TEST_CASE("summary conservation on random fixtures") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    FakeClock clock;
    System sys(memory_config(), zones(), nullptr, clock.clock());
    std::mt19937_64 rng(seed);
    // Spread the cases over several days.
    WorldShape shape;
    shape.health_cases = 0;
    populate(sys, seed, shape);
    auto residents = sys.registry.find_residents("");
    for (int i = 0; i < 60; ++i) {
      clock.set(at(2016, 12, static_cast<unsigned>(1 + rng() % 28)));
      HealthCaseInput in;
      in.subject = {HealthSubject::Kind::Resident, residents[rng() % residents.size()].resident_id};
      in.condition = kConditions[rng() % kConditions.size()];
      in.location = zone_centre(static_cast<int>(rng() % 7) + 1);
      sys.health.record_health_case(in, kWorker);
    }
    for (DateWindow w : {DateWindow{}, DateWindow{ymd(2016, 12, 5), ymd(2016, 12, 15)},
                         DateWindow{ymd(2016, 12, 20), std::nullopt}}) {
      std::size_t direct = 0;
      for (const auto& c : sys.health.list_cases())
        direct += w.contains(date_of(c.recorded_at));
      for (auto g : {HealthGrouping::Zone, HealthGrouping::Condition}) {
        std::size_t sum = 0;
        for (const auto& [k, n] : sys.health.health_summary(w, g)) sum += n;
        CHECK(sum == direct);
      }
    }
  }
}

TEST_CASE("health CSV carries no identity") {
  FakeClock clock;
  System sys(memory_config(), zones(), nullptr, clock.clock());
  auto r = sys.registry.register_resident(person("Cruz", "Ana", "", 3, "+639171234567")).resident_id;
  HealthCaseInput in;
  in.subject = {HealthSubject::Kind::Resident, r};
  in.condition = "fever";
  in.location = zone_centre(3);
  sys.health.record_health_case(in, kWorker);
  auto rows = csv::parse(sys.health.export_csv());
  REQUIRE(rows.size() == 2);
  CHECK(rows[0] == csv::Row{"recorded_at", "zone_id", "condition", "age_band", "gender"});
  CHECK(rows[1] == csv::Row{"2016-12-05T08:00:00Z", "3", "fever", "26-40", "male"});
}
