#include <doctest.h>

#include <random>

#include "support/oracles.hpp"
#include "support/testing.hpp"

using namespace brgy;
using namespace brgy::testing;

TEST_CASE("fixture zones load and validate") {
  const auto& z = zones();
  CHECK(z.zones().size() == 7);
  CHECK(z.zone_ids() == std::set<int>{1, 2, 3, 4, 5, 6, 7});
  auto b = z.bounds();
  CHECK(b.min_lat == doctest::Approx(14.580));
  CHECK(b.max_lat == doctest::Approx(14.584));
  CHECK(b.min_lon == doctest::Approx(121.000));
  CHECK(b.max_lon == doctest::Approx(121.008));
}

TEST_CASE("zone assignment") {
  const auto& z = zones();
  for (int id = 1; id <= 7; ++id) CHECK(z.assign_zone(zone_centre(id)) == id);

  SUBCASE("far outside") {
    try {
      z.assign_zone({10.0, 100.0});
      FAIL("expected UNZONED");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::Unzoned);
    }
    CHECK(z.try_assign({10.0, 100.0}) == std::nullopt);
  }
  SUBCASE("shared vertex goes to the lowest touching id") {
    // Corner of zones 2, 3 and 5.
    CHECK(z.assign_zone({14.582, 121.004}) == 2);
    // Edge between 1 and 7.
    CHECK(z.assign_zone({14.582, 121.001}) == 1);
    // Edge between 5 and 6, top row only.
    CHECK(z.assign_zone({14.583, 121.006}) == 5);
  }
  SUBCASE("deterministic") {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 500; ++i) {
      GeoPoint p{std::uniform_real_distribution<>(14.580, 14.584)(rng), std::uniform_real_distribution<>(121.0, 121.008)(rng)};
      CHECK(z.try_assign(p) == z.try_assign(p));
      CHECK(z.try_assign(p).has_value());
    }
  }
}

TEST_CASE("zone configuration is validated") {
  auto square = [](double lat, double lon) {
    return std::vector<GeoPoint>{{lat, lon}, {lat, lon + 1}, {lat + 1, lon + 1}, {lat + 1, lon}};
  };
  std::vector<geo::Zone> seven;
  for (int i = 0; i < 7; ++i) seven.push_back({i + 1, "z", square(0, i)});
  CHECK_NOTHROW(geo::ZoneMap{seven});

  auto expect_invalid = [](std::vector<geo::Zone> zs) {
    try {
      geo::ZoneMap m(std::move(zs));
      FAIL("accepted");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::ConfigInvalid);
    }
  };
  SUBCASE("six zones") {
    seven.pop_back();
    expect_invalid(seven);
  }
  SUBCASE("overlap") {
    seven[6].boundary = square(0.5, 0.5);
    expect_invalid(seven);
  }
  SUBCASE("bow tie") {
    seven[6].boundary = {{0, 10}, {1, 11}, {0, 11}, {1, 10}};
    expect_invalid(seven);
  }
  SUBCASE("duplicate id") {
    seven[6].zone_id = 1;
    expect_invalid(seven);
  }
}

TEST_CASE("haversine") {
  CHECK(geo::haversine({14.58, 121.0}, {14.58, 121.0}) == 0.0);
  CHECK(geo::haversine({0, 0}, {0, 180}) == doctest::Approx(20'015'086.8).epsilon(1e-9));
  GeoPoint a{14.5801, 121.0003}, b{14.5839, 121.0071};
  double oracle = oracle::great_circle(a, b);
  CHECK(std::abs(geo::haversine(a, b) - oracle) / oracle < 1e-3);
  // Frozen from the oracle above.
  CHECK(geo::haversine(a, b) == doctest::Approx(845.00127).epsilon(1e-6));

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<> lat(-90, 90), lon(-180, 180);
  for (int i = 0; i < 1000; ++i) {
    GeoPoint p{lat(rng), lon(rng)}, q{lat(rng), lon(rng)}, r{lat(rng), lon(rng)};
    double pq = geo::haversine(p, q), qp = geo::haversine(q, p);
    CHECK(pq >= 0);
    CHECK(std::abs(pq - qp) <= 1e-6 * std::max(1.0, pq));
    CHECK(pq <= (geo::haversine(p, r) + geo::haversine(r, q)) * (1 + 1e-6));
  }
}

namespace {

std::vector<geo::Marker> scatter(std::mt19937_64& rng, std::size_t n, const geo::Bounds& b) {
  std::vector<geo::Marker> out;
  for (std::size_t i = 0; i < n; ++i) {
    geo::Marker m;
    m.point = {std::uniform_real_distribution<>(b.min_lat, b.max_lat)(rng),
               std::uniform_real_distribution<>(b.min_lon, b.max_lon)(rng)};
    out.push_back(m);
  }
  return out;
}

}  // namespace

TEST_CASE("grid counts match brute-force cell membership") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 50; ++trial) {
    auto n = std::uniform_int_distribution<std::size_t>(0, 300)(rng);
    double cell = std::uniform_real_distribution<>(20, 250)(rng);
    auto markers = scatter(rng, n, zones().bounds());
    auto grid = geo::detect_hotspots(zones(), markers, cell, 5);
    std::vector<GeoPoint> pts;
    for (const auto& m : markers) pts.push_back(m.point);
    CHECK(grid.cells == oracle::brute_force_cells(grid.frame, pts));
    std::uint64_t sum = 0;
    for (auto c : grid.cells) sum += c;
    CHECK(sum == n);
    CHECK(grid.markers_in_grid == n);
  }
}

TEST_CASE("markers outside the grid are not counted") {
  std::vector<geo::Marker> m(3);
  m[0].point = zone_centre(1);
  m[1].point = {10.0, 100.0};
  m[2].point = {14.590, 121.0};
  auto g = geo::detect_hotspots(zones(), m, 100, 3);
  CHECK(g.markers_in_grid == 1);
}

TEST_CASE("hotspot examples") {
  SUBCASE("no incidents") {
    auto g = geo::detect_hotspots(zones(), {}, 100, 5);
    CHECK(std::all_of(g.cells.begin(), g.cells.end(), [](auto c) { return c == 0; }));
    CHECK(g.top.empty());
  }
  SUBCASE("everything at one point") {
    std::vector<geo::Marker> m(37);
    for (auto& x : m) x.point = zone_centre(4);
    auto g = geo::detect_hotspots(zones(), m, 100, 5);
    REQUIRE(g.top.size() == 1);
    CHECK(g.top[0].count == 37);
    CHECK(g.top[0].band == geo::Band::High);
    CHECK(std::count(g.bands.begin(), g.bands.end(), geo::Band::High) == 1);
  }
  SUBCASE("bad parameters") {
    CHECK_THROWS_AS(geo::detect_hotspots(zones(), {}, 0, 5), Error);
    CHECK_THROWS_AS(geo::detect_hotspots(zones(), {}, -3, 5), Error);
    CHECK_THROWS_AS(geo::detect_hotspots(zones(), {}, 100, 0), Error);
  }
}

TEST_CASE("ranking: count descending then row, col; stable across runs") {
  std::mt19937_64 rng(5);
  auto markers = scatter(rng, 400, zones().bounds());
  auto g1 = geo::detect_hotspots(zones(), markers, 60, 10);
  auto g2 = geo::detect_hotspots(zones(), markers, 60, 10);
  REQUIRE(g1.top.size() == 10);
  for (std::size_t i = 0; i < g1.top.size(); ++i) {
    CHECK(g1.top[i].row == g2.top[i].row);
    CHECK(g1.top[i].col == g2.top[i].col);
    CHECK(g1.count(g1.top[i].row, g1.top[i].col) == g1.top[i].count);
    if (i > 0) {
      const auto &a = g1.top[i - 1], &b = g1.top[i];
      CHECK((a.count > b.count || (a.count == b.count && std::pair(a.row, a.col) < std::pair(b.row, b.col))));
    }
  }
  // Nothing outside the top list beats its last entry.
  auto last = g1.top.back().count;
  std::size_t bigger = 0;
  for (auto c : g1.cells) bigger += c > last;
  CHECK(bigger < 10);
}

TEST_CASE("bands are monotone in counts") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::uint64_t> counts(std::uniform_int_distribution<std::size_t>(1, 40)(rng));
    for (auto& c : counts) c = std::uniform_int_distribution<std::uint64_t>(0, 9)(rng);
    auto bands = geo::band_counts(counts);
    for (std::size_t i = 0; i < counts.size(); ++i) {
      CHECK((counts[i] == 0) == (bands[i] == geo::Band::None));
      for (std::size_t j = 0; j < counts.size(); ++j)
        if (counts[i] < counts[j]) CHECK(bands[i] <= bands[j]);
    }
    auto top = *std::max_element(counts.begin(), counts.end());
    if (top > 0)
      for (std::size_t i = 0; i < counts.size(); ++i)
        if (counts[i] == top) CHECK(bands[i] == geo::Band::High);
  }
}

TEST_CASE("band thresholds on a small example") {
  // Nonzero sorted: 1 1 2 3 4 5 6 7 8 20; p50 = 4, p90 = 8.
  std::vector<std::uint64_t> c{0, 1, 1, 2, 3, 4, 5, 6, 7, 8, 20};
  auto b = geo::band_counts(c);
  using geo::Band;
  CHECK(b == std::vector<Band>{Band::None, Band::Low, Band::Low, Band::Low, Band::Low, Band::Low, Band::Medium,
                               Band::Medium, Band::Medium, Band::Medium, Band::High});
}

TEST_CASE("markers come from stores and respect the window") {
  FakeClock clock;
  System sys(memory_config(), zones(), nullptr, clock.clock());
  auto a = sys.registry.register_resident(person("Cruz", "Ana")).resident_id;
  auto b = sys.registry.register_resident(person("Reyes", "Jose")).resident_id;
  for (unsigned day : {1u, 2u, 3u, 20u}) {
    BlotterFiling f;
    f.complainant_ids = {a};
    f.respondent_ids = {b};
    f.offense_type = "theft";
    f.location = zone_centre(3);
    f.date_filed = ymd(2016, 11, day);
    sys.casework.file_blotter(f);
  }
  HealthCaseInput h;
  h.subject = {HealthSubject::Kind::Resident, a};
  h.condition = "fever";
  h.location = zone_centre(6);
  sys.health.record_health_case(h, {"bhw", Role::HealthWorker});
  sys.health.record_health_case(h, {"bhw", Role::HealthWorker});

  auto crime = sys.db.read([](const Tables& t) { return geo::build_markers(t, geo::MarkerKind::Crime, {}); });
  CHECK(crime.size() == 4);
  auto early = sys.db.read([](const Tables& t) {
    return geo::build_markers(t, geo::MarkerKind::Crime, {ymd(2016, 11, 1), ymd(2016, 11, 3)});
  });
  CHECK(early.size() == 3);
  auto health = sys.db.read([](const Tables& t) { return geo::build_markers(t, geo::MarkerKind::Health, {}); });
  REQUIRE(health.size() == 2);
  // Two cases at one point: linear count at that point.
  CHECK(std::count_if(health.begin(), health.end(), [](const geo::Marker& m) { return m.point == zone_centre(6); }) == 2);
  CHECK(health[0].zone_id == 6);

  auto doc = geo::geodata_document(sys.zones, crime);
  CHECK(doc["zones"].size() == 7);
  CHECK(doc["markers"].size() == 4);
  CHECK(doc["markers"][0].contains("lat"));
}
