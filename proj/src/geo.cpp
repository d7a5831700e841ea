#include "brgy/geo.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include <fmt/format.h>

namespace brgy::geo {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr double kEps = 1e-12;

std::vector<GeoPoint> open_ring(std::vector<GeoPoint> ring) {
  if (ring.size() > 1 && ring.front() == ring.back()) ring.pop_back();
  return ring;
}

double cross(GeoPoint o, GeoPoint a, GeoPoint b) {
  return (a.lon - o.lon) * (b.lat - o.lat) - (a.lat - o.lat) * (b.lon - o.lon);
}

bool on_segment(GeoPoint a, GeoPoint b, GeoPoint p) {
  if (std::abs(cross(a, b, p)) > kEps) return false;
  return p.lon >= std::min(a.lon, b.lon) - kEps && p.lon <= std::max(a.lon, b.lon) + kEps &&
         p.lat >= std::min(a.lat, b.lat) - kEps && p.lat <= std::max(a.lat, b.lat) + kEps;
}

int sign(double v) { return v > kEps ? 1 : (v < -kEps ? -1 : 0); }

bool segments_touch(GeoPoint a, GeoPoint b, GeoPoint c, GeoPoint d) {
  int d1 = sign(cross(c, d, a)), d2 = sign(cross(c, d, b));
  int d3 = sign(cross(a, b, c)), d4 = sign(cross(a, b, d));
  if (d1 * d2 < 0 && d3 * d4 < 0) return true;
  return on_segment(c, d, a) || on_segment(c, d, b) || on_segment(a, b, c) || on_segment(a, b, d);
}

bool segments_cross_properly(GeoPoint a, GeoPoint b, GeoPoint c, GeoPoint d) {
  int d1 = sign(cross(c, d, a)), d2 = sign(cross(c, d, b));
  int d3 = sign(cross(a, b, c)), d4 = sign(cross(a, b, d));
  return d1 * d2 < 0 && d3 * d4 < 0;
}

bool strictly_inside(std::span<const GeoPoint> ring, GeoPoint p) {
  return !on_boundary(ring, p) && ray_cast_inside(ring, p);
}

}  // namespace

double haversine(GeoPoint a, GeoPoint b) {
  double phi1 = a.lat * kDegToRad, phi2 = b.lat * kDegToRad;
  double dphi = (b.lat - a.lat) * kDegToRad;
  double dlambda = (b.lon - a.lon) * kDegToRad;
  double s = std::sin(dphi / 2), t = std::sin(dlambda / 2);
  double h = s * s + std::cos(phi1) * std::cos(phi2) * t * t;
  h = std::clamp(h, 0.0, 1.0);
  return 2.0 * kEarthRadiusM * std::asin(std::sqrt(h));
}

bool on_boundary(std::span<const GeoPoint> ring, GeoPoint p) {
  for (std::size_t i = 0; i < ring.size(); ++i)
    if (on_segment(ring[i], ring[(i + 1) % ring.size()], p)) return true;
  return false;
}

bool ray_cast_inside(std::span<const GeoPoint> ring, GeoPoint p) {
  bool inside = false;
  for (std::size_t i = 0, j = ring.size() - 1; i < ring.size(); j = i++) {
    const auto& a = ring[i];
    const auto& b = ring[j];
    if ((a.lat > p.lat) != (b.lat > p.lat)) {
      double x = (b.lon - a.lon) * (p.lat - a.lat) / (b.lat - a.lat) + a.lon;
      if (p.lon < x) inside = !inside;
    }
  }
  return inside;
}

bool is_simple_polygon(std::span<const GeoPoint> ring) {
  const std::size_t n = ring.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      bool adjacent = j == i + 1 || (i == 0 && j == n - 1);
      if (adjacent) continue;
      if (segments_touch(ring[i], ring[(i + 1) % n], ring[j], ring[(j + 1) % n])) return false;
    }
  }
  double area = 0;
  for (std::size_t i = 0; i < n; ++i) area += cross({0, 0}, ring[i], ring[(i + 1) % n]);
  return std::abs(area) > kEps;
}

ZoneMap::ZoneMap(std::vector<Zone> zones, std::size_t expected) : zones_(std::move(zones)) {
  if (zones_.size() != expected)
    throw Error(ErrorCode::ConfigInvalid,
                fmt::format("expected {} zones, got {}", expected, zones_.size()));
  std::sort(zones_.begin(), zones_.end(), [](const Zone& a, const Zone& b) { return a.zone_id < b.zone_id; });
  for (auto& z : zones_) {
    z.boundary = open_ring(std::move(z.boundary));
    if (!ids_.insert(z.zone_id).second)
      throw Error(ErrorCode::ConfigInvalid, fmt::format("duplicate zone id {}", z.zone_id));
    if (!std::all_of(z.boundary.begin(), z.boundary.end(), [](GeoPoint p) { return p.valid(); }))
      throw Error(ErrorCode::ConfigInvalid, fmt::format("zone {} has an invalid coordinate", z.zone_id));
    if (!is_simple_polygon(z.boundary))
      throw Error(ErrorCode::ConfigInvalid, fmt::format("zone {} is not a simple polygon", z.zone_id));
  }
  for (std::size_t a = 0; a < zones_.size(); ++a) {
    for (std::size_t b = a + 1; b < zones_.size(); ++b) {
      const auto& ra = zones_[a].boundary;
      const auto& rb = zones_[b].boundary;
      auto overlap = [&] {
        for (std::size_t i = 0; i < ra.size(); ++i)
          for (std::size_t j = 0; j < rb.size(); ++j)
            if (segments_cross_properly(ra[i], ra[(i + 1) % ra.size()], rb[j], rb[(j + 1) % rb.size()]))
              return true;
        auto probe = [](const std::vector<GeoPoint>& from, const std::vector<GeoPoint>& into) {
          GeoPoint mean{0, 0};
          for (std::size_t i = 0; i < from.size(); ++i) {
            const auto& p = from[i];
            const auto& q = from[(i + 1) % from.size()];
            if (strictly_inside(into, p) || strictly_inside(into, {(p.lat + q.lat) / 2, (p.lon + q.lon) / 2}))
              return true;
            mean.lat += p.lat / static_cast<double>(from.size());
            mean.lon += p.lon / static_cast<double>(from.size());
          }
          return strictly_inside(from, mean) && strictly_inside(into, mean);
        };
        return probe(ra, rb) || probe(rb, ra);
      };
      if (overlap())
        throw Error(ErrorCode::ConfigInvalid,
                    fmt::format("zones {} and {} overlap", zones_[a].zone_id, zones_[b].zone_id));
    }
  }
  bounds_ = {90, 180, -90, -180};
  for (const auto& z : zones_)
    for (const auto& p : z.boundary) {
      bounds_.min_lat = std::min(bounds_.min_lat, p.lat);
      bounds_.min_lon = std::min(bounds_.min_lon, p.lon);
      bounds_.max_lat = std::max(bounds_.max_lat, p.lat);
      bounds_.max_lon = std::max(bounds_.max_lon, p.lon);
    }
}

ZoneMap ZoneMap::from_json(const json& doc, std::size_t expected) {
  std::vector<Zone> zones;
  try {
    for (const auto& z : doc.at("zones")) {
      Zone zone;
      zone.zone_id = z.at("zone_id").get<int>();
      zone.name = z.value("name", fmt::format("Zone {}", zone.zone_id));
      for (const auto& c : z.at("boundary")) zone.boundary.push_back({c.at(0).get<double>(), c.at(1).get<double>()});
      zones.push_back(std::move(zone));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigInvalid, std::string("malformed zone document: ") + e.what());
  }
  return ZoneMap(std::move(zones), expected);
}

ZoneMap ZoneMap::load(const std::filesystem::path& file, std::size_t expected) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorCode::ConfigInvalid, "cannot read zones file " + file.string());
  auto doc = json::parse(in, nullptr, false);
  if (doc.is_discarded()) throw Error(ErrorCode::ConfigInvalid, "zones file is not JSON");
  return from_json(doc, expected);
}

std::optional<int> ZoneMap::try_assign(GeoPoint p) const {
  if (!p.valid()) return std::nullopt;
  for (const auto& z : zones_)
    if (on_boundary(z.boundary, p) || ray_cast_inside(z.boundary, p)) return z.zone_id;
  return std::nullopt;
}

int ZoneMap::assign_zone(GeoPoint p) const {
  if (!p.valid()) throw Error(ErrorCode::InvalidLocation, "coordinate out of range");
  if (auto z = try_assign(p)) return *z;
  throw Error(ErrorCode::Unzoned, "point lies outside every zone", {{"lat", p.lat}, {"lon", p.lon}});
}

json ZoneMap::to_json() const {
  json zones = json::array();
  for (const auto& z : zones_) {
    json ring = json::array();
    for (const auto& p : z.boundary) ring.push_back({p.lat, p.lon});
    zones.push_back({{"zone_id", z.zone_id}, {"name", z.name}, {"boundary", ring}});
  }
  return json{{"zones", zones}};
}

std::string_view to_string(MarkerKind k) { return k == MarkerKind::Crime ? "crime" : "health"; }

std::optional<MarkerKind> parse_marker_kind(std::string_view s) {
  if (s == "crime") return MarkerKind::Crime;
  if (s == "health") return MarkerKind::Health;
  return std::nullopt;
}

std::vector<Marker> build_markers(const Tables& t, MarkerKind kind, const DateWindow& window) {
  std::vector<Marker> out;
  if (kind == MarkerKind::Crime) {
    for (const auto& number : t.case_order) {
      const auto& c = t.cases.at(number);
      if (!window.contains(c.date_filed)) continue;
      out.push_back({kind, c.location, Timestamp{std::chrono::sys_days{c.date_filed}}, c.offense_type,
                     c.case_number, c.zone_id});
    }
  } else {
    for (const auto& [id, h] : t.health_cases) {
      if (!window.contains(date_of(h.recorded_at))) continue;
      out.push_back({kind, h.location, h.recorded_at, h.condition, id, h.zone_id});
    }
  }
  return out;
}

json to_json(const Marker& m) {
  return json{{"kind", to_string(m.kind)}, {"lat", m.point.lat},      {"lon", m.point.lon},
              {"label", m.label},          {"at", format_timestamp(m.occurred_at)},
              {"source_id", m.source_id},  {"zone_id", m.zone_id}};
}

std::string_view to_string(Band b) {
  switch (b) {
    case Band::None: return "none";
    case Band::Low: return "low";
    case Band::Medium: return "medium";
    case Band::High: return "high";
  }
  return "none";
}

GridFrame::GridFrame(const Bounds& b, double cell) : origin{b.min_lat, b.min_lon}, cell_size_m(cell) {
  reference_lat = (b.min_lat + b.max_lat) / 2.0;
  double height_m = (b.max_lat - b.min_lat) * kMetersPerDegree;
  double width_m = (b.max_lon - b.min_lon) * meters_per_deg_lon();
  rows = static_cast<int>(std::floor(height_m / cell)) + 1;
  cols = static_cast<int>(std::floor(width_m / cell)) + 1;
}

double GridFrame::meters_per_deg_lon() const { return kMetersPerDegree * std::cos(reference_lat * kDegToRad); }

std::optional<std::pair<int, int>> GridFrame::cell_of(GeoPoint p) const {
  double r = std::floor((p.lat - origin.lat) * kMetersPerDegree / cell_size_m);
  double c = std::floor((p.lon - origin.lon) * meters_per_deg_lon() / cell_size_m);
  if (r < 0 || c < 0 || r >= rows || c >= cols) return std::nullopt;
  return std::pair{static_cast<int>(r), static_cast<int>(c)};
}

std::vector<Band> band_counts(std::span<const std::uint64_t> counts) {
  std::vector<std::uint64_t> nonzero;
  for (auto c : counts)
    if (c > 0) nonzero.push_back(c);
  std::vector<Band> bands(counts.size(), Band::None);
  if (nonzero.empty()) return bands;
  std::sort(nonzero.begin(), nonzero.end());
  auto rank = [&](double pct) {
    auto k = static_cast<std::size_t>(std::ceil(pct * static_cast<double>(nonzero.size())));
    return nonzero[std::max<std::size_t>(k, 1) - 1];
  };
  const auto p50 = rank(0.5), p90 = rank(0.9), top = nonzero.back();
  for (std::size_t i = 0; i < counts.size(); ++i) {
    auto c = counts[i];
    if (c == 0) continue;
    if (c > p90 || c == top)
      bands[i] = Band::High;
    else if (c > p50)
      bands[i] = Band::Medium;
    else
      bands[i] = Band::Low;
  }
  return bands;
}

HotspotGrid detect_hotspots(const ZoneMap& zones, std::span<const Marker> markers, double cell_size_m,
                            std::size_t top_k) {
  if (!(cell_size_m > 0) || !std::isfinite(cell_size_m))
    throw Error(ErrorCode::InvalidField, "cell size must be positive", {{"field", "cell_size_m"}});
  if (top_k < 1) throw Error(ErrorCode::InvalidField, "top_k must be at least 1", {{"field", "top_k"}});

  HotspotGrid g{GridFrame(zones.bounds(), cell_size_m), {}, {}, {}, 0};
  const auto n = static_cast<std::size_t>(g.frame.rows) * static_cast<std::size_t>(g.frame.cols);
  if (n > 4'000'000)
    throw Error(ErrorCode::InvalidField, "cell size too small for the zone extent", {{"field", "cell_size_m"}});
  g.cells.assign(n, 0);
  for (const auto& m : markers) {
    if (auto cell = g.frame.cell_of(m.point)) {
      ++g.cells[static_cast<std::size_t>(cell->first * g.frame.cols + cell->second)];
      ++g.markers_in_grid;
    }
  }
  g.bands = band_counts(g.cells);

  std::vector<RankedCell> ranked;
  for (int r = 0; r < g.frame.rows; ++r)
    for (int c = 0; c < g.frame.cols; ++c)
      if (auto cnt = g.count(r, c); cnt > 0) ranked.push_back({r, c, cnt, g.band(r, c)});
  std::sort(ranked.begin(), ranked.end(), [](const RankedCell& a, const RankedCell& b) {
    if (a.count != b.count) return a.count > b.count;
    return std::pair{a.row, a.col} < std::pair{b.row, b.col};
  });
  if (ranked.size() > top_k) ranked.resize(top_k);
  g.top = std::move(ranked);
  return g;
}

json to_json(const HotspotGrid& g) {
  json counts = json::array(), bands = json::array(), top = json::array();
  for (int r = 0; r < g.frame.rows; ++r) {
    json crow = json::array(), brow = json::array();
    for (int c = 0; c < g.frame.cols; ++c) {
      crow.push_back(g.count(r, c));
      brow.push_back(to_string(g.band(r, c)));
    }
    counts.push_back(std::move(crow));
    bands.push_back(std::move(brow));
  }
  for (const auto& t : g.top)
    top.push_back({{"row", t.row}, {"col", t.col}, {"count", t.count}, {"band", to_string(t.band)}});
  return json{{"origin", {{"lat", g.frame.origin.lat}, {"lon", g.frame.origin.lon}}},
              {"cell_size_m", g.frame.cell_size_m},
              {"rows", g.frame.rows},
              {"cols", g.frame.cols},
              {"reference_lat", g.frame.reference_lat},
              {"counts", counts},
              {"bands", bands},
              {"top", top}};
}

json geodata_document(const ZoneMap& zones, std::span<const Marker> markers, const HotspotGrid* hotspots) {
  json doc = zones.to_json();
  json ms = json::array();
  for (const auto& m : markers) ms.push_back(to_json(m));
  doc["markers"] = ms;
  if (hotspots) doc["hotspots"] = to_json(*hotspots);
  return doc;
}

}  // namespace brgy::geo
