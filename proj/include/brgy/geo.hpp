#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "brgy/common.hpp"
#include "brgy/store.hpp"

namespace brgy::geo {

inline constexpr double kEarthRadiusM = 6'371'000.0;
/// Local equirectangular scale; longitude scale is this times cos(latitude).
inline constexpr double kMetersPerDegree = 111'320.0;

/// Great-circle distance in meters.
double haversine(GeoPoint a, GeoPoint b);

struct Zone {
  int zone_id = 0;
  std::string name;
  std::vector<GeoPoint> boundary;  // closing vertex optional
};

struct Bounds {
  double min_lat = 0, min_lon = 0, max_lat = 0, max_lon = 0;
};

// Planar predicates in (lon, lat) space.
bool on_boundary(std::span<const GeoPoint> ring, GeoPoint p);
bool ray_cast_inside(std::span<const GeoPoint> ring, GeoPoint p);
bool is_simple_polygon(std::span<const GeoPoint> ring);

/// Validated zone configuration: exactly `expected` zones, simple polygons,
/// interiors pairwise disjoint.
class ZoneMap {
 public:
  explicit ZoneMap(std::vector<Zone> zones, std::size_t expected = 7);

  static ZoneMap from_json(const json& doc, std::size_t expected = 7);
  static ZoneMap load(const std::filesystem::path& file, std::size_t expected = 7);

  /// Zone containing `p`; boundary points go to the lowest touching zone id.
  /// Throws UNZONED.
  int assign_zone(GeoPoint p) const;
  std::optional<int> try_assign(GeoPoint p) const;

  bool has_zone(int zone_id) const { return ids_.count(zone_id) > 0; }
  const std::set<int>& zone_ids() const { return ids_; }
  const std::vector<Zone>& zones() const { return zones_; }
  Bounds bounds() const { return bounds_; }

  json to_json() const;

 private:
  std::vector<Zone> zones_;  // sorted by zone_id
  std::set<int> ids_;
  Bounds bounds_;
};

// ---------------------------------------------------------------------------
// Markers

enum class MarkerKind { Crime, Health };
std::string_view to_string(MarkerKind k);
std::optional<MarkerKind> parse_marker_kind(std::string_view s);

struct Marker {
  MarkerKind kind = MarkerKind::Crime;
  GeoPoint point;
  Timestamp occurred_at{};
  std::string label;
  std::string source_id;
  int zone_id = 0;
};

/// One marker per blotter case (crime) or health case (health) in window.
std::vector<Marker> build_markers(const Tables& t, MarkerKind kind, const DateWindow& window);

json to_json(const Marker& m);

// ---------------------------------------------------------------------------
// Hotspot grid

enum class Band { None, Low, Medium, High };
std::string_view to_string(Band b);

/// Cell indexing for a grid anchored at the SW corner of a bounding box.
struct GridFrame {
  GeoPoint origin;
  double cell_size_m = 0;
  int rows = 0;
  int cols = 0;
  double reference_lat = 0;  // latitude used for the longitude scale

  GridFrame(const Bounds& b, double cell_size_m);

  double meters_per_deg_lon() const;
  std::optional<std::pair<int, int>> cell_of(GeoPoint p) const;
};

struct RankedCell {
  int row = 0;
  int col = 0;
  std::uint64_t count = 0;
  Band band = Band::None;
};

struct HotspotGrid {
  GridFrame frame;
  std::vector<std::uint64_t> cells;  // row-major
  std::vector<Band> bands;
  std::vector<RankedCell> top;
  std::size_t markers_in_grid = 0;

  std::uint64_t count(int row, int col) const { return cells[static_cast<std::size_t>(row * frame.cols + col)]; }
  Band band(int row, int col) const { return bands[static_cast<std::size_t>(row * frame.cols + col)]; }
};

/// Nearest-rank percentile thresholds over nonzero counts: none = 0,
/// low <= p50 < medium <= p90 < high. The largest count is always high.
std::vector<Band> band_counts(std::span<const std::uint64_t> counts);

/// Throws INVALID_FIELD when cell_size_m <= 0 or top_k < 1.
HotspotGrid detect_hotspots(const ZoneMap& zones, std::span<const Marker> markers, double cell_size_m,
                            std::size_t top_k);

json to_json(const HotspotGrid& g);

/// Zones, markers and (optionally) a hotspot grid as one document.
json geodata_document(const ZoneMap& zones, std::span<const Marker> markers,
                      const HotspotGrid* hotspots = nullptr);

}  // namespace brgy::geo
