#pragma once

#include <map>
#include <string>
#include <vector>

#include "brgy/geo.hpp"
#include "brgy/model.hpp"
#include "brgy/store.hpp"

namespace brgy {

enum class HealthGrouping { Zone, Condition };
std::optional<HealthGrouping> parse_health_grouping(std::string_view s);

struct HealthCaseInput {
  HealthSubject subject;
  std::string condition;
  std::string notes;
  GeoPoint location;
  std::optional<int> zone_id;
};

inline const std::vector<std::string> kHealthCsvHeader{"recorded_at", "zone_id", "condition", "age_band", "gender"};

class Health {
 public:
  Health(Database& db, const geo::ZoneMap& zones) : db_(db), zones_(zones) {}

  std::string register_child(ChildRecord record);
  std::string record_health_case(const HealthCaseInput& input, const Officer& recorded_by);

  /// Counts per zone id (as text) or per condition. Throws INVALID_FIELD for
  /// an inverted window.
  std::map<std::string, std::size_t> health_summary(const DateWindow& window, HealthGrouping group_by) const;

  std::vector<ChildRecord> list_children() const;
  std::vector<HealthCase> list_cases(const DateWindow& window = {}) const;

  /// De-identified case rows: no names, ids, or addresses.
  std::string export_csv(const DateWindow& window = {}) const;

 private:
  Database& db_;
  const geo::ZoneMap& zones_;
};

}  // namespace brgy
