#pragma once

#include <cstddef>
#include <limits>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "brgy/model.hpp"
#include "brgy/store.hpp"

namespace brgy {

struct Registration {
  std::string resident_id;
  /// An existing resident already has the same full name and birthdate.
  bool duplicate_warning = false;
};

struct Page {
  std::size_t offset = 0;
  std::size_t limit = std::numeric_limits<std::size_t>::max();
};

struct Profile {
  Resident resident;
  std::vector<TransactionEntry> history;
};

/// Case-insensitive (last, first, middle), then resident_id.
bool resident_order(const Resident& a, const Resident& b);
/// Case-insensitive substring match against any name field.
bool name_matches(const Resident& r, std::string_view query);

inline const std::vector<std::string> kResidentCsvHeader{
    "resident_id", "last_name",  "first_name", "middle_name", "birthdate",    "gender",
    "occupation",  "residency_status", "zone_id", "address", "mobile_number", "registered_at"};

class Registry {
 public:
  Registry(Database& db, std::set<int> zone_ids) : db_(db), zone_ids_(std::move(zone_ids)) {}

  /// `profile.resident_id` and `registered_at` are assigned here.
  Registration register_resident(Resident profile);
  std::vector<Resident> find_residents(std::string_view query, Page page = {}) const;
  Profile get_profile(const std::string& resident_id) const;
  void append_transaction(const TransactionEntry& entry);
  std::size_t size() const;

  /// Throws INVALID_FIELD / ZONE_UNKNOWN describing the first bad field.
  void validate(const Resident& profile, Date today) const;

  std::string export_csv() const;
  /// All rows are validated before any is stored; incoming ids are replaced
  /// by fresh ones (returned in row order).
  std::vector<Registration> import_csv(std::string_view text);

 private:
  Registration register_locked(const Tables& t, Batch& batch, Resident profile, std::size_t pending);

  Database& db_;
  std::set<int> zone_ids_;
};

}  // namespace brgy
