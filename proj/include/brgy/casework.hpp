#pragma once

#include <array>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "brgy/geo.hpp"
#include "brgy/model.hpp"
#include "brgy/store.hpp"

namespace brgy {

/// Factors as entered at filing time. Demographics left empty are taken
/// from the respondent's registry profile.
struct FactorInput {
  std::array<Tri, 10> factors{Tri::Unknown, Tri::Unknown, Tri::Unknown, Tri::Unknown, Tri::Unknown,
                              Tri::Unknown, Tri::Unknown, Tri::Unknown, Tri::Unknown, Tri::Unknown};
  std::optional<int> age;
  std::optional<Gender> gender;
  std::optional<Residency> residency_status;
};

FactorInput factor_input_from_json(const json& j);

struct BlotterFiling {
  std::vector<std::string> complainant_ids;
  std::vector<std::string> respondent_ids;
  std::string offense_type;
  std::string narrative;
  GeoPoint location;
  std::optional<int> zone_id;  // assigned from the location when absent
  Date date_filed{};
  std::map<std::string, FactorInput> factors;
};

inline const std::vector<std::string> kBlotterCsvHeader{
    "case_number", "date_filed", "complainant_ids", "respondent_ids", "offense_type",
    "status",      "lat",        "lon",             "zone_id"};

bool legal_transition(CaseStatus from, CaseStatus to);

class Casework {
 public:
  Casework(Database& db, const geo::ZoneMap& zones, std::string barangay_name = "Barangay",
           std::uint64_t seed = std::random_device{}());

  std::string file_blotter(const BlotterFiling& filing);
  void update_case_status(const std::string& case_number, CaseStatus next, const Officer& officer);
  BlotterCase get_case(const std::string& case_number) const;
  std::vector<BlotterCase> list_cases(const DateWindow& window = {}) const;

  /// Open cases naming the resident as respondent, in filing order.
  std::vector<std::string> blocking_cases(const std::string& resident_id) const;

  /// Denies when the resident is a respondent in an open case unless a
  /// secretary overrides. The check and the write happen under one lock.
  Certificate issue_clearance(const std::string& resident_id, CertificateKind kind, const std::string& purpose,
                              const Officer& officer, bool override_open_cases);
  std::vector<Certificate> clearance_history(const std::string& resident_id) const;
  std::string render_certificate(const std::string& certificate_id) const;

  std::string export_csv() const;
  /// Imports historical cases verbatim (numbers and status preserved).
  std::vector<std::string> import_csv(std::string_view text);

 private:
  std::string fresh_case_number(const Tables& t, const std::set<std::string>& taken);
  BlotterCase build_case(const Tables& t, const BlotterFiling& filing, std::string number) const;

  Database& db_;
  const geo::ZoneMap& zones_;
  std::string barangay_name_;
  std::mutex rng_mutex_;
  std::mt19937_64 rng_;
};

}  // namespace brgy
