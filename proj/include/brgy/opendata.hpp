#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "brgy/model.hpp"
#include "brgy/store.hpp"

namespace brgy::opendata {

inline constexpr std::uint64_t kSuppressBelow = 3;
inline constexpr std::string_view kSuppressed = "<3";
inline constexpr std::string_view kRedacted = "[redacted]";

struct DatasetDescriptor {
  std::string dataset_id;
  std::string title;
  std::string description;
  std::vector<std::string> columns;
  std::vector<std::string> count_columns;
};

const std::vector<DatasetDescriptor>& list_datasets();
const DatasetDescriptor& describe(const std::string& dataset_id);  // NOT_FOUND
json to_json(const DatasetDescriptor& d);

/// "5" or "<3" for counts below the threshold (zero included).
std::string count_cell(std::uint64_t n);

enum class PrivateField { FullName, MobileNumber, Address, ResidentId, CaseNumber };
std::string_view to_string(PrivateField f);

struct Violation {
  std::size_t row = 0;  // 0 is the header
  std::size_t column = 0;
  PrivateField field = PrivateField::FullName;
  std::string subject;  // resident id or case number the match belongs to
};

/// Everything considered private in a store snapshot.
class PrivacyIndex {
 public:
  explicit PrivacyIndex(const Tables& t);
  std::vector<Violation> scan_cell(std::string_view cell) const;
  bool clean(std::string_view cell) const { return scan_cell(cell).empty(); }

 private:
  struct Name {
    std::string form;  // lower-cased
    std::string resident_id;
  };
  std::vector<Name> names_;
  std::vector<std::pair<std::string, std::string>> phones_;     // digits, resident id
  std::vector<std::pair<std::string, std::string>> addresses_;  // lower-cased, resident id
  std::set<std::string> resident_ids_;
  std::set<std::string> case_numbers_;
};

/// Throws MALFORMED_CSV.
std::vector<Violation> privacy_scan(std::string_view csv_bytes, const Tables& snapshot);

/// Deterministic aggregate CSV. Label cells that would leak a private value
/// are replaced by "[redacted]" before grouping. Throws NOT_FOUND.
std::string export_csv(const Tables& t, const std::set<int>& zone_ids, const std::string& dataset_id,
                       const DateWindow& window = {});

/// Throws FORBIDDEN unless secretary or lgu, EMPTY_BODY, INVALID_FIELD for an
/// empty title.
Advisory publish_advisory(Database& db, const std::string& title, const std::string& body, const Officer& officer);

/// Newest first.
std::vector<Advisory> list_advisories(const Tables& t);

}  // namespace brgy::opendata
