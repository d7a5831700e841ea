#pragma once

#include <chrono>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include <json.hpp>

namespace brgy {

using json = nlohmann::json;

/// Machine-readable error codes shared by every module and the HTTP layer.
enum class ErrorCode {
  InvalidField,
  ZoneUnknown,
  NotFound,
  DanglingReference,
  InvalidLocation,
  IllegalTransition,
  OverrideForbidden,
  NotIssued,
  Unzoned,
  EmptyDataset,
  UnknownLabel,
  SchemaMismatch,
  TooFewRecords,
  InsufficientClasses,
  EmptyMessage,
  UnsupportedCharset,
  GatewayUnconfigured,
  MalformedCsv,
  Forbidden,
  EmptyBody,
  BadCredentials,
  Unauthenticated,
  ConfigInvalid,
  BindFailure,
  Conflict,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, json details = json::object())
      : std::runtime_error(message), code_(code), details_(std::move(details)) {}

  ErrorCode code() const noexcept { return code_; }
  const json& details() const noexcept { return details_; }

 private:
  ErrorCode code_;
  json details_;
};

// ---------------------------------------------------------------------------
// Calendar

using Date = std::chrono::year_month_day;
using Timestamp = std::chrono::sys_seconds;
using Clock = std::function<Timestamp()>;

Clock system_clock();

/// Strict ISO-8601 calendar date ("2016-12-03"). Rejects impossible dates.
std::optional<Date> parse_date(std::string_view text);
std::string format_date(const Date& d);

/// "2016-12-03T08:15:00Z". Also accepts a bare date (midnight UTC).
std::optional<Timestamp> parse_timestamp(std::string_view text);
std::string format_timestamp(Timestamp t);

Date date_of(Timestamp t);
/// "2016-12"
std::string format_month(const Date& d);
/// Whole years elapsed from `birth` to `on`.
int age_on(const Date& birth, const Date& on);

/// "<18", "18-25", "26-40", "41-60", ">60"
std::string_view age_band(int age);

/// Inclusive date range; an absent bound is open.
struct DateWindow {
  std::optional<Date> from;
  std::optional<Date> to;

  bool contains(const Date& d) const {
    return (!from || d >= *from) && (!to || d <= *to);
  }
  bool empty() const { return from && to && *from > *to; }
};

// ---------------------------------------------------------------------------
// Enumerations

enum class Gender { Male, Female };
enum class Residency { Migrant, NonMigrant };
enum class Tri { Yes, No, Unknown };
enum class Role { Secretary, Treasurer, HealthWorker, Lgu, ResidentPublic };

std::string_view to_string(Gender v);
std::string_view to_string(Residency v);
std::string_view to_string(Tri v);
std::string_view to_string(Role v);

std::optional<Gender> parse_gender(std::string_view s);
std::optional<Residency> parse_residency(std::string_view s);
std::optional<Tri> parse_tri(std::string_view s);
std::optional<Role> parse_role(std::string_view s);

/// Who performed an action; carried into audit fields.
struct Officer {
  std::string username;
  Role role = Role::ResidentPublic;
};

// ---------------------------------------------------------------------------
// Geography

struct GeoPoint {
  double lat = 0.0;
  double lon = 0.0;

  bool valid() const;
  friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

/// `^\+[1-9][0-9]{1,14}$`
bool is_e164(std::string_view phone);

std::string to_lower(std::string_view s);
std::string trim(std::string_view s);

}  // namespace brgy
