#include "brgy/common.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>

#include <fmt/format.h>

namespace brgy {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidField: return "INVALID_FIELD";
    case ErrorCode::ZoneUnknown: return "ZONE_UNKNOWN";
    case ErrorCode::NotFound: return "NOT_FOUND";
    case ErrorCode::DanglingReference: return "DANGLING_REFERENCE";
    case ErrorCode::InvalidLocation: return "INVALID_LOCATION";
    case ErrorCode::IllegalTransition: return "ILLEGAL_TRANSITION";
    case ErrorCode::OverrideForbidden: return "OVERRIDE_FORBIDDEN";
    case ErrorCode::NotIssued: return "NOT_ISSUED";
    case ErrorCode::Unzoned: return "UNZONED";
    case ErrorCode::EmptyDataset: return "EMPTY_DATASET";
    case ErrorCode::UnknownLabel: return "UNKNOWN_LABEL";
    case ErrorCode::SchemaMismatch: return "SCHEMA_MISMATCH";
    case ErrorCode::TooFewRecords: return "TOO_FEW_RECORDS";
    case ErrorCode::InsufficientClasses: return "INSUFFICIENT_CLASSES";
    case ErrorCode::EmptyMessage: return "EMPTY_MESSAGE";
    case ErrorCode::UnsupportedCharset: return "UNSUPPORTED_CHARSET";
    case ErrorCode::GatewayUnconfigured: return "GATEWAY_UNCONFIGURED";
    case ErrorCode::MalformedCsv: return "MALFORMED_CSV";
    case ErrorCode::Forbidden: return "FORBIDDEN";
    case ErrorCode::EmptyBody: return "EMPTY_BODY";
    case ErrorCode::BadCredentials: return "BAD_CREDENTIALS";
    case ErrorCode::Unauthenticated: return "UNAUTHENTICATED";
    case ErrorCode::ConfigInvalid: return "CONFIG_INVALID";
    case ErrorCode::BindFailure: return "BIND_FAILURE";
    case ErrorCode::Conflict: return "CONFLICT";
  }
  return "UNKNOWN";
}

Clock system_clock() {
  return [] { return std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now()); };
}

namespace {

bool parse_int(std::string_view s, int& out) {
  if (s.empty()) return false;
  for (char c : s)
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && p == s.data() + s.size();
}

}  // namespace

std::optional<Date> parse_date(std::string_view text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
  int y = 0, m = 0, d = 0;
  if (!parse_int(text.substr(0, 4), y) || !parse_int(text.substr(5, 2), m) ||
      !parse_int(text.substr(8, 2), d))
    return std::nullopt;
  Date date{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
            std::chrono::day{static_cast<unsigned>(d)}};
  if (!date.ok()) return std::nullopt;
  return date;
}

std::string format_date(const Date& d) {
  return fmt::format("{:04d}-{:02d}-{:02d}", static_cast<int>(d.year()),
                     static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()));
}

std::optional<Timestamp> parse_timestamp(std::string_view text) {
  auto date = parse_date(text.substr(0, std::min<size_t>(10, text.size())));
  if (!date) return std::nullopt;
  Timestamp base{std::chrono::sys_days{*date}};
  if (text.size() == 10) return base;
  // YYYY-MM-DDTHH:MM:SSZ
  if (text.size() != 20 || text[10] != 'T' || text[13] != ':' || text[16] != ':' || text[19] != 'Z')
    return std::nullopt;
  int hh = 0, mm = 0, ss = 0;
  if (!parse_int(text.substr(11, 2), hh) || !parse_int(text.substr(14, 2), mm) ||
      !parse_int(text.substr(17, 2), ss) || hh > 23 || mm > 59 || ss > 60)
    return std::nullopt;
  return base + std::chrono::hours{hh} + std::chrono::minutes{mm} + std::chrono::seconds{ss};
}

std::string format_timestamp(Timestamp t) {
  auto day = std::chrono::floor<std::chrono::days>(t);
  std::chrono::hh_mm_ss hms{t - day};
  return fmt::format("{}T{:02d}:{:02d}:{:02d}Z", format_date(Date{day}), hms.hours().count(),
                     hms.minutes().count(), hms.seconds().count());
}

Date date_of(Timestamp t) { return Date{std::chrono::floor<std::chrono::days>(t)}; }

std::string format_month(const Date& d) {
  return fmt::format("{:04d}-{:02d}", static_cast<int>(d.year()), static_cast<unsigned>(d.month()));
}

int age_on(const Date& birth, const Date& on) {
  int years = static_cast<int>(on.year()) - static_cast<int>(birth.year());
  if (std::pair{on.month(), on.day()} < std::pair{birth.month(), birth.day()}) --years;
  return years;
}

std::string_view age_band(int age) {
  if (age < 18) return "<18";
  if (age <= 25) return "18-25";
  if (age <= 40) return "26-40";
  if (age <= 60) return "41-60";
  return ">60";
}

std::string_view to_string(Gender v) { return v == Gender::Male ? "male" : "female"; }
std::string_view to_string(Residency v) { return v == Residency::Migrant ? "migrant" : "non_migrant"; }

std::string_view to_string(Tri v) {
  switch (v) {
    case Tri::Yes: return "yes";
    case Tri::No: return "no";
    case Tri::Unknown: return "unknown";
  }
  return "unknown";
}

std::string_view to_string(Role v) {
  switch (v) {
    case Role::Secretary: return "secretary";
    case Role::Treasurer: return "treasurer";
    case Role::HealthWorker: return "health_worker";
    case Role::Lgu: return "lgu";
    case Role::ResidentPublic: return "resident_public";
  }
  return "resident_public";
}

std::optional<Gender> parse_gender(std::string_view s) {
  auto l = to_lower(s);
  if (l == "male") return Gender::Male;
  if (l == "female") return Gender::Female;
  return std::nullopt;
}

std::optional<Residency> parse_residency(std::string_view s) {
  auto l = to_lower(s);
  if (l == "migrant") return Residency::Migrant;
  if (l == "non_migrant" || l == "non-migrant") return Residency::NonMigrant;
  return std::nullopt;
}

std::optional<Tri> parse_tri(std::string_view s) {
  auto l = to_lower(s);
  if (l == "yes") return Tri::Yes;
  if (l == "no") return Tri::No;
  if (l == "unknown" || l.empty()) return Tri::Unknown;
  return std::nullopt;
}

std::optional<Role> parse_role(std::string_view s) {
  for (Role r : {Role::Secretary, Role::Treasurer, Role::HealthWorker, Role::Lgu, Role::ResidentPublic})
    if (to_string(r) == s) return r;
  return std::nullopt;
}

bool GeoPoint::valid() const {
  return std::isfinite(lat) && std::isfinite(lon) && lat >= -90.0 && lat <= 90.0 && lon >= -180.0 &&
         lon <= 180.0;
}

bool is_e164(std::string_view phone) {
  if (phone.size() < 3 || phone.size() > 16 || phone[0] != '+') return false;
  if (phone[1] < '1' || phone[1] > '9') return false;
  return std::all_of(phone.begin() + 1, phone.end(),
                     [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace brgy
