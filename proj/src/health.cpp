#include "brgy/health.hpp"

#include <fmt/format.h>

#include "brgy/csv.hpp"

namespace brgy {

std::optional<HealthGrouping> parse_health_grouping(std::string_view s) {
  if (s == "zone") return HealthGrouping::Zone;
  if (s == "condition") return HealthGrouping::Condition;
  return std::nullopt;
}

std::string Health::register_child(ChildRecord record) {
  record.last_name = trim(record.last_name);
  record.first_name = trim(record.first_name);
  record.middle_name = trim(record.middle_name);
  if (record.last_name.empty())
    throw Error(ErrorCode::InvalidField, "last_name: required", {{"field", "last_name"}});
  if (!record.birthdate.ok())
    throw Error(ErrorCode::InvalidField, "birthdate: not a calendar date", {{"field", "birthdate"}});
  return db_.write([&](const Tables& t, Batch& batch) {
    if (std::chrono::sys_days{record.birthdate} > std::chrono::sys_days{date_of(db_.now())})
      throw Error(ErrorCode::InvalidField, "birthdate: in the future", {{"field", "birthdate"}});
    if (record.guardian_resident_id && !t.residents.count(*record.guardian_resident_id))
      throw Error(ErrorCode::NotFound, "no resident " + *record.guardian_resident_id,
                  {{"resident_id", *record.guardian_resident_id}});
    record.child_id = sequence_id("CH-", t.children.size() + 1);
    record.recorded_at = db_.now();
    batch.emit("child_registered", {{"child", record}});
    return record.child_id;
  });
}

std::string Health::record_health_case(const HealthCaseInput& in, const Officer& recorded_by) {
  auto condition = to_lower(trim(in.condition));
  if (condition.empty()) throw Error(ErrorCode::InvalidField, "condition: required", {{"field", "condition"}});
  if (!in.location.valid())
    throw Error(ErrorCode::InvalidLocation, "coordinate out of range", {{"lat", in.location.lat}, {"lon", in.location.lon}});
  int zone = 0;
  if (in.zone_id) {
    if (!zones_.has_zone(*in.zone_id))
      throw Error(ErrorCode::ZoneUnknown, fmt::format("zone {} is not configured", *in.zone_id), {{"zone_id", *in.zone_id}});
    zone = *in.zone_id;
  } else {
    auto z = zones_.try_assign(in.location);
    if (!z) throw Error(ErrorCode::InvalidLocation, "location lies outside every zone");
    zone = *z;
  }

  return db_.write([&](const Tables& t, Batch& batch) {
    bool is_resident = in.subject.kind == HealthSubject::Kind::Resident;
    bool exists = is_resident ? t.residents.count(in.subject.id) > 0 : t.children.count(in.subject.id) > 0;
    if (!exists)
      throw Error(ErrorCode::NotFound, fmt::format("no {} {}", is_resident ? "resident" : "child", in.subject.id),
                  {{"subject_id", in.subject.id}});
    HealthCase c;
    c.health_case_id = sequence_id("HC-", t.health_cases.size() + 1);
    c.subject = in.subject;
    c.condition = condition;
    c.notes = in.notes;
    c.location = in.location;
    c.zone_id = zone;
    c.recorded_at = db_.now();
    c.recorded_by = recorded_by.username;
    batch.emit("health_case_recorded", {{"case", c}});
    if (is_resident)
      batch.emit("transaction_appended",
                 {{"entry", TransactionEntry{in.subject.id, TransactionKind::HealthCase, c.health_case_id,
                                             c.recorded_at}}});
    return c.health_case_id;
  });
}

std::map<std::string, std::size_t> Health::health_summary(const DateWindow& window, HealthGrouping group_by) const {
  if (window.empty()) throw Error(ErrorCode::InvalidField, "window is empty", {{"field", "window"}});
  return db_.read([&](const Tables& t) {
    std::map<std::string, std::size_t> out;
    for (const auto& [id, c] : t.health_cases) {
      if (!window.contains(date_of(c.recorded_at))) continue;
      ++out[group_by == HealthGrouping::Zone ? std::to_string(c.zone_id) : c.condition];
    }
    return out;
  });
}

std::vector<ChildRecord> Health::list_children() const {
  return db_.read([](const Tables& t) {
    std::vector<ChildRecord> out;
    for (const auto& [id, c] : t.children) out.push_back(c);
    return out;
  });
}

std::vector<HealthCase> Health::list_cases(const DateWindow& window) const {
  return db_.read([&](const Tables& t) {
    std::vector<HealthCase> out;
    for (const auto& [id, c] : t.health_cases)
      if (window.contains(date_of(c.recorded_at))) out.push_back(c);
    return out;
  });
}

std::string Health::export_csv(const DateWindow& window) const {
  return db_.read([&](const Tables& t) {
    std::string out = csv::format_row(kHealthCsvHeader);
    for (const auto& [id, c] : t.health_cases) {
      auto day = date_of(c.recorded_at);
      if (!window.contains(day)) continue;
      Date birth;
      Gender gender;
      if (c.subject.kind == HealthSubject::Kind::Resident) {
        const auto& r = t.residents.at(c.subject.id);
        birth = r.birthdate;
        gender = r.gender;
      } else {
        const auto& ch = t.children.at(c.subject.id);
        birth = ch.birthdate;
        gender = ch.gender;
      }
      out += csv::format_row({format_timestamp(c.recorded_at), std::to_string(c.zone_id), c.condition,
                              std::string(age_band(std::max(0, age_on(birth, day)))),
                              std::string(to_string(gender))});
    }
    return out;
  });
}

}  // namespace brgy
