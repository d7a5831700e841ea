#include "brgy/registry.hpp"

#include <algorithm>
#include <tuple>

#include <fmt/format.h>

#include "brgy/csv.hpp"

namespace brgy {

namespace {

[[noreturn]] void invalid(const char* field, const std::string& why) {
  throw Error(ErrorCode::InvalidField, fmt::format("{}: {}", field, why), {{"field", field}, {"reason", why}});
}

bool has_control_chars(std::string_view s) {
  return std::any_of(s.begin(), s.end(), [](unsigned char c) { return c < 0x20 || c == 0x7f; });
}

}  // namespace

bool resident_order(const Resident& a, const Resident& b) {
  auto key = [](const Resident& r) {
    return std::tuple{to_lower(r.last_name), to_lower(r.first_name), to_lower(r.middle_name)};
  };
  auto ka = key(a), kb = key(b);
  if (ka != kb) return ka < kb;
  return a.resident_id < b.resident_id;
}

bool name_matches(const Resident& r, std::string_view query) {
  if (query.empty()) return true;
  auto q = to_lower(query);
  for (const auto* field : {&r.last_name, &r.first_name, &r.middle_name})
    if (to_lower(*field).find(q) != std::string::npos) return true;
  return false;
}

void Registry::validate(const Resident& p, Date today) const {
  if (trim(p.last_name).empty()) invalid("last_name", "required");
  if (trim(p.first_name).empty()) invalid("first_name", "required");
  for (const auto& [name, value] : {std::pair{"last_name", &p.last_name}, std::pair{"first_name", &p.first_name},
                                    std::pair{"middle_name", &p.middle_name}, std::pair{"occupation", &p.occupation},
                                    std::pair{"address", &p.address}})
    if (has_control_chars(*value)) invalid(name, "contains control characters");
  if (!p.birthdate.ok()) invalid("birthdate", "not a calendar date");
  if (std::chrono::sys_days{p.birthdate} > std::chrono::sys_days{today}) invalid("birthdate", "in the future");
  if (p.mobile_number && !is_e164(*p.mobile_number)) invalid("mobile_number", "not E.164");
  if (!zone_ids_.count(p.zone_id))
    throw Error(ErrorCode::ZoneUnknown, fmt::format("zone {} is not configured", p.zone_id),
                {{"field", "zone_id"}, {"zone_id", p.zone_id}});
}

Registration Registry::register_locked(const Tables& t, Batch& batch, Resident p, std::size_t pending) {
  p.last_name = trim(p.last_name);
  p.first_name = trim(p.first_name);
  p.middle_name = trim(p.middle_name);
  validate(p, date_of(db_.now()));

  Registration out;
  out.resident_id = sequence_id("", t.residents.size() + pending + 1);
  out.duplicate_warning = std::any_of(t.residents.begin(), t.residents.end(), [&](const auto& kv) {
    const auto& r = kv.second;
    return r.birthdate == p.birthdate && to_lower(r.last_name) == to_lower(p.last_name) &&
           to_lower(r.first_name) == to_lower(p.first_name) && to_lower(r.middle_name) == to_lower(p.middle_name);
  });
  p.resident_id = out.resident_id;
  p.registered_at = db_.now();
  batch.emit("resident_registered", {{"resident", p}});
  return out;
}

Registration Registry::register_resident(Resident profile) {
  return db_.write([&](const Tables& t, Batch& batch) { return register_locked(t, batch, std::move(profile), 0); });
}

std::vector<Resident> Registry::find_residents(std::string_view query, Page page) const {
  auto matches = db_.read([&](const Tables& t) {
    std::vector<Resident> out;
    for (const auto& [id, r] : t.residents)
      if (name_matches(r, query)) out.push_back(r);
    return out;
  });
  std::sort(matches.begin(), matches.end(), resident_order);
  if (page.offset >= matches.size()) return {};
  auto end = page.offset + std::min(page.limit, matches.size() - page.offset);
  return {matches.begin() + static_cast<std::ptrdiff_t>(page.offset), matches.begin() + static_cast<std::ptrdiff_t>(end)};
}

Profile Registry::get_profile(const std::string& resident_id) const {
  return db_.read([&](const Tables& t) {
    auto it = t.residents.find(resident_id);
    if (it == t.residents.end())
      throw Error(ErrorCode::NotFound, "no resident " + resident_id, {{"resident_id", resident_id}});
    Profile p{it->second, {}};
    if (auto h = t.history.find(resident_id); h != t.history.end()) p.history = h->second;
    std::stable_sort(p.history.begin(), p.history.end(),
                     [](const auto& a, const auto& b) { return a.occurred_at < b.occurred_at; });
    return p;
  });
}

void Registry::append_transaction(const TransactionEntry& entry) {
  db_.write([&](const Tables& t, Batch& batch) {
    if (!t.residents.count(entry.resident_id))
      throw Error(ErrorCode::NotFound, "no resident " + entry.resident_id, {{"resident_id", entry.resident_id}});
    if (!t.reference_exists(entry.kind, entry.reference_id))
      throw Error(ErrorCode::DanglingReference,
                  fmt::format("{} reference {} does not exist", to_string(entry.kind), entry.reference_id),
                  {{"reference_id", entry.reference_id}});
    batch.emit("transaction_appended", {{"entry", entry}});
  });
}

std::size_t Registry::size() const {
  return db_.read([](const Tables& t) { return t.residents.size(); });
}

std::string Registry::export_csv() const {
  auto residents = find_residents("");
  std::sort(residents.begin(), residents.end(),
            [](const Resident& a, const Resident& b) { return a.resident_id < b.resident_id; });
  std::string out = csv::format_row(kResidentCsvHeader);
  for (const auto& r : residents) {
    out += csv::format_row({r.resident_id, r.last_name, r.first_name, r.middle_name, format_date(r.birthdate),
                            std::string(to_string(r.gender)), r.occupation,
                            std::string(to_string(r.residency_status)), std::to_string(r.zone_id), r.address,
                            r.mobile_number.value_or(""), format_timestamp(r.registered_at)});
  }
  return out;
}

std::vector<Registration> Registry::import_csv(std::string_view text) {
  auto rows = csv::parse(text);
  if (rows.empty() || rows.front() != kResidentCsvHeader)
    throw Error(ErrorCode::MalformedCsv, "resident CSV header mismatch");

  std::vector<Resident> parsed;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& row = rows[i];
    if (row.size() == 1 && row[0].empty()) continue;
    auto fail = [&](const char* field, const std::string& why) {
      throw Error(ErrorCode::InvalidField, fmt::format("row {}: {}: {}", i + 1, field, why),
                  {{"row", i + 1}, {"field", field}});
    };
    if (row.size() != kResidentCsvHeader.size()) fail("row", "wrong column count");
    Resident r;
    r.last_name = row[1];
    r.first_name = row[2];
    r.middle_name = row[3];
    auto bd = parse_date(row[4]);
    if (!bd) fail("birthdate", "not an ISO date");
    r.birthdate = *bd;
    auto g = parse_gender(row[5]);
    if (!g) fail("gender", "expected male or female");
    r.gender = *g;
    r.occupation = row[6];
    auto rs = parse_residency(row[7]);
    if (!rs) fail("residency_status", "expected migrant or non_migrant");
    r.residency_status = *rs;
    try {
      std::size_t used = 0;
      r.zone_id = std::stoi(row[8], &used);
      if (used != row[8].size()) fail("zone_id", "not an integer");
    } catch (const std::logic_error&) {
      fail("zone_id", "not an integer");
    }
    r.address = row[9];
    if (!row[10].empty()) r.mobile_number = row[10];
    parsed.push_back(std::move(r));
  }

  return db_.write([&](const Tables& t, Batch& batch) {
    std::vector<Registration> out;
    for (std::size_t i = 0; i < parsed.size(); ++i) out.push_back(register_locked(t, batch, parsed[i], i));
    return out;
  });
}

}  // namespace brgy
