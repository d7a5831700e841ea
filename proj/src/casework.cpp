#include "brgy/casework.hpp"

#include <algorithm>
#include <set>

#include <fmt/format.h>

#include "brgy/csv.hpp"

namespace brgy {

namespace {

std::vector<std::string> dedupe(const std::vector<std::string>& ids) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& id : ids)
    if (seen.insert(id).second) out.push_back(id);
  return out;
}

bool is_case_number(std::string_view s) {
  return s.size() == 6 && s[0] != '0' && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

std::vector<std::string> split_ids(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    auto end = s.find(';', start);
    if (end == std::string::npos) end = s.size();
    auto id = trim(std::string_view(s).substr(start, end - start));
    if (!id.empty()) out.push_back(id);
    start = end + 1;
  }
  return out;
}

std::string join_ids(const std::vector<std::string>& ids, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) out += sep;
    out += ids[i];
  }
  return out;
}

std::string upper(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return s;
}

std::string long_date(const Date& d) {
  static constexpr std::array<const char*, 12> kMonths{"January", "February", "March",     "April",
                                                       "May",     "June",     "July",      "August",
                                                       "September", "October", "November", "December"};
  return fmt::format("{} {:02d}, {}", kMonths[static_cast<unsigned>(d.month()) - 1],
                     static_cast<unsigned>(d.day()), static_cast<int>(d.year()));
}

}  // namespace

FactorInput factor_input_from_json(const json& j) {
  FactorInput in;
  for (std::size_t i = 0; i < in.factors.size(); ++i) {
    std::string key(OffenderFactorVector::kFactorNames[i]);
    if (!j.contains(key)) continue;
    auto v = parse_tri(j.at(key).get<std::string>());
    if (!v) throw Error(ErrorCode::InvalidField, key + ": expected yes, no or unknown", {{"field", key}});
    in.factors[i] = *v;
  }
  if (j.contains("age") && !j.at("age").is_null()) in.age = j.at("age").get<int>();
  if (j.contains("gender") && !j.at("gender").is_null()) {
    in.gender = parse_gender(j.at("gender").get<std::string>());
    if (!in.gender) throw Error(ErrorCode::InvalidField, "gender: expected male or female", {{"field", "gender"}});
  }
  if (j.contains("residency_status") && !j.at("residency_status").is_null()) {
    in.residency_status = parse_residency(j.at("residency_status").get<std::string>());
    if (!in.residency_status)
      throw Error(ErrorCode::InvalidField, "residency_status: expected migrant or non_migrant",
                  {{"field", "residency_status"}});
  }
  return in;
}

bool legal_transition(CaseStatus from, CaseStatus to) {
  return from == CaseStatus::Open && to != CaseStatus::Open;
}

Casework::Casework(Database& db, const geo::ZoneMap& zones, std::string barangay_name, std::uint64_t seed)
    : db_(db), zones_(zones), barangay_name_(std::move(barangay_name)), rng_(seed) {}

std::string Casework::fresh_case_number(const Tables& t, const std::set<std::string>& taken) {
  std::lock_guard lock(rng_mutex_);
  std::uniform_int_distribution<int> dist(100000, 999999);
  for (;;) {
    auto candidate = std::to_string(dist(rng_));
    if (!t.cases.count(candidate) && !taken.count(candidate)) return candidate;
  }
}

BlotterCase Casework::build_case(const Tables& t, const BlotterFiling& f, std::string number) const {
  BlotterCase c;
  c.case_number = std::move(number);
  c.complainant_ids = dedupe(f.complainant_ids);
  c.respondent_ids = dedupe(f.respondent_ids);
  if (c.complainant_ids.empty())
    throw Error(ErrorCode::InvalidField, "at least one complainant is required", {{"field", "complainant_ids"}});
  if (c.respondent_ids.empty())
    throw Error(ErrorCode::InvalidField, "at least one respondent is required", {{"field", "respondent_ids"}});
  for (const auto* ids : {&c.complainant_ids, &c.respondent_ids})
    for (const auto& id : *ids)
      if (!t.residents.count(id)) throw Error(ErrorCode::NotFound, "no resident " + id, {{"resident_id", id}});

  if (!f.location.valid())
    throw Error(ErrorCode::InvalidLocation, "coordinate out of range",
                {{"lat", f.location.lat}, {"lon", f.location.lon}});
  c.location = f.location;
  if (f.zone_id) {
    if (!zones_.has_zone(*f.zone_id))
      throw Error(ErrorCode::ZoneUnknown, fmt::format("zone {} is not configured", *f.zone_id),
                  {{"zone_id", *f.zone_id}});
    c.zone_id = *f.zone_id;
  } else {
    auto z = zones_.try_assign(f.location);
    if (!z)
      throw Error(ErrorCode::InvalidLocation, "location lies outside every zone",
                  {{"lat", f.location.lat}, {"lon", f.location.lon}});
    c.zone_id = *z;
  }

  c.offense_type = to_lower(trim(f.offense_type));
  if (c.offense_type.empty()) throw Error(ErrorCode::InvalidField, "offense type is required", {{"field", "offense_type"}});
  if (!f.date_filed.ok()) throw Error(ErrorCode::InvalidField, "date_filed is not a date", {{"field", "date_filed"}});
  c.date_filed = f.date_filed;
  c.narrative = f.narrative;
  c.status = CaseStatus::Open;
  c.filed_at = db_.now();

  for (const auto& [id, _] : f.factors)
    if (std::find(c.respondent_ids.begin(), c.respondent_ids.end(), id) == c.respondent_ids.end())
      throw Error(ErrorCode::InvalidField, "factors given for a non-respondent " + id, {{"field", "factors"}});
  for (const auto& id : c.respondent_ids) {
    const auto& r = t.residents.at(id);
    FactorInput in;
    if (auto it = f.factors.find(id); it != f.factors.end()) in = it->second;
    OffenderFactorVector v;
    v.factors = in.factors;
    v.age = in.age.value_or(std::max(0, age_on(r.birthdate, c.date_filed)));
    v.gender = in.gender.value_or(r.gender);
    v.residency_status = in.residency_status.value_or(r.residency_status);
    if (v.age < 0 || v.age > 130)
      throw Error(ErrorCode::InvalidField, "age must be within [0, 130]", {{"field", "age"}});
    c.offender_factors[id] = v;
  }
  return c;
}

namespace {

void emit_case(Batch& batch, const BlotterCase& c, Timestamp now) {
  batch.emit("case_filed", {{"case", c}});
  for (const auto& id : c.complainant_ids)
    batch.emit("transaction_appended",
               {{"entry", TransactionEntry{id, TransactionKind::BlotterComplainant, c.case_number, now}}});
  for (const auto& id : c.respondent_ids)
    batch.emit("transaction_appended",
               {{"entry", TransactionEntry{id, TransactionKind::BlotterRespondent, c.case_number, now}}});
}

}  // namespace

std::string Casework::file_blotter(const BlotterFiling& filing) {
  return db_.write([&](const Tables& t, Batch& batch) {
    auto c = build_case(t, filing, fresh_case_number(t, {}));
    emit_case(batch, c, db_.now());
    return c.case_number;
  });
}

void Casework::update_case_status(const std::string& case_number, CaseStatus next, const Officer& officer) {
  db_.write([&](const Tables& t, Batch& batch) {
    auto it = t.cases.find(case_number);
    if (it == t.cases.end())
      throw Error(ErrorCode::NotFound, "no case " + case_number, {{"case_number", case_number}});
    if (!legal_transition(it->second.status, next))
      throw Error(ErrorCode::IllegalTransition,
                  fmt::format("cannot move case from {} to {}", to_string(it->second.status), to_string(next)),
                  {{"from", to_string(it->second.status)}, {"to", to_string(next)}});
    batch.emit("case_status_changed", {{"case_number", case_number},
                                       {"status", to_string(next)},
                                       {"officer", officer.username},
                                       {"at", format_timestamp(db_.now())}});
  });
}

BlotterCase Casework::get_case(const std::string& case_number) const {
  return db_.read([&](const Tables& t) {
    auto it = t.cases.find(case_number);
    if (it == t.cases.end())
      throw Error(ErrorCode::NotFound, "no case " + case_number, {{"case_number", case_number}});
    return it->second;
  });
}

std::vector<BlotterCase> Casework::list_cases(const DateWindow& window) const {
  return db_.read([&](const Tables& t) {
    std::vector<BlotterCase> out;
    for (const auto& n : t.case_order)
      if (window.contains(t.cases.at(n).date_filed)) out.push_back(t.cases.at(n));
    return out;
  });
}

namespace {

std::vector<std::string> open_cases_for(const Tables& t, const std::string& resident_id) {
  std::vector<std::string> out;
  for (const auto& n : t.case_order) {
    const auto& c = t.cases.at(n);
    if (c.status == CaseStatus::Open &&
        std::find(c.respondent_ids.begin(), c.respondent_ids.end(), resident_id) != c.respondent_ids.end())
      out.push_back(n);
  }
  return out;
}

}  // namespace

std::vector<std::string> Casework::blocking_cases(const std::string& resident_id) const {
  return db_.read([&](const Tables& t) { return open_cases_for(t, resident_id); });
}

Certificate Casework::issue_clearance(const std::string& resident_id, CertificateKind kind,
                                      const std::string& purpose, const Officer& officer, bool override_open_cases) {
  return db_.write([&](const Tables& t, Batch& batch) {
    if (!t.residents.count(resident_id))
      throw Error(ErrorCode::NotFound, "no resident " + resident_id, {{"resident_id", resident_id}});
    if (override_open_cases && officer.role != Role::Secretary)
      throw Error(ErrorCode::OverrideForbidden, "only the secretary may override open cases",
                  {{"role", to_string(officer.role)}});
    auto clean_purpose = trim(purpose);
    if (clean_purpose.empty()) throw Error(ErrorCode::InvalidField, "purpose is required", {{"field", "purpose"}});

    Certificate cert;
    cert.certificate_id = sequence_id("CERT-", t.certificates.size() + 1);
    cert.resident_id = resident_id;
    cert.kind = kind;
    cert.purpose = clean_purpose;
    cert.issued_at = db_.now();
    cert.requested_by = officer.username;
    cert.blocking_cases = open_cases_for(t, resident_id);
    if (cert.blocking_cases.empty()) {
      cert.outcome = CertificateOutcome::Issued;
    } else if (override_open_cases) {
      cert.outcome = CertificateOutcome::Issued;
      cert.override_by = officer.username;
    } else {
      cert.outcome = CertificateOutcome::Denied;
      cert.denial_reason = "respondent in open case(s): " + join_ids(cert.blocking_cases, ", ");
    }
    batch.emit("certificate_recorded", {{"certificate", cert}});
    auto kind_tx = cert.outcome == CertificateOutcome::Issued ? TransactionKind::ClearanceIssued
                                                              : TransactionKind::ClearanceDenied;
    batch.emit("transaction_appended",
               {{"entry", TransactionEntry{resident_id, kind_tx, cert.certificate_id, cert.issued_at}}});
    return cert;
  });
}

std::vector<Certificate> Casework::clearance_history(const std::string& resident_id) const {
  return db_.read([&](const Tables& t) {
    if (!t.residents.count(resident_id))
      throw Error(ErrorCode::NotFound, "no resident " + resident_id, {{"resident_id", resident_id}});
    std::vector<Certificate> out;
    if (auto it = t.certificates_by_resident.find(resident_id); it != t.certificates_by_resident.end())
      for (const auto& id : it->second) out.push_back(t.certificates.at(id));
    return out;
  });
}

std::string Casework::render_certificate(const std::string& certificate_id) const {
  return db_.read([&](const Tables& t) {
    auto it = t.certificates.find(certificate_id);
    if (it == t.certificates.end())
      throw Error(ErrorCode::NotFound, "no certificate " + certificate_id, {{"certificate_id", certificate_id}});
    const auto& c = it->second;
    if (c.outcome != CertificateOutcome::Issued)
      throw Error(ErrorCode::NotIssued, "certificate was denied", {{"certificate_id", certificate_id}});
    const auto& r = t.residents.at(c.resident_id);
    auto issued = date_of(c.issued_at);

    std::string doc;
    doc += "Republic of the Philippines\n";
    doc += upper(barangay_name_) + "\n";
    doc += "Office of the Barangay Secretary\n\n";
    doc += c.kind == CertificateKind::Clearance ? "BARANGAY CLEARANCE\n\n" : "BARANGAY CERTIFICATION\n\n";
    doc += fmt::format("Certificate No.: {}\n", c.certificate_id);
    doc += fmt::format("Date Issued: {}\n\n", long_date(issued));
    doc += "TO WHOM IT MAY CONCERN:\n\n";
    doc += fmt::format("This is to certify that {}, {} years of age, is a resident of Zone {}, {}.\n",
                       upper(r.full_name()), std::max(0, age_on(r.birthdate, issued)), r.zone_id, barangay_name_);
    if (c.kind == CertificateKind::Clearance) {
      doc += c.override_by ? fmt::format("This clearance is issued upon the authority of the barangay secretary ({}).\n",
                                         *c.override_by)
                           : std::string("Per records of this office, the above-named person has no pending case.\n");
    }
    doc += fmt::format("\nThis certification is issued for the purpose of: {}\n\n", c.purpose);
    doc += fmt::format("Issued by: {}\n", c.requested_by);
    return doc;
  });
}

std::string Casework::export_csv() const {
  std::string out = csv::format_row(kBlotterCsvHeader);
  for (const auto& c : list_cases()) {
    out += csv::format_row({c.case_number, format_date(c.date_filed), join_ids(c.complainant_ids, ";"),
                            join_ids(c.respondent_ids, ";"), c.offense_type, std::string(to_string(c.status)),
                            fmt::format("{:.7f}", c.location.lat), fmt::format("{:.7f}", c.location.lon),
                            std::to_string(c.zone_id)});
  }
  return out;
}

std::vector<std::string> Casework::import_csv(std::string_view text) {
  auto rows = csv::parse(text);
  if (rows.empty() || rows.front() != kBlotterCsvHeader)
    throw Error(ErrorCode::MalformedCsv, "blotter CSV header mismatch");

  struct Parsed {
    std::string number;
    CaseStatus status;
    BlotterFiling filing;
  };
  std::vector<Parsed> parsed;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& row = rows[i];
    if (row.size() == 1 && row[0].empty()) continue;
    auto fail = [&](const char* field, const std::string& why) {
      throw Error(ErrorCode::InvalidField, fmt::format("row {}: {}: {}", i + 1, field, why),
                  {{"row", i + 1}, {"field", field}});
    };
    if (row.size() != kBlotterCsvHeader.size()) fail("row", "wrong column count");
    Parsed p;
    p.number = row[0];
    if (!is_case_number(p.number)) fail("case_number", "must be 6 digits");
    auto d = parse_date(row[1]);
    if (!d) fail("date_filed", "not an ISO date");
    p.filing.date_filed = *d;
    p.filing.complainant_ids = split_ids(row[2]);
    p.filing.respondent_ids = split_ids(row[3]);
    p.filing.offense_type = row[4];
    auto s = parse_case_status(row[5]);
    if (!s) fail("status", "unknown status");
    p.status = *s;
    try {
      p.filing.location = {std::stod(row[6]), std::stod(row[7])};
      p.filing.zone_id = std::stoi(row[8]);
    } catch (const std::logic_error&) {
      fail("location", "not numeric");
    }
    parsed.push_back(std::move(p));
  }

  return db_.write([&](const Tables& t, Batch& batch) {
    std::set<std::string> taken;
    std::vector<std::string> out;
    for (const auto& p : parsed) {
      if (t.cases.count(p.number) || !taken.insert(p.number).second)
        throw Error(ErrorCode::Conflict, "duplicate case number " + p.number, {{"case_number", p.number}});
      auto c = build_case(t, p.filing, p.number);
      c.status = p.status;
      emit_case(batch, c, db_.now());
      out.push_back(p.number);
    }
    return out;
  });
}

}  // namespace brgy
