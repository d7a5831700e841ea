#include "brgy/model.hpp"

#include <algorithm>

namespace brgy {

namespace {

template <class T, class Parse>
T parse_or_throw(const json& j, const char* field, Parse parse) {
  auto v = parse(j.at(field).get<std::string>());
  if (!v) throw Error(ErrorCode::InvalidField, std::string("bad value for ") + field, {{"field", field}});
  return *v;
}

Date date_field(const json& j, const char* field) {
  return parse_or_throw<Date>(j, field, [](const std::string& s) { return parse_date(s); });
}

Timestamp ts_field(const json& j, const char* field) {
  return parse_or_throw<Timestamp>(j, field, [](const std::string& s) { return parse_timestamp(s); });
}

template <class T>
void opt_to(json& j, const char* key, const std::optional<T>& v) {
  j[key] = v ? json(*v) : json(nullptr);
}

template <class T>
std::optional<T> opt_from(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

}  // namespace

std::string Resident::full_name() const {
  std::string out = first_name;
  if (!middle_name.empty()) out += " " + middle_name;
  out += " " + last_name;
  return out;
}

std::string_view to_string(TransactionKind k) {
  switch (k) {
    case TransactionKind::ClearanceIssued: return "clearance_issued";
    case TransactionKind::ClearanceDenied: return "clearance_denied";
    case TransactionKind::BlotterComplainant: return "blotter_complainant";
    case TransactionKind::BlotterRespondent: return "blotter_respondent";
    case TransactionKind::HealthCase: return "health_case";
    case TransactionKind::SmsSent: return "sms_sent";
  }
  return "";
}

std::optional<TransactionKind> parse_transaction_kind(std::string_view s) {
  for (auto k : {TransactionKind::ClearanceIssued, TransactionKind::ClearanceDenied,
                 TransactionKind::BlotterComplainant, TransactionKind::BlotterRespondent,
                 TransactionKind::HealthCase, TransactionKind::SmsSent})
    if (to_string(k) == s) return k;
  return std::nullopt;
}

std::string_view to_string(CaseStatus s) {
  switch (s) {
    case CaseStatus::Open: return "open";
    case CaseStatus::Settled: return "settled";
    case CaseStatus::Referred: return "referred";
    case CaseStatus::Dismissed: return "dismissed";
  }
  return "";
}

std::optional<CaseStatus> parse_case_status(std::string_view s) {
  for (auto v : {CaseStatus::Open, CaseStatus::Settled, CaseStatus::Referred, CaseStatus::Dismissed})
    if (to_string(v) == s) return v;
  return std::nullopt;
}

std::string_view to_string(CertificateKind k) {
  return k == CertificateKind::Clearance ? "clearance" : "certification";
}

std::string_view to_string(CertificateOutcome o) {
  return o == CertificateOutcome::Issued ? "issued" : "denied";
}

std::optional<CertificateKind> parse_certificate_kind(std::string_view s) {
  if (s == "clearance") return CertificateKind::Clearance;
  if (s == "certification") return CertificateKind::Certification;
  return std::nullopt;
}

std::string_view to_string(RecipientStatus s) {
  switch (s) {
    case RecipientStatus::Pending: return "pending";
    case RecipientStatus::Sent: return "sent";
    case RecipientStatus::Failed: return "failed";
  }
  return "";
}

bool BroadcastJob::finished() const {
  return std::none_of(recipients.begin(), recipients.end(),
                      [](const Recipient& r) { return r.status == RecipientStatus::Pending; });
}

void to_json(json& j, const GeoPoint& p) { j = json{{"lat", p.lat}, {"lon", p.lon}}; }

void from_json(const json& j, GeoPoint& p) {
  p.lat = j.at("lat").get<double>();
  p.lon = j.at("lon").get<double>();
}

void to_json(json& j, const Resident& r) {
  j = json{{"resident_id", r.resident_id},
           {"last_name", r.last_name},
           {"first_name", r.first_name},
           {"middle_name", r.middle_name},
           {"birthdate", format_date(r.birthdate)},
           {"gender", to_string(r.gender)},
           {"occupation", r.occupation},
           {"residency_status", to_string(r.residency_status)},
           {"zone_id", r.zone_id},
           {"address", r.address},
           {"registered_at", format_timestamp(r.registered_at)}};
  opt_to(j, "mobile_number", r.mobile_number);
}

void from_json(const json& j, Resident& r) {
  r.resident_id = j.value("resident_id", "");
  r.last_name = j.at("last_name").get<std::string>();
  r.first_name = j.at("first_name").get<std::string>();
  r.middle_name = j.value("middle_name", "");
  r.birthdate = date_field(j, "birthdate");
  r.gender = parse_or_throw<Gender>(j, "gender", [](const std::string& s) { return parse_gender(s); });
  r.occupation = j.value("occupation", "");
  r.residency_status = parse_or_throw<Residency>(j, "residency_status",
                                                 [](const std::string& s) { return parse_residency(s); });
  r.zone_id = j.at("zone_id").get<int>();
  r.address = j.value("address", "");
  r.mobile_number = opt_from<std::string>(j, "mobile_number");
  if (j.contains("registered_at")) r.registered_at = ts_field(j, "registered_at");
}

void to_json(json& j, const TransactionEntry& e) {
  j = json{{"resident_id", e.resident_id},
           {"kind", to_string(e.kind)},
           {"reference_id", e.reference_id},
           {"occurred_at", format_timestamp(e.occurred_at)}};
}

void from_json(const json& j, TransactionEntry& e) {
  e.resident_id = j.at("resident_id").get<std::string>();
  e.kind = parse_or_throw<TransactionKind>(j, "kind",
                                           [](const std::string& s) { return parse_transaction_kind(s); });
  e.reference_id = j.at("reference_id").get<std::string>();
  e.occurred_at = ts_field(j, "occurred_at");
}

void to_json(json& j, const OffenderFactorVector& f) {
  j = json::object();
  for (size_t i = 0; i < f.factors.size(); ++i)
    j[std::string(OffenderFactorVector::kFactorNames[i])] = to_string(f.factors[i]);
  j["age"] = f.age;
  j["gender"] = to_string(f.gender);
  j["residency_status"] = to_string(f.residency_status);
}

void from_json(const json& j, OffenderFactorVector& f) {
  for (size_t i = 0; i < f.factors.size(); ++i) {
    std::string key(OffenderFactorVector::kFactorNames[i]);
    if (!j.contains(key)) {
      f.factors[i] = Tri::Unknown;
      continue;
    }
    f.factors[i] = parse_or_throw<Tri>(j, key.c_str(), [](const std::string& s) { return parse_tri(s); });
  }
  f.age = j.at("age").get<int>();
  f.gender = parse_or_throw<Gender>(j, "gender", [](const std::string& s) { return parse_gender(s); });
  f.residency_status = parse_or_throw<Residency>(j, "residency_status",
                                                 [](const std::string& s) { return parse_residency(s); });
}

void to_json(json& j, const BlotterCase& c) {
  json notes = json::array();
  for (const auto& n : c.notes)
    notes.push_back({{"at", format_timestamp(n.at)},
                     {"officer", n.officer},
                     {"from", to_string(n.from)},
                     {"to", to_string(n.to)}});
  j = json{{"case_number", c.case_number},
           {"date_filed", format_date(c.date_filed)},
           {"complainant_ids", c.complainant_ids},
           {"respondent_ids", c.respondent_ids},
           {"offense_type", c.offense_type},
           {"narrative", c.narrative},
           {"location", c.location},
           {"zone_id", c.zone_id},
           {"status", to_string(c.status)},
           {"offender_factors", c.offender_factors},
           {"notes", notes},
           {"filed_at", format_timestamp(c.filed_at)}};
}

void from_json(const json& j, BlotterCase& c) {
  c.case_number = j.at("case_number").get<std::string>();
  c.date_filed = date_field(j, "date_filed");
  c.complainant_ids = j.at("complainant_ids").get<std::vector<std::string>>();
  c.respondent_ids = j.at("respondent_ids").get<std::vector<std::string>>();
  c.offense_type = j.at("offense_type").get<std::string>();
  c.narrative = j.value("narrative", "");
  c.location = j.at("location").get<GeoPoint>();
  c.zone_id = j.at("zone_id").get<int>();
  c.status = parse_or_throw<CaseStatus>(j, "status", [](const std::string& s) { return parse_case_status(s); });
  c.offender_factors = j.value("offender_factors", std::map<std::string, OffenderFactorVector>{});
  c.notes.clear();
  for (const auto& n : j.value("notes", json::array())) {
    CaseNote note;
    note.at = ts_field(n, "at");
    note.officer = n.at("officer").get<std::string>();
    note.from = *parse_case_status(n.at("from").get<std::string>());
    note.to = *parse_case_status(n.at("to").get<std::string>());
    c.notes.push_back(note);
  }
  c.filed_at = ts_field(j, "filed_at");
}

void to_json(json& j, const Certificate& c) {
  j = json{{"certificate_id", c.certificate_id},
           {"resident_id", c.resident_id},
           {"kind", to_string(c.kind)},
           {"purpose", c.purpose},
           {"issued_at", format_timestamp(c.issued_at)},
           {"outcome", to_string(c.outcome)},
           {"requested_by", c.requested_by},
           {"blocking_cases", c.blocking_cases}};
  opt_to(j, "denial_reason", c.denial_reason);
  opt_to(j, "override_by", c.override_by);
}

void from_json(const json& j, Certificate& c) {
  c.certificate_id = j.at("certificate_id").get<std::string>();
  c.resident_id = j.at("resident_id").get<std::string>();
  c.kind = parse_or_throw<CertificateKind>(j, "kind",
                                           [](const std::string& s) { return parse_certificate_kind(s); });
  c.purpose = j.at("purpose").get<std::string>();
  c.issued_at = ts_field(j, "issued_at");
  c.outcome = j.at("outcome").get<std::string>() == "issued" ? CertificateOutcome::Issued
                                                              : CertificateOutcome::Denied;
  c.requested_by = j.value("requested_by", "");
  c.blocking_cases = j.value("blocking_cases", std::vector<std::string>{});
  c.denial_reason = opt_from<std::string>(j, "denial_reason");
  c.override_by = opt_from<std::string>(j, "override_by");
}

void to_json(json& j, const ChildRecord& c) {
  j = json{{"child_id", c.child_id},
           {"last_name", c.last_name},
           {"first_name", c.first_name},
           {"middle_name", c.middle_name},
           {"birthdate", format_date(c.birthdate)},
           {"gender", to_string(c.gender)},
           {"recorded_at", format_timestamp(c.recorded_at)}};
  opt_to(j, "guardian_resident_id", c.guardian_resident_id);
}

void from_json(const json& j, ChildRecord& c) {
  c.child_id = j.value("child_id", "");
  c.last_name = j.at("last_name").get<std::string>();
  c.first_name = j.value("first_name", "");
  c.middle_name = j.value("middle_name", "");
  c.birthdate = date_field(j, "birthdate");
  c.gender = parse_or_throw<Gender>(j, "gender", [](const std::string& s) { return parse_gender(s); });
  c.guardian_resident_id = opt_from<std::string>(j, "guardian_resident_id");
  if (j.contains("recorded_at")) c.recorded_at = ts_field(j, "recorded_at");
}

void to_json(json& j, const HealthCase& c) {
  j = json{{"health_case_id", c.health_case_id},
           {"subject",
            {{"kind", c.subject.kind == HealthSubject::Kind::Resident ? "resident" : "child"},
             {"id", c.subject.id}}},
           {"condition", c.condition},
           {"notes", c.notes},
           {"location", c.location},
           {"zone_id", c.zone_id},
           {"recorded_at", format_timestamp(c.recorded_at)},
           {"recorded_by", c.recorded_by}};
}

void from_json(const json& j, HealthCase& c) {
  c.health_case_id = j.at("health_case_id").get<std::string>();
  const auto& s = j.at("subject");
  c.subject.kind = s.at("kind").get<std::string>() == "child" ? HealthSubject::Kind::Child
                                                              : HealthSubject::Kind::Resident;
  c.subject.id = s.at("id").get<std::string>();
  c.condition = j.at("condition").get<std::string>();
  c.notes = j.value("notes", "");
  c.location = j.at("location").get<GeoPoint>();
  c.zone_id = j.at("zone_id").get<int>();
  c.recorded_at = ts_field(j, "recorded_at");
  c.recorded_by = j.value("recorded_by", "");
}

void to_json(json& j, const AudienceFilter& f) {
  switch (f.kind) {
    case AudienceFilter::Kind::All: j = json{{"kind", "all"}}; break;
    case AudienceFilter::Kind::Zone: j = json{{"kind", "zone"}, {"zone_id", f.zone_id}}; break;
    case AudienceFilter::Kind::Residents:
      j = json{{"kind", "residents"}, {"resident_ids", f.resident_ids}};
      break;
  }
}

void from_json(const json& j, AudienceFilter& f) {
  auto kind = j.at("kind").get<std::string>();
  if (kind == "all") {
    f.kind = AudienceFilter::Kind::All;
  } else if (kind == "zone") {
    f.kind = AudienceFilter::Kind::Zone;
    f.zone_id = j.at("zone_id").get<int>();
  } else if (kind == "residents") {
    f.kind = AudienceFilter::Kind::Residents;
    f.resident_ids = j.at("resident_ids").get<std::vector<std::string>>();
  } else {
    throw Error(ErrorCode::InvalidField, "unknown audience kind", {{"field", "audience"}});
  }
}

void to_json(json& j, const Recipient& r) {
  j = json{{"resident_id", r.resident_id},
           {"phone", r.phone},
           {"status", to_string(r.status)},
           {"attempts", r.attempts},
           {"idempotency_key", r.idempotency_key}};
  opt_to(j, "provider_ref", r.provider_ref);
  opt_to(j, "last_error", r.last_error);
}

void from_json(const json& j, Recipient& r) {
  r.resident_id = j.at("resident_id").get<std::string>();
  r.phone = j.at("phone").get<std::string>();
  auto s = j.at("status").get<std::string>();
  r.status = s == "sent" ? RecipientStatus::Sent
             : s == "failed" ? RecipientStatus::Failed
                             : RecipientStatus::Pending;
  r.attempts = j.at("attempts").get<int>();
  r.idempotency_key = j.at("idempotency_key").get<std::string>();
  r.provider_ref = opt_from<std::string>(j, "provider_ref");
  r.last_error = opt_from<std::string>(j, "last_error");
}

void to_json(json& j, const BroadcastJob& b) {
  j = json{{"job_id", b.job_id},
           {"message", b.message},
           {"audience", b.filter},
           {"created_by", b.created_by},
           {"created_at", format_timestamp(b.created_at)},
           {"recipients", b.recipients}};
}

void from_json(const json& j, BroadcastJob& b) {
  b.job_id = j.at("job_id").get<std::string>();
  b.message = j.at("message").get<std::string>();
  b.filter = j.at("audience").get<AudienceFilter>();
  b.created_by = j.value("created_by", "");
  b.created_at = ts_field(j, "created_at");
  b.recipients = j.at("recipients").get<std::vector<Recipient>>();
}

void to_json(json& j, const Advisory& a) {
  j = json{{"advisory_id", a.advisory_id},
           {"title", a.title},
           {"body", a.body},
           {"published_at", format_timestamp(a.published_at)},
           {"published_by", a.published_by}};
}

void from_json(const json& j, Advisory& a) {
  a.advisory_id = j.at("advisory_id").get<std::string>();
  a.title = j.at("title").get<std::string>();
  a.body = j.at("body").get<std::string>();
  a.published_at = ts_field(j, "published_at");
  a.published_by = j.value("published_by", "");
}

void to_json(json& j, const UserAccount& a) {
  j = json{{"username", a.username}, {"password_hash", a.password_hash}, {"role", to_string(a.role)}};
  opt_to(j, "linked_resident_id", a.linked_resident_id);
}

void from_json(const json& j, UserAccount& a) {
  a.username = j.at("username").get<std::string>();
  a.password_hash = j.at("password_hash").get<std::string>();
  a.role = parse_or_throw<Role>(j, "role", [](const std::string& s) { return parse_role(s); });
  a.linked_resident_id = opt_from<std::string>(j, "linked_resident_id");
}

}  // namespace brgy
