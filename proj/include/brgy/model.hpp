#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "brgy/common.hpp"

namespace brgy {

// ---------------------------------------------------------------------------
// Registry

struct Resident {
  std::string resident_id;
  std::string last_name;
  std::string first_name;
  std::string middle_name;
  Date birthdate{};
  Gender gender = Gender::Male;
  std::string occupation;
  Residency residency_status = Residency::NonMigrant;
  int zone_id = 0;
  std::string address;
  std::optional<std::string> mobile_number;
  Timestamp registered_at{};

  std::string full_name() const;
  friend bool operator==(const Resident&, const Resident&) = default;
};

enum class TransactionKind {
  ClearanceIssued,
  ClearanceDenied,
  BlotterComplainant,
  BlotterRespondent,
  HealthCase,
  SmsSent,
};

std::string_view to_string(TransactionKind k);
std::optional<TransactionKind> parse_transaction_kind(std::string_view s);

struct TransactionEntry {
  std::string resident_id;
  TransactionKind kind = TransactionKind::ClearanceIssued;
  std::string reference_id;
  Timestamp occurred_at{};

  friend bool operator==(const TransactionEntry&, const TransactionEntry&) = default;
};

// ---------------------------------------------------------------------------
// Casework

/// Yes/no/unknown risk factors recorded per respondent, plus demographics.
struct OffenderFactorVector {
  static constexpr std::array<std::string_view, 10> kFactorNames{
      "employment",     "alcohol_problems",       "family_problems",    "status",
      "drug_problems",  "gambling",               "drug_addiction",     "mental_health_problems",
      "financial_problems", "school_problem"};

  std::array<Tri, 10> factors{Tri::Unknown, Tri::Unknown, Tri::Unknown, Tri::Unknown, Tri::Unknown,
                              Tri::Unknown, Tri::Unknown, Tri::Unknown, Tri::Unknown, Tri::Unknown};
  int age = 0;
  Gender gender = Gender::Male;
  Residency residency_status = Residency::NonMigrant;

  friend bool operator==(const OffenderFactorVector&, const OffenderFactorVector&) = default;
};

enum class CaseStatus { Open, Settled, Referred, Dismissed };
std::string_view to_string(CaseStatus s);
std::optional<CaseStatus> parse_case_status(std::string_view s);

struct CaseNote {
  Timestamp at{};
  std::string officer;
  CaseStatus from = CaseStatus::Open;
  CaseStatus to = CaseStatus::Open;

  friend bool operator==(const CaseNote&, const CaseNote&) = default;
};

struct BlotterCase {
  std::string case_number;
  Date date_filed{};
  std::vector<std::string> complainant_ids;
  std::vector<std::string> respondent_ids;
  std::string offense_type;
  std::string narrative;
  GeoPoint location;
  int zone_id = 0;
  CaseStatus status = CaseStatus::Open;
  std::map<std::string, OffenderFactorVector> offender_factors;
  std::vector<CaseNote> notes;
  Timestamp filed_at{};

  friend bool operator==(const BlotterCase&, const BlotterCase&) = default;
};

enum class CertificateKind { Clearance, Certification };
enum class CertificateOutcome { Issued, Denied };
std::string_view to_string(CertificateKind k);
std::string_view to_string(CertificateOutcome o);
std::optional<CertificateKind> parse_certificate_kind(std::string_view s);

struct Certificate {
  std::string certificate_id;
  std::string resident_id;
  CertificateKind kind = CertificateKind::Clearance;
  std::string purpose;
  Timestamp issued_at{};
  CertificateOutcome outcome = CertificateOutcome::Issued;
  std::optional<std::string> denial_reason;
  std::optional<std::string> override_by;
  std::string requested_by;
  /// Open cases naming the resident as respondent at decision time.
  std::vector<std::string> blocking_cases;

  friend bool operator==(const Certificate&, const Certificate&) = default;
};

// ---------------------------------------------------------------------------
// Health

struct ChildRecord {
  std::string child_id;
  std::string last_name;
  std::string first_name;
  std::string middle_name;
  Date birthdate{};
  Gender gender = Gender::Male;
  std::optional<std::string> guardian_resident_id;
  Timestamp recorded_at{};

  friend bool operator==(const ChildRecord&, const ChildRecord&) = default;
};

struct HealthSubject {
  enum class Kind { Resident, Child };
  Kind kind = Kind::Resident;
  std::string id;

  friend bool operator==(const HealthSubject&, const HealthSubject&) = default;
};

struct HealthCase {
  std::string health_case_id;
  HealthSubject subject;
  std::string condition;
  std::string notes;
  GeoPoint location;
  int zone_id = 0;
  Timestamp recorded_at{};
  std::string recorded_by;

  friend bool operator==(const HealthCase&, const HealthCase&) = default;
};

// ---------------------------------------------------------------------------
// Notify

enum class RecipientStatus { Pending, Sent, Failed };
std::string_view to_string(RecipientStatus s);

struct Recipient {
  std::string resident_id;
  std::string phone;
  RecipientStatus status = RecipientStatus::Pending;
  int attempts = 0;
  std::string idempotency_key;
  std::optional<std::string> provider_ref;
  std::optional<std::string> last_error;

  friend bool operator==(const Recipient&, const Recipient&) = default;
};

struct AudienceFilter {
  enum class Kind { All, Zone, Residents };
  Kind kind = Kind::All;
  int zone_id = 0;
  std::vector<std::string> resident_ids;

  friend bool operator==(const AudienceFilter&, const AudienceFilter&) = default;
};

struct BroadcastJob {
  std::string job_id;
  std::string message;
  AudienceFilter filter;
  std::string created_by;
  Timestamp created_at{};
  std::vector<Recipient> recipients;

  bool finished() const;
  friend bool operator==(const BroadcastJob&, const BroadcastJob&) = default;
};

// ---------------------------------------------------------------------------
// Open data / service

struct Advisory {
  std::string advisory_id;
  std::string title;
  std::string body;
  Timestamp published_at{};
  std::string published_by;

  friend bool operator==(const Advisory&, const Advisory&) = default;
};

struct UserAccount {
  std::string username;
  std::string password_hash;
  Role role = Role::ResidentPublic;
  std::optional<std::string> linked_resident_id;
};

// JSON mappings (wire and journal share them).
void to_json(json& j, const Resident& r);
void from_json(const json& j, Resident& r);
void to_json(json& j, const TransactionEntry& e);
void from_json(const json& j, TransactionEntry& e);
void to_json(json& j, const OffenderFactorVector& f);
void from_json(const json& j, OffenderFactorVector& f);
void to_json(json& j, const BlotterCase& c);
void from_json(const json& j, BlotterCase& c);
void to_json(json& j, const Certificate& c);
void from_json(const json& j, Certificate& c);
void to_json(json& j, const ChildRecord& c);
void from_json(const json& j, ChildRecord& c);
void to_json(json& j, const HealthCase& c);
void from_json(const json& j, HealthCase& c);
void to_json(json& j, const AudienceFilter& f);
void from_json(const json& j, AudienceFilter& f);
void to_json(json& j, const Recipient& r);
void from_json(const json& j, Recipient& r);
void to_json(json& j, const BroadcastJob& b);
void from_json(const json& j, BroadcastJob& b);
void to_json(json& j, const Advisory& a);
void from_json(const json& j, Advisory& a);
void to_json(json& j, const UserAccount& a);
void from_json(const json& j, UserAccount& a);
void to_json(json& j, const GeoPoint& p);
void from_json(const json& j, GeoPoint& p);

}  // namespace brgy
