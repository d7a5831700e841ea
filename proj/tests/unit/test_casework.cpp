#include <doctest.h>

#include <regex>
#include <set>
#include <thread>

#include "support/testing.hpp"

using namespace brgy;
using namespace brgy::testing;

namespace {

const Officer kSecretary{"sec", Role::Secretary};
const Officer kTreasurer{"tre", Role::Treasurer};

struct Fixture {
  FakeClock clock;
  System sys{memory_config(), zones(), nullptr, clock.clock()};
  std::string complainant = sys.registry.register_resident(person("Basitena", "Nicole", "Genia")).resident_id;
  std::string respondent = sys.registry.register_resident(person("de Asis", "Mark", "Mercado")).resident_id;

  BlotterFiling filing(Date d = ymd(2016, 12, 3)) const {
    BlotterFiling f;
    f.complainant_ids = {complainant};
    f.respondent_ids = {respondent};
    f.offense_type = "Theft";
    f.narrative = "phone taken";
    f.location = zone_centre(2);
    f.date_filed = d;
    return f;
  }
};

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error");
  return ErrorCode::InvalidField;
}

}  // namespace

TEST_CASE("filing a blotter") {
  Fixture fx;
  auto number = fx.sys.casework.file_blotter(fx.filing());
  CHECK(std::regex_match(number, std::regex("[1-9][0-9]{5}")));
  auto c = fx.sys.casework.get_case(number);
  CHECK(c.status == CaseStatus::Open);
  CHECK(c.offense_type == "theft");
  CHECK(c.zone_id == 2);
  CHECK(c.date_filed == ymd(2016, 12, 3));

  auto ch = fx.sys.registry.get_profile(fx.complainant).history;
  auto rh = fx.sys.registry.get_profile(fx.respondent).history;
  REQUIRE(ch.size() == 1);
  REQUIRE(rh.size() == 1);
  CHECK(ch[0].kind == TransactionKind::BlotterComplainant);
  CHECK(rh[0].kind == TransactionKind::BlotterRespondent);
  CHECK(rh[0].reference_id == number);

  auto markers = fx.sys.db.read([](const Tables& t) { return geo::build_markers(t, geo::MarkerKind::Crime, {}); });
  REQUIRE(markers.size() == 1);
  CHECK(markers[0].source_id == number);
}

TEST_CASE("filing errors") {
  Fixture fx;
  auto f = fx.filing();
  SUBCASE("unregistered respondent") {
    f.respondent_ids = {"424242"};
    CHECK(code_of([&] { fx.sys.casework.file_blotter(f); }) == ErrorCode::NotFound);
  }
  SUBCASE("invalid coordinate") {
    f.location = {91, 0};
    CHECK(code_of([&] { fx.sys.casework.file_blotter(f); }) == ErrorCode::InvalidLocation);
  }
  SUBCASE("outside every zone") {
    f.location = {14.7, 121.1};
    CHECK(code_of([&] { fx.sys.casework.file_blotter(f); }) == ErrorCode::InvalidLocation);
  }
  SUBCASE("no respondent") {
    f.respondent_ids.clear();
    CHECK(code_of([&] { fx.sys.casework.file_blotter(f); }) == ErrorCode::InvalidField);
  }
  SUBCASE("age out of range") {
    FactorInput fi;
    fi.age = 131;
    f.factors[fx.respondent] = fi;
    CHECK(code_of([&] { fx.sys.casework.file_blotter(f); }) == ErrorCode::InvalidField);
  }
  CHECK(fx.sys.casework.list_cases().empty());
}

TEST_CASE("factor demographics default from the registry") {
  Fixture fx;
  auto f = fx.filing();
  FactorInput fi;
  fi.factors[0] = Tri::No;
  fi.factors[4] = Tri::Yes;
  f.factors[fx.respondent] = fi;
  auto c = fx.sys.casework.get_case(fx.sys.casework.file_blotter(f));
  auto v = c.offender_factors.at(fx.respondent);
  CHECK(v.factors[0] == Tri::No);
  CHECK(v.factors[4] == Tri::Yes);
  CHECK(v.factors[1] == Tri::Unknown);
  CHECK(v.age == 26);  // born 1990-05-17, filed 2016-12-03
  CHECK(v.residency_status == Residency::NonMigrant);
}

TEST_CASE("1000 filings give 1000 distinct six-digit numbers") {
  Fixture fx;
  std::set<std::string> numbers;
  for (int i = 0; i < 1000; ++i) numbers.insert(fx.sys.casework.file_blotter(fx.filing()));
  CHECK(numbers.size() == 1000);
  for (const auto& n : numbers) CHECK(std::regex_match(n, std::regex("[0-9]{6}")));
  CHECK(fx.sys.registry.get_profile(fx.respondent).history.size() == 1000);
}

TEST_CASE("status transitions") {
  Fixture fx;
  auto n = fx.sys.casework.file_blotter(fx.filing());
  fx.sys.casework.update_case_status(n, CaseStatus::Settled, kSecretary);
  auto c = fx.sys.casework.get_case(n);
  CHECK(c.status == CaseStatus::Settled);
  REQUIRE(c.notes.size() == 1);
  CHECK(c.notes[0].from == CaseStatus::Open);
  CHECK(c.notes[0].officer == "sec");
  CHECK(code_of([&] { fx.sys.casework.update_case_status(n, CaseStatus::Open, kSecretary); }) ==
        ErrorCode::IllegalTransition);
  CHECK(code_of([&] { fx.sys.casework.update_case_status("000000", CaseStatus::Settled, kSecretary); }) ==
        ErrorCode::NotFound);

  for (auto from : {CaseStatus::Open, CaseStatus::Settled, CaseStatus::Referred, CaseStatus::Dismissed})
    for (auto to : {CaseStatus::Open, CaseStatus::Settled, CaseStatus::Referred, CaseStatus::Dismissed})
      CHECK(legal_transition(from, to) == (from == CaseStatus::Open && to != CaseStatus::Open));
}

namespace {

const char* kDeAsisCases =
    "case_number,date_filed,complainant_ids,respondent_ids,offense_type,status,lat,lon,zone_id\r\n"
    "649396,2016-12-04,000001,000002,theft,open,14.581,121.003,2\r\n"
    "549704,2016-12-04,000001,000002,assault,open,14.581,121.003,2\r\n"
    "214662,2016-12-04,000001,000002,vandalism,open,14.581,121.003,2\r\n";

}  // namespace

TEST_CASE("clearance gate on the de Asis cases") {
  Fixture fx;
  auto& cw = fx.sys.casework;
  auto imported = cw.import_csv(kDeAsisCases);
  CHECK(imported == std::vector<std::string>{"649396", "549704", "214662"});
  CHECK(fx.sys.registry.get_profile(fx.respondent).history.size() >= 3);

  auto denied = cw.issue_clearance(fx.respondent, CertificateKind::Clearance, "employment", kTreasurer, false);
  CHECK(denied.outcome == CertificateOutcome::Denied);
  REQUIRE(denied.denial_reason);
  for (auto n : {"649396", "549704", "214662"}) CHECK(denied.denial_reason->find(n) != std::string::npos);
  CHECK(denied.blocking_cases == std::vector<std::string>{"649396", "549704", "214662"});
  CHECK(code_of([&] { cw.render_certificate(denied.certificate_id); }) == ErrorCode::NotIssued);

  CHECK(code_of([&] { cw.issue_clearance(fx.respondent, CertificateKind::Clearance, "x", kTreasurer, true); }) ==
        ErrorCode::OverrideForbidden);

  auto over = cw.issue_clearance(fx.respondent, CertificateKind::Clearance, "employment", kSecretary, true);
  CHECK(over.outcome == CertificateOutcome::Issued);
  CHECK(over.override_by == "sec");
  CHECK_FALSE(over.denial_reason);

  // Complainants are never blocked.
  auto ok = cw.issue_clearance(fx.complainant, CertificateKind::Clearance, "travel", kTreasurer, false);
  CHECK(ok.outcome == CertificateOutcome::Issued);
  CHECK_FALSE(ok.override_by);

  // Closing every case lifts the gate.
  for (auto n : imported) cw.update_case_status(n, CaseStatus::Dismissed, kSecretary);
  auto later = cw.issue_clearance(fx.respondent, CertificateKind::Clearance, "loan", kTreasurer, false);
  CHECK(later.outcome == CertificateOutcome::Issued);

  auto history = cw.clearance_history(fx.respondent);
  REQUIRE(history.size() == 3);
  CHECK(history[0].outcome == CertificateOutcome::Denied);
  CHECK(history[2].purpose == "loan");
  auto kinds = fx.sys.registry.get_profile(fx.respondent).history;
  CHECK(std::count_if(kinds.begin(), kinds.end(),
                      [](const auto& e) { return e.kind == TransactionKind::ClearanceDenied; }) == 1);
}

TEST_CASE("clearance history") {
  Fixture fx;
  auto& cw = fx.sys.casework;
  CHECK(cw.clearance_history(fx.complainant).empty());
  for (auto p : {"employment", "travel", "scholarship"})
    cw.issue_clearance(fx.complainant, CertificateKind::Certification, p, kTreasurer, false);
  auto h = cw.clearance_history(fx.complainant);
  REQUIRE(h.size() == 3);
  CHECK(h[1].purpose == "travel");
  CHECK(h[2].kind == CertificateKind::Certification);
  CHECK(code_of([&] { cw.clearance_history("999999"); }) == ErrorCode::NotFound);
  CHECK(code_of([&] { cw.issue_clearance("999999", CertificateKind::Clearance, "x", kTreasurer, false); }) ==
        ErrorCode::NotFound);
}

TEST_CASE("rendering is deterministic and complete") {
  Fixture fx;
  auto cert = fx.sys.casework.issue_clearance(fx.complainant, CertificateKind::Clearance, "Employment abroad",
                                              kTreasurer, false);
  auto a = fx.sys.casework.render_certificate(cert.certificate_id);
  auto b = fx.sys.casework.render_certificate(cert.certificate_id);
  CHECK(a == b);
  for (auto needle : {"SAN ISIDRO", "NICOLE GENIA BASITENA", "Employment abroad", cert.certificate_id.c_str(), "2016"})
    CHECK_MESSAGE(a.find(needle) != std::string::npos, needle);
  CHECK(code_of([&] { fx.sys.casework.render_certificate("CERT-999999"); }) == ErrorCode::NotFound);
}

TEST_CASE("gate holds under concurrent filing and issuing") {
  Fixture fx;
  auto& cw = fx.sys.casework;
  std::thread filer([&] {
    for (int i = 0; i < 30; ++i) cw.file_blotter(fx.filing());
  });
  std::vector<Certificate> certs;
  for (int i = 0; i < 30; ++i)
    certs.push_back(cw.issue_clearance(fx.respondent, CertificateKind::Clearance, "x", kTreasurer, false));
  filer.join();
  // Replay: each decision must match the open cases that existed just before it.
  fx.sys.db.read([&](const Tables& t) {
    for (const auto& c : certs) {
      bool blocked = !c.blocking_cases.empty();
      CHECK((c.outcome == CertificateOutcome::Denied) == blocked);
      for (const auto& n : c.blocking_cases) CHECK(t.cases.count(n));
    }
    return 0;
  });
}

TEST_CASE("blotter CSV round trip") {
  Fixture fx;
  fx.sys.casework.file_blotter(fx.filing());
  auto n = fx.sys.casework.file_blotter(fx.filing(ymd(2016, 12, 4)));
  fx.sys.casework.update_case_status(n, CaseStatus::Referred, kSecretary);
  auto text = fx.sys.casework.export_csv();

  Fixture other;
  auto imported = other.sys.casework.import_csv(text);
  CHECK(imported.size() == 2);
  CHECK(other.sys.casework.get_case(n).status == CaseStatus::Referred);
  CHECK(other.sys.casework.export_csv() == text);
  CHECK(code_of([&] { other.sys.casework.import_csv(text); }) == ErrorCode::Conflict);
}
