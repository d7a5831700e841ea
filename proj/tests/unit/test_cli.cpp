#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <fstream>

#include "brgy/csv.hpp"
#include "support/testing.hpp"

#ifndef BRGY_CLI
#error "BRGY_CLI must name the brgy binary"
#endif

using namespace brgy;
using namespace brgy::testing;

namespace {

struct Run {
  int status = -1;
  std::string out;
};

/// Runs the binary with stderr folded into stdout.
Run cli(const std::string& args) {
  std::string cmd = fmt::format("'{}' {} 2>&1", BRGY_CLI, args);
  Run r;
  FILE* p = ::popen(cmd.c_str(), "r");
  REQUIRE(p);
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  int st = ::pclose(p);
  r.status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

void write(const std::filesystem::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
}

struct Workspace {
  TempDir dir;
  std::string base() const {
    return fmt::format("--data-dir '{}' --zones '{}'", (dir.path / "data").string(), fixture("zones.json").string());
  }
  std::string path(const char* name) const { return (dir.path / name).string(); }
};

}  // namespace

TEST_CASE("usage errors") {
  CHECK(cli("").status != 0);
  CHECK(cli("frobnicate").status != 0);
  CHECK(cli("export").status != 0);  // --dataset is required
  auto h = cli("--help");
  CHECK(h.status == 0);
  for (auto sub : {"serve", "import", "export", "train", "evaluate", "predict", "adduser"})
    CHECK_MESSAGE(h.out.find(sub) != std::string::npos, sub);
}

TEST_CASE("import, export and restart") {
  Workspace ws;
  std::string text = csv::format_row(kResidentCsvHeader);
  text += csv::format_row({"", "Castillo", "Mariel", "de los Reyes", "1994-02-11", "female", "teacher", "non_migrant",
                          "4", "7 Luna St", "+639175550001", ""});
  text += csv::format_row({"", "Castillo", "Adrian", "de los Reyes", "1991-08-30", "male", "driver", "migrant", "4",
                          "7 Luna St", "", ""});
  write(ws.path("residents.csv"), text);

  auto r = cli(ws.base() + " import --residents " + ws.path("residents.csv"));
  REQUIRE_MESSAGE(r.status == 0, r.out);
  auto report = json::parse(r.out);
  CHECK(report["residents"]["imported"] == 2);
  CHECK(report["residents"]["ids"] == json{"000001", "000002"});

  // A second process sees what the first one stored.
  auto e = cli(ws.base() + " export --dataset barangay_profile -o " + ws.path("profile.csv"));
  REQUIRE_MESSAGE(e.status == 0, e.out);
  auto rows = csv::parse(read_file(ws.path("profile.csv")));
  REQUIRE(rows.size() == 8);
  CHECK(rows[0][0] == "zone_id");
  CHECK(rows[4] == csv::Row{"4", "<3", "<3", "<3", "<3"});

  auto bad = cli(ws.base() + " export --dataset residents");
  CHECK(bad.status == 1);
  CHECK(bad.out.find("error: NOT_FOUND") != std::string::npos);
  CHECK(cli(ws.base() + " export --dataset crime_status --from 2016-13-01").status == 1);

  write(ws.path("broken.csv"), "last_name\r\nx\r\n");
  auto broken = cli(ws.base() + " import --residents " + ws.path("broken.csv"));
  CHECK(broken.status == 1);
  CHECK(broken.out.find("MALFORMED_CSV") != std::string::npos);
  CHECK(cli(ws.base() + " import").status == 1);
}

TEST_CASE("evaluate, then predict with the saved model") {
  Workspace ws;
  auto d1 = fixture("d1.csv").string();
  for (auto learner : {"nb", "tree"}) {
    auto model = ws.path(learner);
    auto r = cli(fmt::format("evaluate --csv '{}' --learner {} -k 3 --seed 42 --model-out '{}'", d1, learner, model));
    REQUIRE_MESSAGE(r.status == 0, r.out);
    auto rep = json::parse(r.out);
    CHECK(rep["k"] == 3);
    CHECK(rep["mean_accuracy"].get<double>() >= 0.0);
    CHECK(rep["mean_accuracy"].get<double>() <= 1.0);

    auto p = cli(fmt::format("predict --model '{}' drug_problems=yes employment=no", model));
    REQUIRE_MESSAGE(p.status == 0, p.out);
    auto out = json::parse(p.out);
    CHECK(out["label"] == "yes");
  }
  auto nb = json::parse(cli(fmt::format("predict --model '{}' drug_problems=yes", ws.path("nb"))).out);
  CHECK(nb["posterior"]["yes"].get<double>() + nb["posterior"]["no"].get<double>() == doctest::Approx(1.0));
  auto unknown = cli(fmt::format("predict --model '{}' drug_problems=maybe", ws.path("nb")));
  CHECK(unknown.status == 1);
  CHECK(unknown.out.find("SCHEMA_MISMATCH") != std::string::npos);
  CHECK(cli(fmt::format("predict --model '{}' drug_problems", ws.path("nb"))).status == 1);
  CHECK(cli(fmt::format("evaluate --csv '{}' --learner svm", d1)).status == 1);
  CHECK(cli(fmt::format("evaluate --csv '{}' -k 13", d1)).out.find("TOO_FEW_RECORDS") != std::string::npos);
}

TEST_CASE("train on stored cases") {
  Workspace ws;
  auto empty = cli(ws.base() + " train --task reoffend");
  CHECK(empty.status == 1);
  CHECK(empty.out.find("EMPTY_DATASET") != std::string::npos);
  CHECK(cli(ws.base() + " train --task nonsense").status == 1);

  {
    FakeClock clock;
    System sys(durable_config(ws.dir.path / "data"), zones(), nullptr, clock.clock());
    WorldShape shape;
    shape.cases = 40;
    populate(sys, 11, shape);
  }
  auto r = cli(ws.base() + " train --task offend_by_residency --learner tree -k 5 --model-out " + ws.path("m.json"));
  REQUIRE_MESSAGE(r.status == 0, r.out);
  CHECK(json::parse(r.out)["k"] == 5);
  auto model = json::parse(read_file(ws.path("m.json")));
  CHECK(model["type"] == "decision_tree");
  auto p = cli(fmt::format("predict --model '{}' gender=male,age_band=26-40", ws.path("m.json")));
  CHECK_MESSAGE(p.status == 0, p.out);
}

TEST_CASE("adduser") {
  Workspace ws;
  auto ok = cli(ws.base() + " adduser --username maria --password longenough --role treasurer");
  REQUIRE_MESSAGE(ok.status == 0, ok.out);
  auto again = cli(ws.base() + " adduser --username maria --password longenough --role treasurer");
  CHECK(again.status == 1);
  CHECK(again.out.find("CONFLICT") != std::string::npos);
  CHECK(cli(ws.base() + " adduser --username pedro --password longenough --role mayor").status == 1);
  CHECK(cli(ws.base() + " adduser --username pedro --password short --role lgu").status == 1);

  System sys(durable_config(ws.dir.path / "data"), zones());
  CHECK(sys.accounts.authenticate("maria", "longenough").role == Role::Treasurer);
}

TEST_CASE("configuration errors exit non-zero") {
  Workspace ws;
  auto r = cli(fmt::format("--data-dir '{}' --zones /nonexistent.json export --dataset crime_status",
                           ws.path("data")));
  CHECK(r.status == 1);
  CHECK(r.out.find("CONFIG_INVALID") != std::string::npos);
  auto bind = cli(ws.base() + " serve --bind nope");
  CHECK(bind.status == 1);
}
