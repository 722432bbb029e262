#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "reachavoid/driver.h"
#include "reachavoid/fixtures.h"
#include "reachavoid/poly_parse.h"

using namespace reachavoid;

namespace {

DriverConfig Quick(std::vector<int> degrees) {
  DriverConfig cfg;
  cfg.plan.degrees = std::move(degrees);
  cfg.simulation_samples = 50;
  cfg.validation.samples = 2000;
  return cfg;
}

int RunCli(const std::string& args, std::string* output = nullptr) {
  const std::string log = "cli_test_output.txt";
  const std::string cmd = std::string(CLI_PATH) + " " + args + " > " + log + " 2>&1";
  const int status = std::system(cmd.c_str());
  if (output) {
    std::ifstream in(log);
    std::stringstream ss;
    ss << in.rdbuf();
    *output = ss.str();
  }
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

bool HasKey(const nlohmann::json& j, const std::string& key) {
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) {
      if (k == key || HasKey(v, key)) return true;
    }
  } else if (j.is_array()) {
    for (const auto& v : j) {
      if (HasKey(v, key)) return true;
    }
  }
  return false;
}

}  // namespace

TEST_CASE("Van der Pol asym sweep stops at the first verified degree") {
  const VerificationReport report = RunSweep(FixtureInstance("vdp"), Method::Asym(), Quick({6, 8, 10}));
  REQUIRE(report.Verified());
  CHECK(*report.verified_degree == 8);
  CHECK(report.cells.size() == 2);
  CHECK_FALSE(report.cells[0].verified);
  CHECK(report.cells[1].verified);
  CHECK(report.cells[1].backend == "builtin-ipm");
  REQUIRE(report.certificate.has_value());
  REQUIRE(report.simulation.has_value());
  CHECK(report.simulation->exited == 0);
  CHECK(report.Verdict() == "verified at degree 8");

  const nlohmann::json a = ToJson(report);
  CHECK_FALSE(HasKey(a, "seconds"));
  CHECK(HasKey(ToJson(report, true), "solve_seconds"));
  const VerificationReport again =
      RunSweep(FixtureInstance("vdp"), Method::Asym(), Quick({6, 8, 10}));
  CHECK(ToJson(again).dump() == a.dump());
}

TEST_CASE("unverifiable cells are reported, not thrown") {
  const VerificationReport report =
      RunSweep(FixtureInstance("vdp"), Method::Exp(1.0), Quick({2, 4, 6}));
  CHECK_FALSE(report.Verified());
  CHECK(report.cells.size() == 3);
  CHECK(report.Verdict() == "not verified up to degree 6");
  CHECK_FALSE(report.certificate.has_value());
}

TEST_CASE("method comparison and tables") {
  CHECK(CompareMethods(FixtureInstance("vdp"), {}, Quick({2})).empty());
  CHECK(ComparisonTable({}).empty());
  const auto reports = CompareMethods(
      FixtureInstance("tan2"),
      {Method::General(ParsePolynomial("x1^4", 2)), Method::Asym()}, Quick({4, 6, 8, 10}));
  REQUIRE(reports.size() == 2);
  REQUIRE(reports[0].Verified());
  REQUIRE(reports[1].Verified());
  CHECK(*reports[0].verified_degree < *reports[1].verified_degree);
  CHECK(ComparisonTable(reports).size() == 2);
}

TEST_CASE("driver configuration and digests") {
  DriverConfig cfg;
  cfg.plan.degrees = {4, 3};
  CHECK_THROWS_AS(cfg.Validate(), std::invalid_argument);
  cfg = DriverConfig{};
  cfg.external_only = true;
  CHECK_THROWS_AS(cfg.Validate(), std::invalid_argument);
  CHECK(InstanceDigest(FixtureInstance("vdp")) == InstanceDigest(FixtureInstance("vdp")));
  CHECK(InstanceDigest(FixtureInstance("vdp")) != InstanceDigest(FixtureInstance("tan1")));
}

TEST_CASE("external backend produces a certificate") {
  if (std::system("python3 -c 'import cvxpy, clarabel' > /dev/null 2>&1") != 0) {
    MESSAGE("cvxpy with Clarabel not available; skipped");
    return;
  }
  DriverConfig cfg = Quick({8});
  cfg.external_solver = std::string("python3 ") + TOOLS_DIR + "/external_solve.py";
  cfg.external_only = true;
  const VerificationReport report = RunSweep(FixtureInstance("vdp"), Method::Asym(), cfg);
  REQUIRE(report.Verified());
  CHECK(report.cells.back().backend.rfind("external:", 0) == 0);
}

TEST_CASE("command-line exit codes") {
  const std::string fixtures = FIXTURE_DIR;
  std::string out;
  CHECK(RunCli("verify --problem " + fixtures + "/vdp.json --method asym --degrees 6,8 --sim-samples 50",
               &out) == 0);
  CHECK(out.find("verified at degree 8") != std::string::npos);
  CHECK(RunCli("verify --problem " + fixtures + "/vdp.json --method exp", &out) == 2);
  CHECK(out.find("exp requires --beta") != std::string::npos);
  CHECK(RunCli("verify --problem " + fixtures + "/vdp.json --method exp --beta 1 --degrees 2,4") == 1);
  CHECK(RunCli("verify --problem /nonexistent.json --method asym") == 2);
  CHECK(RunCli("verify --problem " + fixtures +
                   "/vdp.json --method general --alpha-m \"x1^2\" --degrees 8 --sim-samples 50",
               &out) == 0);
  CHECK(RunCli("simulate --problem " + fixtures + "/vdp.json --samples 0", &out) == 0);
  CHECK(RunCli("simulate --problem " + fixtures + "/vdp.json --samples 100", &out) == 0);
  CHECK(out.find("\"exited\": 0") != std::string::npos);
  CHECK(RunCli("bench --suite nosuch") == 2);
  CHECK(RunCli("nosuch") == 2);
}
