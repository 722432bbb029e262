#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "oracles.h"
#include "reachavoid/sdp.h"

using namespace reachavoid;

using oracles::RandomPsd;
using oracles::TraceOneProblem;

TEST_CASE("svec/smat round trip preserves inner products") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 1 + trial % 7;
    const Eigen::MatrixXd a = RandomPsd(n, rng) - RandomPsd(n, rng);
    const Eigen::MatrixXd b = RandomPsd(n, rng);
    CHECK((Smat(Svec(a), n) - a).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(std::abs(Svec(a).dot(Svec(b)) - (a.cwiseProduct(b)).sum()) < 1e-12);
  }
}

TEST_CASE("trace-one minimization reaches zero") {
  const SolveOutcome out = Solve(TraceOneProblem());
  REQUIRE(out.status == SolveStatus::kFeasible);
  CHECK(std::abs(out.primal_objective) < 1e-7);
  const Eigen::MatrixXd x = Smat(out.primal.head(3), 2);
  CHECK(x(0, 0) == doctest::Approx(0.0).epsilon(1e-7));
  CHECK(x(1, 1) == doctest::Approx(1.0).epsilon(1e-7));
  // Weak duality at the optimal exit.
  CHECK(out.primal_objective >= out.dual_objective - 1e-8);
}

TEST_CASE("hand-built feasible point for the trace problem has zero residual") {
  const SdpProblem p = TraceOneProblem();
  Eigen::MatrixXd x(2, 2);
  x << 0.0, 0.0, 0.0, 1.0;
  Eigen::VectorXd sol = Svec(x);
  ResidualReport rep = CheckSolution(p, sol);
  CHECK(rep.equality_residual < 1e-12);
  CHECK(rep.min_eigenvalue >= -1e-12);
  sol(SvecIndex(2, 0, 0)) += 1e-3;
  rep = CheckSolution(p, sol);
  CHECK(rep.equality_residual == doctest::Approx(1e-3).epsilon(1e-9));
}

TEST_CASE("sign contradiction is reported infeasible") {
  Eigen::VectorXd b(1);
  b << -1.0;
  const SdpProblem p = SdpProblem::FromSvec({1}, 0, 1, {{0, 0, 1.0}}, b);
  const SolveOutcome out = Solve(p);
  CHECK(out.status == SolveStatus::kInfeasibleCertificate);
  CHECK(out.primal.size() == 0);
}

TEST_CASE("random constructed-feasible SDPs are solved") {
  std::mt19937_64 rng(20240601);
  for (int trial = 0; trial < 20; ++trial) {
    const SdpProblem p = oracles::RandomFeasibleSdp(trial, rng);
    const SolveOutcome out = Solve(p);
    CAPTURE(trial);
    CAPTURE(out.message);
    REQUIRE(out.status == SolveStatus::kFeasible);
    const ResidualReport rep = CheckSolution(p, out.primal);
    CHECK(rep.relative_equality_residual <= 1e-8);
    CHECK(rep.min_relative_eigenvalue >= -1e-8);
  }
}

TEST_CASE("sparse dump round trip") {
  const SdpProblem p = TraceOneProblem();
  std::stringstream ss;
  WriteSdpDump(p, ss);
  const SdpProblem q = ReadSdpDump(ss);
  std::stringstream s2;
  WriteSdpDump(q, s2);
  std::stringstream s1;
  WriteSdpDump(p, s1);
  CHECK(s1.str() == s2.str());
  const SolveOutcome out = Solve(q);
  CHECK(out.status == SolveStatus::kFeasible);
}

TEST_CASE("solving is deterministic") {
  const SolveOutcome a = Solve(TraceOneProblem());
  const SolveOutcome b = Solve(TraceOneProblem());
  CHECK(a.iterations == b.iterations);
  CHECK((a.primal - b.primal).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("solver config validation") {
  SolverConfig c;
  c.step_fraction = 1.5;
  CHECK_THROWS_AS(c.Validate(), std::invalid_argument);
  c = SolverConfig{};
  c.feasibility_tolerance = 0;
  CHECK_THROWS_AS(c.Validate(), std::invalid_argument);
}

TEST_CASE("problem validation rejects zero rows") {
  Eigen::VectorXd b(2);
  b << 1.0, 0.0;
  SdpProblem p = SdpProblem::FromSvec({1}, 0, 2, {{0, 0, 1.0}}, b);
  CHECK_THROWS_AS(p.Validate(), std::invalid_argument);
}
