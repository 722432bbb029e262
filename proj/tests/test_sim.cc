#include <cmath>
#include <sstream>

#include "doctest.h"
#include "oracles.h"
#include "reachavoid/fixtures.h"
#include "reachavoid/poly_parse.h"
#include "reachavoid/sim.h"

using namespace reachavoid;

namespace {

Polynomial P(const char* text, int n = 1) { return ParsePolynomial(text, n); }

ProblemInstance Decay(const char* f = "-x1") { return oracles::DecayInstance(f); }

}  // namespace

TEST_CASE("linear decay reaches the target at ln 10") {
  const Trajectory traj = Integrate(Decay(), {1.0});
  REQUIRE(traj.outcome == Outcome::kReachedTargetSafely);
  REQUIRE(traj.tau.has_value());
  CHECK(std::abs(*traj.tau - std::log(10.0)) <= 1e-6);
  CHECK(traj.min_safety_margin > 0.0);
  std::ostringstream csv;
  WriteTrajectoryCsv(traj, csv);
  CHECK(csv.str().rfind("t,x1", 0) == 0);
}

TEST_CASE("leaving the safe set and timing out") {
  const Trajectory out = Integrate(Decay("x1"), {1.0});
  CHECK(out.outcome == Outcome::kExitedSafeSet);
  CHECK_FALSE(out.tau.has_value());

  SimConfig short_run;
  short_run.t_max = 5.0;
  const Trajectory idle = Integrate(Decay("0"), {1.0}, short_run);
  CHECK(idle.outcome == Outcome::kTimeout);
}

TEST_CASE("Van der Pol from the initial box reaches the target") {
  const Trajectory traj = Integrate(FixtureInstance("vdp"), {0.7, 0.1});
  CHECK(traj.outcome == Outcome::kReachedTargetSafely);
}

TEST_CASE("fixed-step error drops by at least 16 when the step halves") {
  for (double ratio : oracles::FixedStepErrorRatios()) CHECK(ratio >= 16.0);
  // Adaptive mode meets its tolerance.
  const double x = Propagate({P("-x1")}, {1.0}, 2.0)[0];
  CHECK(std::abs(x - std::exp(-2.0)) <= 1e-7);
}

TEST_CASE("value estimates") {
  const ProblemInstance decay = Decay();
  const ValueEstimate at_target = EstimateValue(decay, {0.0}, 0.0);
  CHECK(at_target.value == 1.0);
  const ValueEstimate decayed = EstimateValue(decay, {1.0}, 1.0);
  CHECK(decayed.value == doctest::Approx(0.1).epsilon(1e-6));
  CHECK(EstimateValue(Decay("x1"), {1.0}, 1.0).value == 0.0);
  SimConfig short_run;
  short_run.t_max = 1.0;
  const ValueEstimate cut = EstimateValue(Decay("0"), {1.0}, 1.0, short_run);
  CHECK(cut.value == 0.0);
  CHECK(cut.inconclusive);
}

TEST_CASE("Monte Carlo reach-avoid") {
  SimConfig cfg;
  cfg.record = false;
  const MonteCarloSummary illu = MonteCarloReachAvoid(FixtureInstance("illu1"), 200, cfg, 3);
  CHECK(illu.samples == 200);
  CHECK(illu.exited == 0);
  CHECK(illu.reached + illu.timeout == 200);

  SimConfig short_run = cfg;
  short_run.t_max = 2.0;
  const MonteCarloSummary idle = MonteCarloReachAvoid(Decay("0"), 50, short_run, 3);
  CHECK(idle.reached == 0);
  CHECK(idle.timeout == 50);

  // X0 straddles the boundary of X: trajectories start outside.
  ProblemInstance bad = Decay("0");
  bad.initial.constraints = {P("(x1 - 2)^2 - 0.01")};
  bad.bounding_box = Box{{{-3.0, 3.0}}};
  const MonteCarloSummary straddle = MonteCarloReachAvoid(bad, 50, short_run, 3);
  CHECK(straddle.exited > 0);
  CHECK_FALSE(straddle.counterexamples.empty());
}

TEST_CASE("invalid simulation settings are rejected") {
  SimConfig cfg;
  cfg.rtol = 0.0;
  CHECK_THROWS_AS(cfg.Validate(), std::invalid_argument);
  CHECK_THROWS(Integrate(Decay(), {1.0, 2.0}));
}
