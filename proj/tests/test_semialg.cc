#include <cmath>
#include <string>

#include "doctest.h"
#include "reachavoid/fixtures.h"
#include "reachavoid/poly_parse.h"
#include "reachavoid/semialg.h"

using namespace reachavoid;

namespace {

Polynomial P(const char* text, int n = 2) { return ParsePolynomial(text, n); }

Box Square(double r) { return Box{{{-r, r}, {-r, r}}}; }

}  // namespace

TEST_CASE("membership of the unit disk") {
  const SafeSet disk{P("x1^2 + x2^2 - 1")};
  CHECK(Classify(disk, std::vector<double>{0.0, 0.0}) == Membership::kInside);
  CHECK(Classify(disk, std::vector<double>{1.0, 0.0}) == Membership::kBoundary);
  CHECK(Classify(disk, std::vector<double>{1.5, 0.0}) == Membership::kOutside);
}

TEST_CASE("membership of the Van der Pol initial box") {
  const BasicOpenSet x0 = FixtureInstance("vdp").initial;
  CHECK(Classify(x0, std::vector<double>{0.7, 0.1}) == Membership::kInside);
  CHECK(Classify(x0, std::vector<double>{0.8, 0.1}) == Membership::kBoundary);
  CHECK(Classify(x0, std::vector<double>{0.9, 0.1}) == Membership::kOutside);
  CHECK(Classify(x0, std::vector<double>{0.7, -0.1}) == Membership::kOutside);
}

TEST_CASE("disk sampling returns strict interior points") {
  const SafeSet disk{P("x1^2 + x2^2 - 1")};
  const SampleResult r = Sample(disk, 100, Square(1.0), 7);
  REQUIRE(r.points.size() == 100);
  for (const Point& x : r.points) CHECK(x[0] * x[0] + x[1] * x[1] < 1.0);
  // pi/4 of the square is accepted.
  CHECK(r.acceptance_rate == doctest::Approx(M_PI / 4).epsilon(0.2));

  const SampleResult again = Sample(disk, 100, Square(1.0), 7);
  CHECK(again.points == r.points);
}

TEST_CASE("sampling an empty set fails") {
  const SafeSet empty{P("x1^2 + x2^2 + 1")};
  try {
    Sample(empty, 10, Square(1.0), 1);
    FAIL("expected SamplingError");
  } catch (const SamplingError& e) {
    CHECK(std::string(e.what()).find("set appears empty") != std::string::npos);
  }
}

TEST_CASE("dubins target samples satisfy both constraints") {
  const ProblemInstance dubins = FixtureInstance("dubins");
  const Box box{{{-2, 2}, {-2, 2}, {-2, 2}}};
  const SampleResult r = Sample(dubins.target, 200, box, 3);
  REQUIRE(r.points.size() == 200);
  for (const Point& x : r.points) {
    for (const Polynomial& g : dubins.target.constraints) CHECK(g.Evaluate(x) < 0.0);
  }
}

TEST_CASE("boundary sampling on the circle and the ellipse") {
  const SafeSet disk{P("x1^2 + x2^2 - 1")};
  for (const Point& x : SampleBoundary(disk, 50, Square(2.0), 5)) {
    CHECK(std::abs(std::hypot(x[0], x[1]) - 1.0) <= 1e-8);
  }
  const SafeSet ellipse{P("x1^2/4 + x2^2/9 - 1")};
  const Box box{{{-3, 3}, {-4, 4}}};
  for (const Point& x : SampleBoundary(ellipse, 50, box, 6)) {
    CHECK(std::abs(ellipse.h.Evaluate(x)) <= kBoundaryTolerance);
  }
}

TEST_CASE("boundary sampling in a box inside the set fails") {
  const SafeSet disk{P("x1^2 + x2^2 - 1")};
  try {
    SampleBoundary(disk, 10, Square(0.5), 2);
    FAIL("expected SamplingError");
  } catch (const SamplingError& e) {
    CHECK(std::string(e.what()).find("boundary not located") != std::string::npos);
  }
}

TEST_CASE("invalid boxes and sets are rejected") {
  const Box reversed{{{1.0, 0.0}, {0.0, 1.0}}};
  CHECK_THROWS_AS(reversed.Validate(), std::invalid_argument);
  const Box unbounded{{{0.0, INFINITY}, {0.0, 1.0}}};
  CHECK_THROWS_AS(unbounded.Validate(), std::invalid_argument);
  CHECK_THROWS_AS(BasicOpenSet{}.Validate(), std::invalid_argument);
  ProblemInstance bad = FixtureInstance("vdp");
  bad.f.pop_back();
  CHECK_THROWS_AS(bad.Validate(), std::invalid_argument);
}

TEST_CASE("fixture initial sets lie inside the safe set") {
  for (const std::string& name : SuiteNames()) {
    const ProblemInstance inst = FixtureInstance(name);
    CHECK_NOTHROW(inst.Validate());
    const SampleResult r = Sample(inst.initial, 200, inst.InitialSamplingBox(), 9);
    for (const Point& x : r.points) CHECK(inst.safe.h.Evaluate(x) < 0.0);
  }
}
