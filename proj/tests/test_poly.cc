#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "oracles.h"
#include "reachavoid/poly.h"
#include "reachavoid/poly_parse.h"

using namespace reachavoid;
using oracles::RandomPoly;

namespace {

Polynomial P(const char* text, int n = 2) { return ParsePolynomial(text, n); }

long Binomial(int n, int k) {
  long r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

TEST_CASE("add examples") {
  CHECK(P("x1^2 + x2") + P("-x1^2 + 1") == P("x2 + 1"));
  CHECK(P("3*x1 - x2^3") + Polynomial(2) == P("3*x1 - x2^3"));
  CHECK(P("2*x1 + 3*x2^2") + P("x1 + x2^2") == P("3*x1 + 4*x2^2"));
  CHECK((P("x1") + P("-x1")).is_zero());
}

TEST_CASE("mul examples") {
  CHECK(P("x1 + x2") * P("x1 - x2") == P("x1^2 - x2^2"));
  CHECK(P("x1^3 - 2") * Polynomial(2, 1.0) == P("x1^3 - 2"));
  CHECK(P("x1 + 2") * P("x1^2 + 3*x1") == P("x1^3 + 5*x1^2 + 6*x1"));
}

TEST_CASE("dimension mismatch is rejected") {
  CHECK_THROWS_AS(P("x1", 1) + P("x1", 2), std::invalid_argument);
  CHECK_THROWS_AS(P("x1", 1) * P("x1", 2), std::invalid_argument);
  CHECK_THROWS_AS(P("x1^2", 2).Evaluate(std::vector<double>{1.0}), std::invalid_argument);
  CHECK_THROWS(LieDerivative(P("x1", 2), {P("x1", 2)}));
}

TEST_CASE("gradient examples") {
  const PolyVector g1 = P("x1^2", 1).Gradient();
  REQUIRE(g1.size() == 1);
  CHECK(g1[0] == P("2*x1", 1));
  const PolyVector g2 = P("x1^2*x2 + x2^3").Gradient();
  CHECK(g2[0] == P("2*x1*x2"));
  CHECK(g2[1] == P("x1^2 + 3*x2^2"));
  const PolyVector g3 = Polynomial(2, 5.0).Gradient();
  CHECK(g3[0].is_zero());
  CHECK(g3[1].is_zero());
}

TEST_CASE("lie derivative examples") {
  CHECK(LieDerivative(P("x1^2 + x2^2"), {P("-x2"), P("x1")}).is_zero());
  const PolyVector illu = {P("-0.5*x1 - 0.5*x2 + 0.5*x1*x2"), P("-0.5*x2 + 0.5")};
  CHECK(LieDerivative(P("x1"), illu) == P("-0.5*x1 - 0.5*x2 + 0.5*x1*x2"));
  CHECK(LieDerivative(P("x1*x2"), {P("x2"), P("x1")}) == P("x2^2 + x1^2"));
}

TEST_CASE("eval examples") {
  const std::vector<double> a = {2.0, 3.0};
  CHECK(P("x1^2*x2").Evaluate(a) == doctest::Approx(12.0));
  CHECK(Polynomial(2).Evaluate(a) == 0.0);
  const std::vector<double> b = {1.5, -2.0};
  CHECK(P("x1^3 - 2*x1*x2 + 1").Evaluate(b) == doctest::Approx(10.375));
  CHECK_THROWS_AS(P("x1^400").Evaluate(std::vector<double>{1e10, 0.0}), std::range_error);
}

TEST_CASE("monomial basis counts and order") {
  const auto b = MonomialBasis(2, 2);
  REQUIRE(b.size() == 6);
  CHECK(b[0] == Monomial(std::vector<int>{0, 0}));
  CHECK(b[1] == Monomial(std::vector<int>{1, 0}));
  CHECK(b[2] == Monomial(std::vector<int>{0, 1}));
  CHECK(b[3] == Monomial(std::vector<int>{2, 0}));
  CHECK(b[4] == Monomial(std::vector<int>{1, 1}));
  CHECK(b[5] == Monomial(std::vector<int>{0, 2}));
  CHECK(MonomialBasis(2, 4).size() == 15);
  CHECK(MonomialBasis(3, 4).size() == 35);
  for (int n = 1; n <= 5; ++n) {
    for (int d = 0; d <= 10; ++d) {
      CHECK(static_cast<long>(MonomialBasis(n, d).size()) == Binomial(n + d, n));
    }
  }
}

TEST_CASE("zero threshold prunes floating-point dust") {
  Polynomial p = P("x1 + x2");
  p.AddTerm(Monomial::Variable(2, 0), -1.0 + 1e-15);
  CHECK(p == P("x2"));
  for (const auto& [m, c] : (P("0.1*x1") * 3.0 - P("0.3*x1")).terms()) {
    CHECK(std::abs(c) >= kZeroThreshold);
  }
}

TEST_CASE("text form round-trips") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + trial % 3;
    const Polynomial p = RandomPoly(rng, n, 4);
    CHECK(ParsePolynomial(p.ToString(), n) == p);
  }
  CHECK(P("x1^2/4 + x2^2/9 - 1") == P("0.25*x1^2 + 0.1111111111111111*x2^2 - 1"));
  CHECK_THROWS_AS(P("x3"), ParseError);
  CHECK_THROWS_AS(P("x1 +"), ParseError);
  CHECK_THROWS_AS(P("x1 / x2"), ParseError);
}

TEST_CASE("add, mul and lie derivative agree with a dense oracle") {
  CHECK(oracles::AlgebraOracleError(1000, 2024) <= 1e-12);
}

TEST_CASE("gradient matches central finite differences") {
  CHECK(oracles::GradientFailures(100, 99, 1e-6) == 0);
}
