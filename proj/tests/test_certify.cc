#include <cmath>
#include <sstream>
#include <string>

#include "doctest.h"
#include "reachavoid/certify.h"
#include "reachavoid/fixtures.h"
#include "reachavoid/poly_parse.h"

using namespace reachavoid;

namespace {

Polynomial P(const char* text, int n = 2) { return ParsePolynomial(text, n); }

// (x+y)^2 = z^T Q z with z = (x, y) and Q the all-ones matrix.
Certificate SquareCertificate() {
  Certificate cert;
  cert.dimension = 2;
  cert.method = Method::Asym();
  SosIdentity id;
  id.name = "square";
  id.gram_symbol = "s";
  id.terms.push_back({IdentityTerm::Kind::kConstant, "", P("x1^2 + 2*x1*x2 + x2^2")});
  cert.identities.push_back(id);
  cert.grams["s"] = GramMatrix{{Monomial::Variable(2, 0), Monomial::Variable(2, 1)},
                               Eigen::MatrixXd::Ones(2, 2)};
  return cert;
}

Certificate SolveCell(const ProblemInstance& inst, const Method& method, int degree) {
  const SosProgram prog = BuildProgram(inst, method, degree);
  const SolveOutcome out = Solve(prog.sdp);
  REQUIRE_MESSAGE(out.status == SolveStatus::kFeasible, out.message);
  return Reconstruct(prog, out.primal);
}

}  // namespace

TEST_CASE("exact rank-one certificate has zero residual") {
  ValidationReport report;
  ValidateAlgebraic(SquareCertificate(), {}, &report);
  CHECK(report.identity_residual == 0.0);
  CHECK(report.min_gram_eigenvalue == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(report.algebraic_pass);
}

TEST_CASE("a perturbed Gram entry shows up in its monomial only") {
  Certificate cert = SquareCertificate();
  cert.grams["s"].q(0, 0) += 1e-4;
  ValidationReport report;
  ValidateAlgebraic(cert, {}, &report);
  CHECK(report.identity_residual == doctest::Approx(1e-4));
  CHECK_FALSE(report.algebraic_pass);

  cert = SquareCertificate();
  cert.grams["s"].q(0, 1) += 1e-4;
  cert.grams["s"].q(1, 0) += 1e-4;
  ValidateAlgebraic(cert, {}, &report);
  // Both off-diagonal entries feed the x1*x2 coefficient.
  CHECK(report.identity_residual == doctest::Approx(2e-4));
}

TEST_CASE("solved Van der Pol asym certificate validates, its negation does not") {
  const ProblemInstance vdp = FixtureInstance("vdp");
  const Certificate cert = SolveCell(vdp, Method::Asym(), 8);
  const ValidationReport report = Validate(cert, vdp);
  CHECK(report.identity_residual <= 1e-6);
  CHECK(report.min_gram_eigenvalue >= -1e-7);
  CHECK(report.Pass());
  CHECK(report.Summary().find("falsification-free") != std::string::npos);
  for (const ConstraintMargin& m : report.margins) {
    CHECK_MESSAGE(m.worst >= -1e-6, m.name);
    CHECK(m.samples >= 10000);
  }

  Certificate negated = cert;
  negated.polynomials["v"] = -cert.Get("v");
  ValidationReport bad;
  ValidateSampling(negated, vdp, {}, &bad);
  CHECK_FALSE(bad.sampling_pass);
  bool initial_failed = false;
  for (const ConstraintMargin& m : bad.margins) {
    if (m.region == "initial") initial_failed |= m.worst < 10 * ValidationConfig{}.margin_floor;
  }
  CHECK(initial_failed);

  // The zero level set encloses X0 and reaches into the target.
  const LevelSet ls = ExtractLevelSet(cert.Barrier(), 101, vdp.bounding_box);
  CHECK_FALSE(ls.points.empty());
  const SampleResult x0 = Sample(vdp.initial, 500, vdp.bounding_box, 4);
  for (const Point& x : x0.points) CHECK(cert.Barrier().Evaluate(x) > 0.0);
  bool meets_target = false;
  for (int i = 0; i < static_cast<int>(ls.values.size()); ++i) {
    const Point x = ls.GridPoint(i);
    if (ls.values[i] > 0.0 && Classify(vdp.target, x) == Membership::kInside) meets_target = true;
  }
  CHECK(meets_target);
}

TEST_CASE("exponential certificates embed as asymptotic ones") {
  const ProblemInstance vdp = FixtureInstance("vdp");
  const Certificate cert = SolveCell(vdp, Method::Exp(0.1), 12);
  REQUIRE(Validate(cert, vdp).Pass());
  const Certificate embedded = EmbedExpAsAsym(cert);
  CHECK(embedded.method.kind == MethodKind::kAsymGbf);
  CHECK(embedded.Get("w") == cert.Get("v") * 10.0);
  ValidationReport algebraic;
  ValidateAlgebraic(embedded, {}, &algebraic);
  CHECK(algebraic.algebraic_pass);
  CHECK(ValidateEmbedding(embedded, vdp).Pass());
  CHECK_THROWS_AS(EmbedExpAsAsym(embedded), std::invalid_argument);
}

TEST_CASE("level sets of simple functions") {
  const Box box{{{-1, 1}, {-1, 1}}};
  const LevelSet circle = ExtractLevelSet(P("x1^2 + x2^2 - 0.25"), 101, box);
  REQUIRE_FALSE(circle.points.empty());
  CHECK(circle.values.size() == 101u * 101u);
  for (const Point& x : circle.points) {
    CHECK(std::abs(std::hypot(x[0], x[1]) - 0.5) <= 0.02);
  }
  CHECK_FALSE(circle.segments.empty());
  std::ostringstream csv;
  circle.WriteSegmentsCsv(csv);
  CHECK(csv.str().rfind("segment,x1,y1,x2,y2", 0) == 0);

  const LevelSet flat = ExtractLevelSet(Polynomial(2, 1.0), 21, box);
  CHECK(flat.points.empty());
  CHECK(flat.segments.empty());

  const Box box4{{{-1, 1}, {-1, 1}, {-1, 1}, {-1, 1}}};
  CHECK_THROWS_AS(ExtractLevelSet(Polynomial(4, 1.0), 5, box4), std::invalid_argument);
  CHECK_THROWS_AS(ExtractLevelSet(Polynomial(2, 1.0), 1, box), std::invalid_argument);
}

TEST_CASE("validation report serializes") {
  ValidationReport report;
  ValidateAlgebraic(SquareCertificate(), {}, &report);
  const nlohmann::json j = ToJson(report);
  CHECK(j.contains("algebraic"));
  CHECK(j["algebraic"]["pass"].get<bool>());
}
