#include <cmath>
#include <random>
#include <string>

#include "doctest.h"
#include "reachavoid/fixtures.h"
#include "reachavoid/poly_parse.h"
#include "reachavoid/sosbuild.h"

using namespace reachavoid;

namespace {

Polynomial P(const char* text, int n = 2) { return ParsePolynomial(text, n); }

// A table holding one Gram symbol "s" over `basis`.
SymbolTable GramOnly(const std::vector<Monomial>& basis) {
  SymbolTable t;
  SymbolInfo info;
  info.kind = SymbolInfo::Kind::kGram;
  info.basis = basis;
  info.index = 0;
  info.offset = 0;
  info.length = SvecSize(static_cast<int>(basis.size()));
  t.symbols["s"] = info;
  t.order = {"s"};
  t.num_variables = info.length;
  return t;
}

SosIdentity ConstantIdentity(const Polynomial& target) {
  SosIdentity id;
  id.name = "target";
  id.gram_symbol = "s";
  id.terms.push_back({IdentityTerm::Kind::kConstant, "", target});
  return id;
}

double RowValue(const ExpandedRow& row, const Eigen::VectorXd& x) {
  double s = 0.0;
  for (const auto& [i, c] : row.coeffs) s += c * x(i);
  return s - row.rhs;
}

Polynomial EvaluateTerms(const SosIdentity& id, const Certificate& cert) {
  Polynomial sum(cert.dimension);
  for (const IdentityTerm& t : id.terms) {
    switch (t.kind) {
      case IdentityTerm::Kind::kConstant:
        sum += t.factor;
        break;
      case IdentityTerm::Kind::kSymbol:
        sum += t.factor * cert.Get(t.symbol);
        break;
      case IdentityTerm::Kind::kLieOfSymbol:
        sum += t.factor * LieDerivative(cert.Get(t.symbol), cert.f);
        break;
    }
  }
  return sum;
}

}  // namespace

TEST_CASE("expand (x+y)^2 over the basis (x, y)") {
  const std::vector<Monomial> basis = {Monomial::Variable(2, 0), Monomial::Variable(2, 1)};
  const SymbolTable table = GramOnly(basis);
  const auto rows = ExpandIdentity(ConstantIdentity(P("x1^2 + 2*x1*x2 + x2^2")), table, {});
  int active = 0;
  for (const ExpandedRow& r : rows) {
    if (r.coeffs.empty()) {
      CHECK(r.rhs == 0.0);
      continue;
    }
    ++active;
    REQUIRE(r.coeffs.size() == 1);
  }
  CHECK(active == 3);
  const Eigen::VectorXd ones = Svec(Eigen::MatrixXd::Ones(2, 2));
  for (const ExpandedRow& r : rows) CHECK(RowValue(r, ones) == doctest::Approx(0.0));
  const Eigen::VectorXd identity = Svec(Eigen::MatrixXd::Identity(2, 2));
  double worst = 0.0;
  for (const ExpandedRow& r : rows) worst = std::max(worst, std::abs(RowValue(r, identity)));
  CHECK(worst == doctest::Approx(2.0));
}

TEST_CASE("expand the zero target over the constant basis") {
  const SymbolTable table = GramOnly({Monomial(2)});
  const auto rows = ExpandIdentity(ConstantIdentity(Polynomial(2)), table, {});
  REQUIRE(rows.size() == 1);
  REQUIRE(rows[0].coeffs.size() == 1);
  CHECK(rows[0].coeffs[0].first == 0);
  CHECK(rows[0].rhs == 0.0);
}

TEST_CASE("expand x^4 + 1 over (1, x, x^2)") {
  const SymbolTable table = GramOnly(MonomialBasis(1, 2));
  const auto rows = ExpandIdentity(ConstantIdentity(P("x1^4 + 1", 1)), table, {});
  CHECK(rows.size() == 5);
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(3, 3);
  q(0, 0) = 1.0;
  q(2, 2) = 1.0;
  for (const ExpandedRow& r : rows) CHECK(RowValue(r, Svec(q)) == doctest::Approx(0.0));
  // Moving weight between x^2 on the diagonal and the 1*x^2 cross term
  // keeps the identity.
  q(1, 1) = 2.0;
  q(0, 2) = q(2, 0) = -1.0;
  for (const ExpandedRow& r : rows) CHECK(RowValue(r, Svec(q)) == doctest::Approx(0.0));
  CHECK(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(q).eigenvalues().minCoeff() >= -1e-12);
}

TEST_CASE("Van der Pol asym program shape") {
  const SosProgram prog = BuildProgram(FixtureInstance("vdp"), Method::Asym(), 8);
  CHECK(prog.identities.size() == 4);
  for (const char* name : {"v", "w", "p"}) {
    CHECK(prog.symbols.at(name).kind == SymbolInfo::Kind::kFree);
    CHECK(prog.symbols.at(name).length == 45);
  }
  for (const char* name : {"s1[1]", "s2[1]", "s3[1]", "s4[1]"}) {
    CHECK(prog.symbols.at(name).basis.size() == 15);
  }
  CHECK_NOTHROW(prog.sdp.Validate());
}

TEST_CASE("identity counts follow the target constraint count") {
  const ProblemInstance dubins = FixtureInstance("dubins");
  CHECK(BuildProgram(dubins, Method::Exp(0.1), 8).identities.size() == 4);
  CHECK(BuildProgram(dubins, Method::Prajna(), 8).identities.size() == 4);
  CHECK(BuildProgram(dubins, Method::Asym(), 8).identities.size() == 6);
  const ProblemInstance vdp = FixtureInstance("vdp");
  CHECK(BuildProgram(vdp, Method::Combined(1.0), 8).identities.size() == 6);
  CHECK(BuildProgram(vdp, Method::Exp(1.0), 8).identities.size() == 3);
  BuildOptions volume;
  volume.volume_objective = true;
  const SosProgram v = BuildProgram(vdp, Method::Asym(), 6, volume);
  CHECK(v.identities.size() == 5);
  CHECK(v.sdp.HasObjective());
  BuildOptions split;
  split.split_boundary_multiplier = true;
  const SosProgram s = BuildProgram(vdp, Method::Combined(1.0), 6, split);
  CHECK(s.symbols.contains("p1"));
  CHECK(s.symbols.contains("p2"));
  CHECK_FALSE(s.symbols.contains("p"));
}

TEST_CASE("invalid build requests are rejected") {
  const ProblemInstance vdp = FixtureInstance("vdp");
  CHECK_THROWS_AS(BuildProgram(vdp, Method::Asym(), 7), std::invalid_argument);
  CHECK_THROWS_AS(BuildProgram(vdp, Method::Asym(), 0), std::invalid_argument);
  CHECK_THROWS_AS(BuildProgram(vdp, Method::Exp(-1.0), 4), std::invalid_argument);
  // x1 changes sign on the safe set.
  CHECK_THROWS_AS(BuildProgram(vdp, Method::General(P("x1")), 4), std::invalid_argument);
  BuildOptions bad;
  bad.eps = 0.0;
  CHECK_THROWS_AS(BuildProgram(vdp, Method::Asym(), 4, bad), std::invalid_argument);
}

TEST_CASE("SDP rows encode the identities exactly") {
  // For a random variable vector, each identity residual sigma - sum(terms),
  // recomputed from the reconstructed polynomials, must match the SDP rows.
  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal;
  struct Case {
    const char* suite;
    Method method;
    int degree;
  };
  const std::vector<Case> cases = {
      {"vdp", Method::Asym(), 4},         {"vdp", Method::Prajna(), 4},
      {"illu1", Method::Exp(0.1), 4},     {"dubins", Method::Combined(1.0), 2},
      {"tan2", Method::General(P("x1^4")), 4},
  };
  for (const Case& c : cases) {
    const SosProgram prog = BuildProgram(FixtureInstance(c.suite), c.method, c.degree);
    Eigen::VectorXd x(prog.symbols.num_variables);
    for (int i = 0; i < x.size(); ++i) x(i) = normal(rng);
    const Certificate cert = Reconstruct(prog, x);
    double worst = 0.0;
    for (const SosIdentity& id : prog.identities) {
      const Polynomial residual =
          cert.grams.at(id.gram_symbol).ToPolynomial(prog.dimension) - EvaluateTerms(id, cert);
      for (const ExpandedRow& row : ExpandIdentity(id, prog.symbols, prog.f)) {
        worst = std::max(worst, std::abs(RowValue(row, x) - residual.coefficient(row.monomial)));
      }
    }
    CHECK_MESSAGE(worst <= 1e-9, c.suite, " ", c.method.Label());
  }
}

TEST_CASE("reconstruct slices and special cases") {
  const SosProgram prog = BuildProgram(FixtureInstance("vdp"), Method::Asym(), 8);
  const Certificate zero = Reconstruct(prog, Eigen::VectorXd::Zero(prog.symbols.num_variables));
  for (const auto& [name, p] : zero.polynomials) CHECK_MESSAGE(p.is_zero(), name);

  Eigen::VectorXd x = Eigen::VectorXd::Zero(prog.symbols.num_variables);
  const SymbolInfo& v = prog.symbols.at("v");
  x.segment(v.offset, v.length).setOnes();
  const Certificate one = Reconstruct(prog, x);
  CHECK(one.Get("v").terms().size() == 45);
  CHECK(one.Get("w").is_zero());
  CHECK_THROWS_AS(one.Get("nosuch"), std::out_of_range);
  CHECK_THROWS_AS(Reconstruct(prog, Eigen::VectorXd::Zero(3)), std::invalid_argument);

  const SosProgram comb = BuildProgram(FixtureInstance("vdp"), Method::Combined(1.0), 4);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(comb.symbols.num_variables);
  y(comb.symbols.at("v1").offset) = 2.0;
  y(comb.symbols.at("v2").offset + 1) = 3.0;
  const Certificate c = Reconstruct(comb, y);
  CHECK(c.Has("v1"));
  CHECK(c.Has("v2"));
  CHECK(c.Has("w"));
  CHECK(c.Barrier() == P("2 + 3*x1"));
}
