#include "reachavoid/fixtures.h"

#include <stdexcept>

#include "reachavoid/poly_parse.h"

namespace reachavoid {
namespace {

struct Spec {
  const char* name;
  int n;
  std::vector<const char*> f;
  const char* h;
  std::vector<const char*> initial;
  std::vector<const char*> target;
  std::vector<std::pair<double, double>> box;
  std::vector<std::pair<double, double>> initial_box;
};

const std::vector<Spec>& Specs() {
  static const std::vector<Spec> specs = {
      {"illu1",
       2,
       {"-0.5*x1 - 0.5*x2 + 0.5*x1*x2", "-0.5*x2 + 0.5"},
       "x1^2 + x2^2 - 1",
       {"0.1 - x1", "x1 - 0.5", "-0.8 - x2", "x2 + 0.5"},
       {"(x1 + 0.2)^2 + (x2 - 0.7)^2 - 0.02"},
       {{-1, 1}, {-1, 1}},
       {}},
      {"illu4",
       2,
       {"-0.5*x1 - 0.5*x2 + 0.5*x1*x2", "-0.5*x2 + 0.5"},
       "x1^2 + x2^2 - 1",
       {"0.1 - x1", "x1 - 0.5", "-0.8 - x2", "x2 + 0.4"},
       {"(x1 + 0.2)^2 + (x2 - 0.7)^2 - 0.02"},
       {{-1, 1}, {-1, 1}},
       {}},
      {"vdp",
       2,
       {"-2*x2", "0.8*x1 + 10*(x1^2 - 0.21)*x2"},
       "x1^2 + x2^2 - 1",
       {"-x1 + 0.6", "x1 - 0.8", "-x2", "x2 - 0.2"},
       {"x1^2 + x2^2 - 0.01"},
       {{-1, 1}, {-1, 1}},
       {}},
      {"tan1",
       2,
       {"-0.42*x1 - 1.05*x2 - 2.3*x1^2 - 0.56*x1*x2 - x1^3", "1.98*x1 + x1*x2"},
       "x1^2 + x2^2 - 4",
       {"(x1 - 1.2)^2 + (x2 - 0.8)^2 - 0.1"},
       {"(x1 + 1.2)^2 + (x2 + 0.5)^2 - 0.3"},
       {{-2, 2}, {-2, 2}},
       {}},
      {"tan2",
       2,
       {"x2", "-(1 - x1^2)*x1 - x2"},
       "x1^2/4 + x2^2/9 - 1",
       {"(x1 + 1)^2 + (x2 - 1.5)^2 - 0.25"},
       {"x1^2 + x2^2 - 0.01"},
       {{-2, 2}, {-3, 3}},
       {}},
      {"dubins",
       3,
       {"2", "1 + x3 - x1*x2", "x2*2 - x1*(1 + x3 - x1*x2)"},
       "x1^2 + x2^2 + x3^2 - 4",
       {"(x1 + 0.6)^2 + x2^2 + (x3 + 0.6)^2 - 0.02"},
       {"x1^2 + x2^2 + x3^2 - 4", "(x1 - 1)^2 - (x2 + 0.5)^2 + (x3 + 0.1)^2 - 0.1"},
       {{-2, 2}, {-2, 2}, {-2, 2}},
       {{-0.75, -0.45}, {-0.15, 0.15}, {-0.75, -0.45}}},
  };
  return specs;
}

const Spec& Find(const std::string& suite) {
  for (const Spec& s : Specs()) {
    if (suite == s.name) return s;
  }
  throw std::invalid_argument("unknown suite '" + suite +
                              "' (expected illu1, illu4, vdp, tan1, tan2 or dubins)");
}

Polynomial P(const char* text, int n) { return ParsePolynomial(text, n); }

}  // namespace

const std::vector<std::string>& SuiteNames() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const Spec& s : Specs()) out.push_back(s.name);
    return out;
  }();
  return names;
}

ProblemInstance FixtureInstance(const std::string& suite) {
  const Spec& s = Find(suite);
  ProblemInstance inst;
  inst.name = s.name;
  inst.dimension = s.n;
  for (const char* fi : s.f) inst.f.push_back(P(fi, s.n));
  inst.safe.h = P(s.h, s.n);
  for (const char* l : s.initial) inst.initial.constraints.push_back(P(l, s.n));
  for (const char* g : s.target) inst.target.constraints.push_back(P(g, s.n));
  inst.bounding_box.intervals = s.box;
  inst.initial_box.intervals = s.initial_box;
  inst.Validate();
  return inst;
}

std::vector<BenchCell> SuiteGrid(const std::string& suite) {
  const Spec& s = Find(suite);
  const int n = s.n;
  auto general = [n](const char* m) { return Method::General(P(m, n)); };
  if (suite == "illu1") {
    return {{Method::Exp(0.1), 14, 20},
            {Method::Exp(1.0), 20, 20},
            {Method::Asym(), 12, 20},
            {Method::Combined(2.0), 12, 20}};
  }
  if (suite == "illu4") {
    return {{general("x1^2"), 12, 20},
            {Method::Exp(0.1), 14, 20},
            {Method::Asym(), 14, 20},
            {Method::Prajna(), 14, 20}};
  }
  if (suite == "vdp") {
    return {{Method::Prajna(), 8, 20},
            {Method::Asym(), 8, 20},
            {Method::Exp(0.1), 12, 20},
            {Method::Exp(1.0), std::nullopt, 20},
            {Method::Combined(1.0), 8, 20},
            {general("x1^2"), 6, 20}};
  }
  if (suite == "tan1") {
    return {{Method::Prajna(), std::nullopt, 10},
            {Method::Asym(), 10, 20},
            {Method::Exp(1.0), 10, 20},
            {Method::Exp(0.1), 10, 20},
            {general("2 - x2"), 8, 20}};
  }
  if (suite == "tan2") {
    return {{Method::Prajna(), std::nullopt, 20},
            {Method::Asym(), 10, 20},
            {Method::Exp(1.0), std::nullopt, 20},
            {Method::Exp(0.1), std::nullopt, 20},
            {Method::Combined(1.0), 10, 20},
            {general("(x1 + x2)^2"), 6, 20},
            {general("x1^4"), 4, 20}};
  }
  // dubins
  return {{Method::Prajna(), 8, 12},
          {Method::Exp(1.0), 8, 12},
          {Method::Asym(), 8, 12},
          {Method::Combined(1.0), 8, 12},
          {general("(1 - x1)^2"), 6, 12}};
}

}  // namespace reachavoid
