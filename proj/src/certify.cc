#include "reachavoid/certify.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <ostream>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace reachavoid {
namespace {

constexpr int kMaxSampleBatches = 50;

// Evaluates one pointwise inequality "expr(x) >= 0"; the margin is expr(x).
struct PointCheck {
  std::string name;
  std::string region;
  std::function<double(const Point&)> expr;
  // Optional further restriction of the sample set.
  std::function<bool(const Point&)> keep;
};

struct SampleSets {
  std::vector<Point> initial;
  std::vector<Point> outside_target;
  std::vector<Point> boundary;
};

SampleSets DrawSamples(const ProblemInstance& instance, const ValidationConfig& config) {
  SampleSets s;
  const int n = config.samples;
  if (n <= 0) return s;
  s.initial = Sample(instance.initial, n, instance.InitialSamplingBox(), config.seed).points;
  s.boundary = SampleBoundary(instance.safe, n, instance.bounding_box, config.seed + 2);
  // Closure of X minus Xr: interior points of X outside the open target, plus
  // boundary points of X outside it.
  for (int batch = 0; batch < kMaxSampleBatches &&
                      static_cast<int>(s.outside_target.size()) < n;
       ++batch) {
    const auto pts =
        Sample(instance.safe, n, instance.bounding_box, config.seed + 3 + batch).points;
    for (const Point& x : pts) {
      if (static_cast<int>(s.outside_target.size()) >= n) break;
      if (instance.target.MaxConstraint(x) >= 0.0) s.outside_target.push_back(x);
    }
  }
  for (const Point& x : s.boundary) {
    if (instance.target.MaxConstraint(x) >= 0.0) s.outside_target.push_back(x);
  }
  return s;
}

void RunChecks(const std::vector<PointCheck>& checks, const SampleSets& sets,
               const ValidationConfig& config, ValidationReport* report) {
  report->sampling_checked = true;
  report->samples = config.samples;
  report->seed = config.seed;
  bool pass = true;
  for (const PointCheck& c : checks) {
    const std::vector<Point>& pts = c.region == "initial"   ? sets.initial
                                    : c.region == "boundary" ? sets.boundary
                                                             : sets.outside_target;
    ConstraintMargin m{c.name, c.region, std::numeric_limits<double>::infinity(), 0};
    for (const Point& x : pts) {
      if (c.keep && !c.keep(x)) continue;
      m.worst = std::min(m.worst, c.expr(x));
      ++m.samples;
    }
    if (m.samples == 0) m.worst = 0.0;
    pass = pass && m.worst >= config.margin_floor;
    report->margins.push_back(std::move(m));
  }
  report->sampling_pass = pass;
}

std::function<double(const Point&)> Eval(Polynomial p) {
  return [p = std::move(p)](const Point& x) { return p.Evaluate(x); };
}

std::vector<PointCheck> MethodChecks(const Certificate& cert) {
  const PolyVector& f = cert.f;
  const double half_eps = 0.5 * cert.eps;
  const int n = cert.dimension;
  std::vector<PointCheck> out;
  switch (cert.method.kind) {
    case MethodKind::kPrajna: {
      const Polynomial& v = cert.Get("v");
      out.push_back({"-v >= 0", "initial", Eval(-v), nullptr});
      out.push_back({"-lie(v) - eps/2 >= 0", "outside-target",
                     Eval(-LieDerivative(v, f) - Polynomial(n, half_eps)), nullptr});
      out.push_back({"v - eps/2 >= 0", "boundary", Eval(v - Polynomial(n, half_eps)), nullptr});
      break;
    }
    case MethodKind::kExpGbf: {
      const Polynomial& v = cert.Get("v");
      out.push_back({"v - eps/2 >= 0", "initial", Eval(v - Polynomial(n, half_eps)), nullptr});
      out.push_back({"lie(v) - beta v >= 0", "outside-target",
                     Eval(LieDerivative(v, f) - cert.method.beta * v), nullptr});
      out.push_back({"-v >= 0", "boundary", Eval(-v), nullptr});
      break;
    }
    case MethodKind::kAsymGbf:
    case MethodKind::kGeneralGbf: {
      const Polynomial& v = cert.Get("v");
      Polynomial deriv = LieDerivative(v, f);
      std::string label = "lie(v) >= 0";
      if (cert.method.kind == MethodKind::kGeneralGbf) {
        deriv -= *cert.method.alpha_multiplier * v;
        label = "lie(v) - m v >= 0";
      }
      out.push_back({"v - eps/2 >= 0", "initial", Eval(v - Polynomial(n, half_eps)), nullptr});
      out.push_back({label, "outside-target", Eval(deriv), nullptr});
      out.push_back({"lie(w) - v >= 0", "outside-target",
                     Eval(LieDerivative(cert.Get("w"), f) - v), nullptr});
      out.push_back({"-v >= 0", "boundary", Eval(-v), nullptr});
      break;
    }
    case MethodKind::kCombined: {
      const Polynomial& v1 = cert.Get("v1");
      const Polynomial& v2 = cert.Get("v2");
      out.push_back({"v1 + v2 - eps/2 >= 0", "initial",
                     Eval(v1 + v2 - Polynomial(n, half_eps)), nullptr});
      out.push_back({"lie(v1) >= 0", "outside-target", Eval(LieDerivative(v1, f)), nullptr});
      out.push_back({"lie(w) - v1 >= 0", "outside-target",
                     Eval(LieDerivative(cert.Get("w"), f) - v1), nullptr});
      out.push_back({"lie(v2) - beta v2 >= 0", "outside-target",
                     Eval(LieDerivative(v2, f) - cert.method.beta * v2), nullptr});
      out.push_back({"-v1 >= 0", "boundary", Eval(-v1), nullptr});
      out.push_back({"-v2 >= 0", "boundary", Eval(-v2), nullptr});
      break;
    }
  }
  return out;
}

Polynomial TermValue(const IdentityTerm& term, const Certificate& cert) {
  switch (term.kind) {
    case IdentityTerm::Kind::kConstant: return term.factor;
    case IdentityTerm::Kind::kSymbol: return term.factor * cert.Get(term.symbol);
    case IdentityTerm::Kind::kLieOfSymbol:
      return term.factor * LieDerivative(cert.Get(term.symbol), cert.f);
  }
  return Polynomial(cert.dimension);
}

std::string Indexed(const std::string& base, const std::string& suffix) {
  return base + suffix;
}

}  // namespace

bool ValidationReport::Pass() const {
  if (!algebraic_checked && !sampling_checked) return false;
  return (!algebraic_checked || algebraic_pass) && (!sampling_checked || sampling_pass);
}

std::string ValidationReport::Summary() const {
  if (Pass()) {
    return sampling_checked
               ? "falsification-free at " + std::to_string(samples) + " samples"
               : "algebraic checks passed";
  }
  std::string out = "failed:";
  if (algebraic_checked && !algebraic_pass) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), " residual %.3g, min eigenvalue %.3g;",
                  identity_residual, min_gram_eigenvalue);
    out += buf;
  }
  for (const ConstraintMargin& m : margins) {
    if (sampling_checked && !sampling_pass && m.worst < 0) {
      char buf[160];
      std::snprintf(buf, sizeof(buf), " %s on %s margin %.3g;", m.name.c_str(),
                    m.region.c_str(), m.worst);
      out += buf;
    }
  }
  return out;
}

void ValidateAlgebraic(const Certificate& cert, const ValidationConfig& config,
                       ValidationReport* report) {
  report->algebraic_checked = true;
  report->identity_residual = 0.0;
  for (const SosIdentity& identity : cert.identities) {
    Polynomial residual(cert.dimension);
    for (const IdentityTerm& term : identity.terms) residual += TermValue(term, cert);
    const GramMatrix& g = cert.grams.at(identity.gram_symbol);
    residual -= g.ToPolynomial(cert.dimension);
    const double r = residual.max_abs_coefficient();
    report->identity_residuals[identity.name] = r;
    report->identity_residual = std::max(report->identity_residual, r);
  }
  double min_eig = std::numeric_limits<double>::infinity();
  for (const auto& [name, g] : cert.grams) {
    if (g.q.size() == 0) continue;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g.q, Eigen::EigenvaluesOnly);
    min_eig = std::min(min_eig, es.eigenvalues().minCoeff());
  }
  report->min_gram_eigenvalue = std::isfinite(min_eig) ? min_eig : 0.0;
  report->algebraic_pass = report->identity_residual <= config.residual_tolerance &&
                           report->min_gram_eigenvalue >= config.eigenvalue_floor;
}

void ValidateSampling(const Certificate& cert, const ProblemInstance& instance,
                      const ValidationConfig& config, ValidationReport* report) {
  RunChecks(MethodChecks(cert), DrawSamples(instance, config), config, report);
}

ValidationReport Validate(const Certificate& cert, const ProblemInstance& instance,
                          const ValidationConfig& config) {
  ValidationReport report;
  ValidateAlgebraic(cert, config, &report);
  ValidateSampling(cert, instance, config, &report);
  return report;
}

Certificate EmbedExpAsAsym(const Certificate& exp_cert) {
  if (exp_cert.method.kind != MethodKind::kExpGbf) {
    throw std::invalid_argument("embedding needs an exponential certificate");
  }
  const double beta = exp_cert.method.beta;
  const double inv = 1.0 / beta;
  Certificate out = exp_cert;
  out.method = Method::Asym();
  out.polynomials["w"] = exp_cert.Get("v") * inv;
  // lie(w) - v + (s1/beta) h - (s2/beta) g = (lie(v) - beta v + s1 h - s2 g) / beta.
  for (const SosIdentity& id : exp_cert.identities) {
    if (id.name.rfind("derivative", 0) != 0) continue;
    const std::string suffix = id.name.substr(std::string("derivative").size());
    SosIdentity coupling;
    coupling.name = Indexed("coupling", suffix);
    coupling.gram_symbol = "sigma:" + coupling.name;
    for (const IdentityTerm& t : id.terms) {
      if (t.kind == IdentityTerm::Kind::kLieOfSymbol) {
        coupling.terms.push_back({t.kind, "w", t.factor});
      } else if (t.symbol == "v") {
        coupling.terms.push_back({t.kind, "v", Polynomial(out.dimension, -1.0)});
      } else {
        const std::string scaled = (t.symbol.rfind("s1", 0) == 0 ? "s3" : "s4") +
                                   t.symbol.substr(2);
        out.polynomials[scaled] = exp_cert.Get(t.symbol) * inv;
        GramMatrix g = exp_cert.grams.at(t.symbol);
        g.q *= inv;
        out.grams[scaled] = std::move(g);
        coupling.terms.push_back({t.kind, scaled, t.factor});
      }
    }
    GramMatrix sigma = exp_cert.grams.at(id.gram_symbol);
    sigma.q *= inv;
    out.polynomials[coupling.gram_symbol] = sigma.ToPolynomial(out.dimension);
    out.grams[coupling.gram_symbol] = std::move(sigma);
    out.identities.push_back(std::move(coupling));
  }
  return out;
}

ValidationReport ValidateEmbedding(const Certificate& embedded,
                                   const ProblemInstance& instance,
                                   const ValidationConfig& config) {
  const PolyVector& f = embedded.f;
  const int n = embedded.dimension;
  const Polynomial& v = embedded.Get("v");
  const Polynomial& w = embedded.Get("w");
  std::vector<PointCheck> checks;
  checks.push_back({"v - eps/2 >= 0", "initial",
                    Eval(v - Polynomial(n, 0.5 * embedded.eps)), nullptr});
  checks.push_back({"lie(v) >= 0 where v >= 0", "outside-target", Eval(LieDerivative(v, f)),
                    [v](const Point& x) { return v.Evaluate(x) >= 0.0; }});
  checks.push_back({"lie(w) - v >= 0", "outside-target", Eval(LieDerivative(w, f) - v),
                    nullptr});
  checks.push_back({"-v >= 0", "boundary", Eval(-v), nullptr});
  ValidationReport report;
  ValidateAlgebraic(embedded, config, &report);
  RunChecks(checks, DrawSamples(instance, config), config, &report);
  return report;
}

Point LevelSet::GridPoint(int flat_index) const {
  Point x(dimension);
  for (int a = 0; a < dimension; ++a) {
    const int i = flat_index % resolution[a];
    flat_index /= resolution[a];
    const auto [lo, hi] = box.intervals[a];
    x[a] = lo + (hi - lo) * i / (resolution[a] - 1);
  }
  return x;
}

void LevelSet::WriteGridCsv(std::ostream& out) const {
  for (int a = 0; a < dimension; ++a) out << "x" << a + 1 << ",";
  out << "v\n";
  char buf[64];
  for (size_t k = 0; k < values.size(); ++k) {
    for (double c : GridPoint(static_cast<int>(k))) {
      std::snprintf(buf, sizeof(buf), "%.10g,", c);
      out << buf;
    }
    std::snprintf(buf, sizeof(buf), "%.10g\n", values[k]);
    out << buf;
  }
}

void LevelSet::WriteSegmentsCsv(std::ostream& out) const {
  out << "segment,x1,y1,x2,y2\n";
  char buf[160];
  for (size_t s = 0; s < segments.size(); ++s) {
    const Point& a = points[segments[s].first];
    const Point& b = points[segments[s].second];
    std::snprintf(buf, sizeof(buf), "%zu,%.10g,%.10g,%.10g,%.10g\n", s, a[0], a[1], b[0],
                  b[1]);
    out << buf;
  }
}

LevelSet ExtractLevelSet(const Polynomial& v, int resolution, const Box& box) {
  const int n = v.dimension();
  if (n < 2 || n > 3) throw std::invalid_argument("level-set export unsupported");
  if (resolution < 2) throw std::invalid_argument("grid resolution must be >= 2");
  box.Validate();
  if (box.dimension() != n) throw std::invalid_argument("box dimension mismatch");
  LevelSet ls;
  ls.dimension = n;
  ls.resolution.assign(n, resolution);
  ls.box = box;
  int total = 1;
  for (int a = 0; a < n; ++a) total *= resolution;
  ls.values.resize(total);
  for (int k = 0; k < total; ++k) ls.values[k] = v.Evaluate(ls.GridPoint(k));
  if (n == 3) return ls;

  const int r = resolution;
  auto at = [&](int i, int j) { return ls.values[i + r * j]; };
  // Edge ids: horizontal edge (i,j)-(i+1,j) -> i + (r-1) j; vertical edges follow.
  std::map<int, int> point_of_edge;
  auto crossing = [&](int i0, int j0, int i1, int j1, int edge_id) -> int {
    auto it = point_of_edge.find(edge_id);
    if (it != point_of_edge.end()) return it->second;
    const double a = at(i0, j0), b = at(i1, j1);
    const double t = a / (a - b);
    const Point pa = ls.GridPoint(i0 + r * j0), pb = ls.GridPoint(i1 + r * j1);
    ls.points.push_back({pa[0] + t * (pb[0] - pa[0]), pa[1] + t * (pb[1] - pa[1])});
    const int id = static_cast<int>(ls.points.size()) - 1;
    point_of_edge.emplace(edge_id, id);
    return id;
  };
  const int vertical_base = (r - 1) * r;
  for (int j = 0; j + 1 < r; ++j) {
    for (int i = 0; i + 1 < r; ++i) {
      const double c[4] = {at(i, j), at(i + 1, j), at(i + 1, j + 1), at(i, j + 1)};
      auto neg = [](double x) { return x < 0.0; };
      // Edges in order bottom, right, top, left; -1 when no sign change.
      int e[4] = {-1, -1, -1, -1};
      if (neg(c[0]) != neg(c[1])) e[0] = crossing(i, j, i + 1, j, i + (r - 1) * j);
      if (neg(c[1]) != neg(c[2]))
        e[1] = crossing(i + 1, j, i + 1, j + 1, vertical_base + (i + 1) + r * j);
      if (neg(c[3]) != neg(c[2]))
        e[2] = crossing(i, j + 1, i + 1, j + 1, i + (r - 1) * (j + 1));
      if (neg(c[0]) != neg(c[3])) e[3] = crossing(i, j, i, j + 1, vertical_base + i + r * j);
      std::vector<int> hits;
      for (int k : e)
        if (k >= 0) hits.push_back(k);
      if (hits.size() == 2) {
        ls.segments.push_back({hits[0], hits[1]});
      } else if (hits.size() == 4) {
        const double center = 0.25 * (c[0] + c[1] + c[2] + c[3]);
        if (neg(center) == neg(c[0])) {
          ls.segments.push_back({e[0], e[1]});
          ls.segments.push_back({e[2], e[3]});
        } else {
          ls.segments.push_back({e[0], e[3]});
          ls.segments.push_back({e[1], e[2]});
        }
      }
    }
  }
  return ls;
}

nlohmann::json ToJson(const ValidationReport& report) {
  nlohmann::json j;
  if (report.algebraic_checked) {
    j["algebraic"] = {{"identity_residual", report.identity_residual},
                      {"identity_residuals", report.identity_residuals},
                      {"min_gram_eigenvalue", report.min_gram_eigenvalue},
                      {"pass", report.algebraic_pass}};
  }
  if (report.sampling_checked) {
    nlohmann::json margins = nlohmann::json::array();
    for (const ConstraintMargin& m : report.margins) {
      margins.push_back({{"constraint", m.name},
                         {"region", m.region},
                         {"worst_margin", m.worst},
                         {"samples", m.samples}});
    }
    j["sampling"] = {{"margins", margins},
                     {"samples_per_constraint", report.samples},
                     {"seed", report.seed},
                     {"pass", report.sampling_pass}};
  }
  j["pass"] = report.Pass();
  j["summary"] = report.Summary();
  return j;
}

}  // namespace reachavoid
