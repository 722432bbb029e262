#include "reachavoid/sosbuild.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace reachavoid {
namespace {

constexpr double kAlphaSampleMargin = -1e-9;
constexpr int kAlphaSamples = 10000;
constexpr std::uint64_t kAlphaSeed = 0x5eed;

int RoundUpEven(int k) { return k + (k & 1); }

int MaxBasisDegree(const std::vector<Monomial>& basis) {
  int d = 0;
  for (const Monomial& m : basis) d = std::max(d, m.degree());
  return d;
}

// Product monomials z_p z_q of a Gram basis and the group of each svec entry.
struct GramLayout {
  std::vector<Monomial> products;
  std::vector<int> entry_group;
  std::vector<std::vector<int>> group_entries;
};

GramLayout MakeLayout(const std::vector<Monomial>& basis) {
  const int n = static_cast<int>(basis.size());
  std::map<Monomial, int> ids;
  for (int p = 0; p < n; ++p)
    for (int q = p; q < n; ++q) ids.emplace(basis[p] * basis[q], 0);
  GramLayout out;
  for (auto& [m, id] : ids) {
    id = static_cast<int>(out.products.size());
    out.products.push_back(m);
  }
  out.entry_group.resize(SvecSize(n));
  out.group_entries.resize(out.products.size());
  for (int p = 0; p < n; ++p) {
    for (int q = p; q < n; ++q) {
      const int e = SvecIndex(n, p, q);
      const int g = ids.at(basis[p] * basis[q]);
      out.entry_group[e] = g;
      out.group_entries[g].push_back(e);
    }
  }
  return out;
}

// Rows of one identity in grouped form. Sign convention:
//   sigma - sum(variable terms) = sum(constant terms).
struct AssembledRow {
  Monomial monomial;
  std::map<std::pair<int, int>, double> gram;  // (block, group) -> coef
  std::map<int, double> free;                  // free index -> coef
  double rhs = 0.0;
};

std::vector<AssembledRow> AssembleIdentity(const SosIdentity& identity,
                                           const SymbolTable& symbols,
                                           const PolyVector& f, int dimension) {
  const SymbolInfo& sigma = symbols.at(identity.gram_symbol);
  if (sigma.kind != SymbolInfo::Kind::kGram) {
    throw std::invalid_argument("identity Gram symbol is not a Gram block");
  }
  const int top = 2 * MaxBasisDegree(sigma.basis);
  std::vector<AssembledRow> rows;
  std::map<Monomial, int> row_of;
  for (const Monomial& m : MonomialBasis(dimension, top)) {
    row_of.emplace(m, static_cast<int>(rows.size()));
    rows.push_back({m, {}, {}, 0.0});
  }
  auto row = [&](const Monomial& m) -> AssembledRow& {
    auto it = row_of.find(m);
    if (it == row_of.end()) {
      throw std::logic_error("term of identity '" + identity.name +
                             "' exceeds its Gram degree");
    }
    return rows[it->second];
  };

  for (const IdentityTerm& term : identity.terms) {
    if (term.kind == IdentityTerm::Kind::kConstant) {
      for (const auto& [m, c] : term.factor.terms()) row(m).rhs += c;
      continue;
    }
    const SymbolInfo& sym = symbols.at(term.symbol);
    if (sym.kind == SymbolInfo::Kind::kFree) {
      for (size_t k = 0; k < sym.basis.size(); ++k) {
        const Polynomial base(sym.basis[k]);
        const Polynomial contrib =
            term.kind == IdentityTerm::Kind::kSymbol
                ? term.factor * base
                : term.factor * LieDerivative(base, f);
        for (const auto& [m, c] : contrib.terms()) {
          row(m).free[sym.index + static_cast<int>(k)] -= c;
        }
      }
    } else {
      if (term.kind == IdentityTerm::Kind::kLieOfSymbol) {
        throw std::invalid_argument("Lie derivative of a Gram symbol is not supported");
      }
      const GramLayout layout = MakeLayout(sym.basis);
      for (size_t g = 0; g < layout.products.size(); ++g) {
        const Polynomial contrib = term.factor * Polynomial(layout.products[g]);
        for (const auto& [m, c] : contrib.terms()) {
          row(m).gram[{sym.index, static_cast<int>(g)}] -= c;
        }
      }
    }
  }
  const GramLayout layout = MakeLayout(sigma.basis);
  for (size_t g = 0; g < layout.products.size(); ++g) {
    row(layout.products[g]).gram[{sigma.index, static_cast<int>(g)}] += 1.0;
  }
  return rows;
}

double BoxIntegral(const Monomial& m, const Box& box) {
  double value = 1.0;
  for (int i = 0; i < m.dimension(); ++i) {
    const auto [lo, hi] = box.intervals[i];
    const int a = m.exponent(i) + 1;
    value *= (std::pow(hi, a) - std::pow(lo, a)) / a;
  }
  return value;
}

void CheckAlphaTemplate(const Polynomial& m, const ProblemInstance& instance) {
  const Box& box = instance.bounding_box;
  std::vector<Point> pts =
      Sample(instance.safe, kAlphaSamples / 2, box, kAlphaSeed).points;
  std::vector<Point> edge =
      SampleBoundary(instance.safe, kAlphaSamples / 2, box, kAlphaSeed + 1);
  pts.insert(pts.end(), edge.begin(), edge.end());
  for (const Point& x : pts) {
    if (m.Evaluate(x) < kAlphaSampleMargin) {
      throw std::invalid_argument(
          "multiplier template m is negative on the closure of the safe set");
    }
  }
}

class ProgramBuilder {
 public:
  ProgramBuilder(const ProblemInstance& instance, int degree)
      : n_(instance.dimension), d_(degree), f_(instance.f) {
    for (const Polynomial& fi : f_) deg_f_ = std::max(deg_f_, fi.degree());
  }

  void DeclareFree(const std::string& name) {
    if (table_.contains(name)) return;
    SymbolInfo info;
    info.kind = SymbolInfo::Kind::kFree;
    info.basis = MonomialBasis(n_, d_);
    info.index = num_free_;
    info.length = static_cast<int>(info.basis.size());
    num_free_ += info.length;
    Insert(name, std::move(info));
  }

  // The identity sum(fixed) + sum(mult_k * factor_k) in Sigma, where each
  // mult_k is a fresh SOS multiplier.
  void AddIdentity(const std::string& name, std::vector<IdentityTerm> fixed,
                   const std::vector<std::pair<std::string, Polynomial>>& multipliers) {
    int top = 0;
    for (const IdentityTerm& t : fixed) top = std::max(top, TermDegree(t));
    for (const auto& [mult, factor] : multipliers) {
      if ((d_ + factor.degree()) % 2 == 0) top = std::max(top, d_ + factor.degree());
    }
    top = RoundUpEven(top);
    SosIdentity identity;
    identity.name = name;
    identity.terms = std::move(fixed);
    for (const auto& [mult, factor] : multipliers) {
      const int k = factor.degree();
      int g = std::min(d_ / 2, (top - k) / 2);
      g = std::max(g, 0);
      top = std::max(top, RoundUpEven(k + 2 * g));
      DeclareGram(mult, g);
      identity.terms.push_back({IdentityTerm::Kind::kSymbol, mult, factor});
    }
    identity.gram_symbol = "sigma:" + name;
    DeclareGram(identity.gram_symbol, top / 2);
    identities_.push_back(std::move(identity));
  }

  IdentityTerm Sym(const std::string& name, double c = 1.0) const {
    return {IdentityTerm::Kind::kSymbol, name, Polynomial(n_, c)};
  }
  IdentityTerm Sym(const std::string& name, const Polynomial& factor) const {
    return {IdentityTerm::Kind::kSymbol, name, factor};
  }
  IdentityTerm Lie(const std::string& name, double c = 1.0) const {
    return {IdentityTerm::Kind::kLieOfSymbol, name, Polynomial(n_, c)};
  }
  IdentityTerm Const(double c) const {
    return {IdentityTerm::Kind::kConstant, "", Polynomial(n_, c)};
  }

  SosProgram Finish(const ProblemInstance& instance, const Method& method,
                    const BuildOptions& options) {
    SosProgram prog;
    prog.dimension = n_;
    prog.f = f_;
    prog.method = method;
    prog.degree = d_;
    prog.options = options;

    SdpProblem& sdp = prog.sdp;
    std::vector<GramLayout> layouts;
    for (const std::string& name : table_.order) {
      const SymbolInfo& info = table_.symbols.at(name);
      if (info.kind != SymbolInfo::Kind::kGram) continue;
      GramLayout layout = MakeLayout(info.basis);
      PsdBlock block;
      block.dim = static_cast<int>(info.basis.size());
      block.num_groups = static_cast<int>(layout.products.size());
      block.entry_group = layout.entry_group;
      sdp.blocks.push_back(std::move(block));
    }
    sdp.num_free = num_free_;
    sdp.block_rows.assign(sdp.blocks.size(), {});
    std::vector<double> rhs;
    for (const SosIdentity& identity : identities_) {
      for (const AssembledRow& r : AssembleIdentity(identity, table_, f_, n_)) {
        const int row = static_cast<int>(rhs.size());
        for (const auto& [key, c] : r.gram) {
          if (std::abs(c) > kZeroThreshold) sdp.block_rows[key.first].push_back({row, key.second, c});
        }
        for (const auto& [j, c] : r.free) {
          if (std::abs(c) > kZeroThreshold) sdp.free_rows.push_back({row, j, c});
        }
        rhs.push_back(r.rhs);
      }
    }
    sdp.num_rows = static_cast<int>(rhs.size());
    sdp.b = Eigen::Map<const Eigen::VectorXd>(rhs.data(), rhs.size());

    // Global offsets: svec blocks first, then free variables.
    for (auto& [name, info] : table_.symbols) {
      if (info.kind == SymbolInfo::Kind::kGram) {
        info.offset = sdp.BlockOffset(info.index);
        info.length = SvecSize(static_cast<int>(info.basis.size()));
      } else {
        info.offset = sdp.FreeOffset() + info.index;
      }
    }
    table_.num_variables = sdp.NumVariables();

    if (options.volume_objective) {
      sdp.free_objective = Eigen::VectorXd::Zero(num_free_);
      const Box& box = instance.bounding_box;
      double volume = 1.0;
      for (const auto& [lo, hi] : box.intervals) volume *= hi - lo;
      const std::vector<std::string> parts =
          method.kind == MethodKind::kCombined ? std::vector<std::string>{"v1", "v2"}
                                               : std::vector<std::string>{"v"};
      for (const std::string& part : parts) {
        const SymbolInfo& info = table_.at(part);
        for (size_t k = 0; k < info.basis.size(); ++k) {
          sdp.free_objective(info.index + k) -= BoxIntegral(info.basis[k], box) / volume;
        }
      }
    }
    sdp.Validate();
    prog.identities = std::move(identities_);
    prog.symbols = std::move(table_);
    return prog;
  }

 private:
  int TermDegree(const IdentityTerm& t) const {
    switch (t.kind) {
      case IdentityTerm::Kind::kConstant: return t.factor.degree();
      case IdentityTerm::Kind::kSymbol: return t.factor.degree() + d_;
      case IdentityTerm::Kind::kLieOfSymbol:
        return t.factor.degree() + std::max(0, d_ + deg_f_ - 1);
    }
    return 0;
  }

  void DeclareGram(const std::string& name, int half_degree) {
    if (table_.contains(name)) throw std::logic_error("duplicate symbol " + name);
    SymbolInfo info;
    info.kind = SymbolInfo::Kind::kGram;
    info.basis = MonomialBasis(n_, half_degree);
    info.index = num_blocks_++;
    Insert(name, std::move(info));
  }

  void Insert(const std::string& name, SymbolInfo info) {
    table_.symbols.emplace(name, std::move(info));
    table_.order.push_back(name);
  }

  int n_;
  int d_;
  PolyVector f_;
  int deg_f_ = 0;
  int num_free_ = 0;
  int num_blocks_ = 0;
  SymbolTable table_;
  std::vector<SosIdentity> identities_;
};

std::string Indexed(const std::string& base, size_t i) {
  return base + "[" + std::to_string(i + 1) + "]";
}

}  // namespace

const SymbolInfo& SymbolTable::at(const std::string& name) const {
  auto it = symbols.find(name);
  if (it == symbols.end()) throw std::out_of_range("unknown symbol " + name);
  return it->second;
}

SosProgram BuildProgram(const ProblemInstance& instance, const Method& method,
                        int degree, const BuildOptions& options) {
  instance.Validate();
  method.Validate();
  if (degree < 2 || degree % 2 != 0) {
    throw std::invalid_argument("degree must be even and >= 2, got " +
                                std::to_string(degree));
  }
  if (!(options.eps > 0.0) || !std::isfinite(options.eps)) {
    throw std::invalid_argument("eps must be positive");
  }
  const int n = instance.dimension;
  if (method.kind == MethodKind::kGeneralGbf) {
    if (method.alpha_multiplier->dimension() != n) {
      throw std::invalid_argument("multiplier template dimension mismatch");
    }
    CheckAlphaTemplate(*method.alpha_multiplier, instance);
  }
  const double eps = options.eps;
  const Polynomial& h = instance.safe.h;
  const auto& ls = instance.initial.constraints;
  const auto& gs = instance.target.constraints;

  ProgramBuilder b(instance, degree);
  using Multipliers = std::vector<std::pair<std::string, Polynomial>>;
  auto initial_multipliers = [&]() {
    Multipliers m;
    for (size_t i = 0; i < ls.size(); ++i) m.push_back({Indexed("s0", i), ls[i]});
    return m;
  };
  // Multipliers localizing an identity to {h <= 0, g_j >= 0}.
  auto outside_target = [&](const std::string& a, const std::string& c, size_t j) {
    return Multipliers{{Indexed(a, j), h}, {Indexed(c, j), -gs[j]}};
  };

  switch (method.kind) {
    case MethodKind::kPrajna: {
      b.DeclareFree("v");
      b.DeclareFree("q");
      b.AddIdentity("initial", {b.Sym("v", -1.0)}, initial_multipliers());
      for (size_t j = 0; j < gs.size(); ++j) {
        b.AddIdentity(Indexed("derivative", j), {b.Lie("v", -1.0), b.Const(-eps)},
                      outside_target("s1", "s2", j));
      }
      b.AddIdentity("boundary", {b.Sym("v"), b.Const(-eps), b.Sym("q", -h)}, {});
      break;
    }
    case MethodKind::kExpGbf: {
      b.DeclareFree("v");
      b.DeclareFree("p");
      b.AddIdentity("initial", {b.Sym("v"), b.Const(-eps)}, initial_multipliers());
      for (size_t j = 0; j < gs.size(); ++j) {
        b.AddIdentity(Indexed("derivative", j), {b.Lie("v"), b.Sym("v", -method.beta)},
                      outside_target("s1", "s2", j));
      }
      b.AddIdentity("boundary", {b.Sym("v", -1.0), b.Sym("p", -h)}, {});
      break;
    }
    case MethodKind::kAsymGbf:
    case MethodKind::kGeneralGbf: {
      b.DeclareFree("v");
      b.DeclareFree("w");
      b.DeclareFree("p");
      b.AddIdentity("initial", {b.Sym("v"), b.Const(-eps)}, initial_multipliers());
      for (size_t j = 0; j < gs.size(); ++j) {
        std::vector<IdentityTerm> terms = {b.Lie("v")};
        if (method.kind == MethodKind::kGeneralGbf) {
          terms.push_back(b.Sym("v", -*method.alpha_multiplier));
        }
        b.AddIdentity(Indexed("derivative", j), std::move(terms),
                      outside_target("s1", "s2", j));
      }
      for (size_t j = 0; j < gs.size(); ++j) {
        b.AddIdentity(Indexed("coupling", j), {b.Lie("w"), b.Sym("v", -1.0)},
                      outside_target("s3", "s4", j));
      }
      b.AddIdentity("boundary", {b.Sym("v", -1.0), b.Sym("p", -h)}, {});
      break;
    }
    case MethodKind::kCombined: {
      const bool split = options.split_boundary_multiplier;
      b.DeclareFree("v1");
      b.DeclareFree("v2");
      b.DeclareFree("w");
      b.DeclareFree(split ? "p1" : "p");
      if (split) b.DeclareFree("p2");
      b.AddIdentity("initial", {b.Sym("v1"), b.Sym("v2"), b.Const(-eps)},
                    initial_multipliers());
      for (size_t j = 0; j < gs.size(); ++j) {
        b.AddIdentity(Indexed("derivative1", j), {b.Lie("v1")},
                      outside_target("s1", "s2", j));
      }
      for (size_t j = 0; j < gs.size(); ++j) {
        b.AddIdentity(Indexed("coupling", j), {b.Lie("w"), b.Sym("v1", -1.0)},
                      outside_target("s3", "s4", j));
      }
      for (size_t j = 0; j < gs.size(); ++j) {
        b.AddIdentity(Indexed("derivative2", j), {b.Lie("v2"), b.Sym("v2", -method.beta)},
                      outside_target("s5", "s6", j));
      }
      b.AddIdentity("boundary1", {b.Sym("v1", -1.0), b.Sym(split ? "p1" : "p", -h)}, {});
      b.AddIdentity("boundary2", {b.Sym("v2", -1.0), b.Sym(split ? "p2" : "p", -h)}, {});
      break;
    }
  }

  if (options.volume_objective) {
    std::vector<IdentityTerm> terms = {b.Const(1.0)};
    if (method.kind == MethodKind::kCombined) {
      terms.push_back(b.Sym("v1", -1.0));
      terms.push_back(b.Sym("v2", -1.0));
    } else {
      terms.push_back(b.Sym("v", -1.0));
    }
    b.AddIdentity("normalization", std::move(terms), {{"s_norm", h}});
  }
  return b.Finish(instance, method, options);
}

std::vector<ExpandedRow> ExpandIdentity(const SosIdentity& identity,
                                        const SymbolTable& symbols,
                                        const PolyVector& f) {
  const SymbolInfo& sigma = symbols.at(identity.gram_symbol);
  if (sigma.basis.empty()) throw std::invalid_argument("empty Gram basis");
  const int n = sigma.basis.front().dimension();
  // Block index -> symbol, for mapping groups back to svec coordinates.
  std::map<int, const SymbolInfo*> by_block;
  for (const auto& [name, info] : symbols.symbols) {
    if (info.kind == SymbolInfo::Kind::kGram) by_block[info.index] = &info;
  }
  std::map<int, GramLayout> layouts;
  std::vector<ExpandedRow> out;
  for (const AssembledRow& r : AssembleIdentity(identity, symbols, f, n)) {
    ExpandedRow row{r.monomial, {}, r.rhs};
    for (const auto& [key, c] : r.gram) {
      const SymbolInfo& info = *by_block.at(key.first);
      auto it = layouts.find(key.first);
      if (it == layouts.end()) it = layouts.emplace(key.first, MakeLayout(info.basis)).first;
      const int dim = static_cast<int>(info.basis.size());
      for (int e : it->second.group_entries[key.second]) {
        // Diagonal entries appear once; off-diagonal ones twice, each
        // sqrt(2)-scaled in svec.
        bool diagonal = false;
        for (int p = 0; p < dim; ++p) diagonal |= SvecIndex(dim, p, p) == e;
        row.coeffs.push_back({info.offset + e, diagonal ? c : c * std::sqrt(2.0)});
      }
    }
    for (const auto& [j, c] : r.free) {
      // Free symbol offsets are global; r.free holds the free-part index.
      int base = 0;
      for (const auto& [name, info] : symbols.symbols) {
        if (info.kind == SymbolInfo::Kind::kFree && j >= info.index &&
            j < info.index + info.length) {
          base = info.offset - info.index;
        }
      }
      row.coeffs.push_back({base + j, c});
    }
    std::sort(row.coeffs.begin(), row.coeffs.end());
    out.push_back(std::move(row));
  }
  return out;
}

Polynomial GramMatrix::ToPolynomial(int dimension) const {
  Polynomial out(dimension);
  const int n = static_cast<int>(basis.size());
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) out.AddTerm(basis[i] * basis[j], q(i, j));
  }
  return out;
}

const Polynomial& Certificate::Get(const std::string& name) const {
  auto it = polynomials.find(name);
  if (it == polynomials.end()) throw std::out_of_range("certificate has no " + name);
  return it->second;
}

Polynomial Certificate::Barrier() const {
  if (method.kind == MethodKind::kCombined) return Get("v1") + Get("v2");
  return Get("v");
}

Certificate Reconstruct(const SosProgram& program, const Eigen::VectorXd& solution) {
  if (solution.size() != program.symbols.num_variables) {
    throw std::invalid_argument("solution length " + std::to_string(solution.size()) +
                                " does not match " +
                                std::to_string(program.symbols.num_variables));
  }
  Certificate cert;
  cert.method = program.method;
  cert.degree = program.degree;
  cert.eps = program.options.eps;
  cert.dimension = program.dimension;
  cert.f = program.f;
  cert.identities = program.identities;
  const int n = program.dimension;
  for (const std::string& name : program.symbols.order) {
    const SymbolInfo& info = program.symbols.at(name);
    if (info.kind == SymbolInfo::Kind::kFree) {
      Polynomial p(n);
      for (int k = 0; k < info.length; ++k) p.AddTerm(info.basis[k], solution(info.offset + k));
      cert.polynomials.emplace(name, std::move(p));
    } else {
      GramMatrix g;
      g.basis = info.basis;
      g.q = Smat(solution.segment(info.offset, info.length),
                 static_cast<int>(info.basis.size()));
      cert.polynomials.emplace(name, g.ToPolynomial(n));
      cert.grams.emplace(name, std::move(g));
    }
  }
  if (program.method.kind == MethodKind::kCombined) {
    cert.polynomials["v"] = cert.Get("v1") + cert.Get("v2");
  }
  return cert;
}

}  // namespace reachavoid
