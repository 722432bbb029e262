#pragma once

#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "reachavoid/method.h"
#include "reachavoid/poly.h"
#include "reachavoid/sdp.h"
#include "reachavoid/semialg.h"

namespace reachavoid {

/// One summand of an identity. The identity asserts that the sum of its terms
/// is a sum of squares.
struct IdentityTerm {
  enum class Kind {
    kConstant,     // factor
    kSymbol,       // factor * symbol
    kLieOfSymbol,  // factor * (grad symbol . f)
  };
  Kind kind = Kind::kConstant;
  std::string symbol;
  Polynomial factor;
};

/// sum(terms) == z^T Q z with Q = the Gram matrix named gram_symbol.
struct SosIdentity {
  std::string name;
  std::vector<IdentityTerm> terms;
  std::string gram_symbol;
};

/// Where each decision object lives in the SDP variable vector.
struct SymbolInfo {
  enum class Kind { kFree, kGram };
  Kind kind = Kind::kFree;
  /// Coefficient monomials (free) or half-degree Gram basis z (gram).
  std::vector<Monomial> basis;
  /// Free: index of the first coefficient among the free variables.
  /// Gram: PSD block index.
  int index = 0;
  /// Offset of the slice in the global variable vector.
  int offset = 0;
  int length = 0;
};

struct SymbolTable {
  std::map<std::string, SymbolInfo> symbols;
  /// Declaration order, used for deterministic output.
  std::vector<std::string> order;
  int num_variables = 0;

  const SymbolInfo& at(const std::string& name) const;
  bool contains(const std::string& name) const { return symbols.count(name) > 0; }
};

struct BuildOptions {
  /// Strictness margin placed exactly where each encoding puts it.
  double eps = 1e-6;
  /// Combined method: use separate boundary multipliers p1, p2 instead of a
  /// shared p.
  bool split_boundary_multiplier = false;
  /// Maximize the integral of v over the bounding box, with v <= 1 on the
  /// closure of the safe set added to keep the program bounded.
  bool volume_objective = false;
};

/// A compiled SOS program: the identity list, symbol table and SDP.
struct SosProgram {
  int dimension = 0;
  PolyVector f;
  Method method;
  int degree = 0;
  BuildOptions options;
  std::vector<SosIdentity> identities;
  SymbolTable symbols;
  SdpProblem sdp;
};

/// Compiles the reach-avoid constraints of `method` at the given even degree.
/// Throws std::invalid_argument for an odd or too small degree, an invalid
/// method, or an alpha template that is negative somewhere on the closure of
/// the safe set.
SosProgram BuildProgram(const ProblemInstance& instance, const Method& method,
                        int degree, const BuildOptions& options = {});

/// One coefficient-matching equation of an identity:
///   sum coeffs[i].second * x[coeffs[i].first] = rhs
/// over the global variable vector (svec coordinates for Gram blocks).
struct ExpandedRow {
  Monomial monomial;
  std::vector<std::pair<int, double>> coeffs;
  double rhs = 0.0;
};

/// Coefficient matching of z^T Q z against the identity's terms, for every
/// monomial up to the degree covered by the identity's Gram basis.
std::vector<ExpandedRow> ExpandIdentity(const SosIdentity& identity,
                                        const SymbolTable& symbols,
                                        const PolyVector& f);

struct GramMatrix {
  std::vector<Monomial> basis;
  Eigen::MatrixXd q;

  Polynomial ToPolynomial(int dimension) const;
};

struct SolverStats {
  std::string status;
  std::string backend;
  int iterations = 0;
  double wall_seconds = 0.0;
  double primal_residual = 0.0;
};

/// Solved decision polynomials with the data needed to re-check them.
struct Certificate {
  Method method;
  int degree = 0;
  double eps = 0.0;
  int dimension = 0;
  PolyVector f;
  std::vector<SosIdentity> identities;
  /// Every decision polynomial by name (free ones and z^T Q z of Gram ones).
  std::map<std::string, Polynomial> polynomials;
  std::map<std::string, GramMatrix> grams;
  SolverStats solver;

  bool Has(const std::string& name) const { return polynomials.count(name) > 0; }
  /// Throws std::out_of_range for an unknown name.
  const Polynomial& Get(const std::string& name) const;
  /// The function whose positive set is the certified region: v, or v1 + v2
  /// for the combined method.
  Polynomial Barrier() const;
};

/// Maps a solver primal vector back to named polynomials and Gram matrices.
/// Throws std::invalid_argument on a length mismatch.
Certificate Reconstruct(const SosProgram& program, const Eigen::VectorXd& solution);

}  // namespace reachavoid
