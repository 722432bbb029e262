#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "reachavoid/semialg.h"
#include "reachavoid/sosbuild.h"

namespace reachavoid {

struct ValidationConfig {
  double residual_tolerance = 1e-6;
  double eigenvalue_floor = -1e-7;
  double margin_floor = -1e-6;
  /// Samples per quantified constraint.
  int samples = 10000;
  std::uint64_t seed = 1;
};

/// Worst signed slack of one quantified inequality over its sample set.
struct ConstraintMargin {
  std::string name;
  std::string region;  // "initial", "outside-target", "boundary"
  double worst = 0.0;
  int samples = 0;
};

struct ValidationReport {
  double identity_residual = 0.0;
  std::map<std::string, double> identity_residuals;
  double min_gram_eigenvalue = 0.0;
  bool algebraic_checked = false;
  bool algebraic_pass = false;

  std::vector<ConstraintMargin> margins;
  bool sampling_checked = false;
  bool sampling_pass = false;
  int samples = 0;
  std::uint64_t seed = 0;

  /// Every performed check within tolerance.
  bool Pass() const;
  /// "falsification-free at N samples" or a failure summary.
  std::string Summary() const;
};

/// Re-expands every identity with polynomial arithmetic and subtracts
/// z^T Q z; records the worst coefficient and the smallest Gram eigenvalue.
void ValidateAlgebraic(const Certificate& cert, const ValidationConfig& config,
                       ValidationReport* report);

/// Samples X0, the closure of X minus Xr, and the boundary of X, and checks
/// the method's pointwise inequalities there. Sampling errors propagate.
void ValidateSampling(const Certificate& cert, const ProblemInstance& instance,
                      const ValidationConfig& config, ValidationReport* report);

ValidationReport Validate(const Certificate& cert, const ProblemInstance& instance,
                          const ValidationConfig& config = {});

/// Builds an asymptotic certificate from an exponential one with w := v / beta.
/// The coupling identity is carried over exactly with multipliers scaled by
/// 1 / beta; the other identities are copied.
Certificate EmbedExpAsAsym(const Certificate& exp_cert);

/// Samples the asymptotic inequality set for an embedded certificate. The
/// flow-monotonicity inequality is checked on the closure of {v > 0} minus Xr,
/// which is where the exponential condition implies it.
ValidationReport ValidateEmbedding(const Certificate& embedded,
                                   const ProblemInstance& instance,
                                   const ValidationConfig& config = {});

/// Samples of v on a regular grid plus its zero level set.
struct LevelSet {
  int dimension = 0;
  std::vector<int> resolution;
  Box box;
  /// Row-major over axes (x1 fastest), size = prod(resolution).
  std::vector<double> values;
  /// 2-D: zero-crossing points on grid edges and segments between them.
  std::vector<Point> points;
  std::vector<std::pair<int, int>> segments;

  Point GridPoint(int flat_index) const;
  /// CSV with header "x1,...,xn,v".
  void WriteGridCsv(std::ostream& out) const;
  /// CSV with header "segment,x1,y1,x2,y2" (2-D only).
  void WriteSegmentsCsv(std::ostream& out) const;
};

/// Dense evaluation of v on the box with marching squares in 2-D.
/// Throws std::invalid_argument for dimension > 3 ("level-set export
/// unsupported") or resolution < 2.
LevelSet ExtractLevelSet(const Polynomial& v, int resolution, const Box& box);

nlohmann::json ToJson(const ValidationReport& report);

}  // namespace reachavoid
