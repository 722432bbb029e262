#pragma once

#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "reachavoid/poly.h"

namespace reachavoid {

/// Boundary band used by membership and boundary sampling.
inline constexpr double kBoundaryTolerance = 1e-9;
inline constexpr int kBisectionDepth = 60;

using Point = std::vector<double>;

/// Axis-aligned box, one [lo, hi] interval per coordinate.
struct Box {
  std::vector<std::pair<double, double>> intervals;

  int dimension() const { return static_cast<int>(intervals.size()); }
  /// Throws std::invalid_argument unless every interval is finite with lo < hi.
  void Validate() const;
};

enum class Membership { kInside, kBoundary, kOutside };

/// {x | p(x) < 0 for every p in constraints}.
struct BasicOpenSet {
  std::vector<Polynomial> constraints;

  int dimension() const;
  void Validate() const;
  /// max_j p_j(x); negative iff x is strictly inside.
  double MaxConstraint(std::span<const double> x) const;
};

/// {x | h(x) < 0}, with boundary {h = 0}.
struct SafeSet {
  Polynomial h;
  int dimension() const { return h.dimension(); }
};

/// The reach-avoid problem data: dynamics plus the safe, initial and target
/// sets. Containment of the initial and target sets in the safe set is not
/// enforced here.
struct ProblemInstance {
  std::string name;
  int dimension = 0;
  PolyVector f;
  SafeSet safe;
  BasicOpenSet initial;
  BasicOpenSet target;
  Box bounding_box;
  /// Optional tighter sampling boxes; empty means use bounding_box.
  Box initial_box;
  Box target_box;

  /// Throws std::invalid_argument when components disagree on dimension.
  void Validate() const;
  const Box& InitialSamplingBox() const {
    return initial_box.intervals.empty() ? bounding_box : initial_box;
  }
  const Box& TargetSamplingBox() const {
    return target_box.intervals.empty() ? bounding_box : target_box;
  }
};

class SamplingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Membership Classify(const BasicOpenSet& set, std::span<const double> x,
                    double tolerance = kBoundaryTolerance);
Membership Classify(const SafeSet& set, std::span<const double> x,
                    double tolerance = kBoundaryTolerance);

struct SampleResult {
  std::vector<Point> points;
  std::int64_t draws = 0;
  double acceptance_rate = 0.0;
};

/// Rejection sampling of strict-interior points. Throws SamplingError when the
/// acceptance rate stays below 1e-4 after the minimum work budget.
SampleResult Sample(const BasicOpenSet& set, int count, const Box& box,
                    std::uint64_t seed);
SampleResult Sample(const SafeSet& set, int count, const Box& box,
                    std::uint64_t seed);

/// Points with |h| <= kBoundaryTolerance, found by bisecting segments between
/// box samples on opposite sides of {h = 0}. Throws SamplingError when no sign
/// change is found in the box.
std::vector<Point> SampleBoundary(const SafeSet& set, int count, const Box& box,
                                  std::uint64_t seed);

}  // namespace reachavoid
