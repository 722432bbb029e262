#pragma once

#include <optional>
#include <string>
#include <vector>

#include "reachavoid/method.h"
#include "reachavoid/semialg.h"

namespace reachavoid {

/// illu1, illu4, vdp, tan1, tan2, dubins.
const std::vector<std::string>& SuiteNames();

/// Built-in benchmark instance. Throws std::invalid_argument for an unknown
/// suite name.
ProblemInstance FixtureInstance(const std::string& suite);

/// One method of a suite's comparison grid with its reference outcome.
struct BenchCell {
  Method method;
  /// Degree at which the reference sweep first verified; empty when it never
  /// did.
  std::optional<int> reference_degree;
  /// Highest degree tried by the bench sweep.
  int max_degree = 20;
};

std::vector<BenchCell> SuiteGrid(const std::string& suite);

}  // namespace reachavoid
