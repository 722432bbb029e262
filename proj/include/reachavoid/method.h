#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "reachavoid/poly.h"

namespace reachavoid {

/// Which family of reach-avoid constraints to encode.
enum class MethodKind {
  kPrajna,      // v <= 0 on X0, v > 0 on the boundary, strictly decreasing flow
  kExpGbf,      // exponential guidance-barrier function with rate beta
  kAsymGbf,     // asymptotic guidance-barrier function with auxiliary w
  kCombined,    // v1 (asymptotic) + v2 (exponential)
  kGeneralGbf,  // asymptotic with derivative bound alpha = m * v
};

struct Method {
  MethodKind kind = MethodKind::kAsymGbf;
  /// Rate for kExpGbf and kCombined.
  double beta = 0.0;
  /// Multiplier template m for kGeneralGbf.
  std::optional<Polynomial> alpha_multiplier;

  static Method Prajna() { return {MethodKind::kPrajna, 0.0, std::nullopt}; }
  static Method Exp(double beta) { return {MethodKind::kExpGbf, beta, std::nullopt}; }
  static Method Asym() { return {MethodKind::kAsymGbf, 0.0, std::nullopt}; }
  static Method Combined(double beta) { return {MethodKind::kCombined, beta, std::nullopt}; }
  static Method General(Polynomial m) { return {MethodKind::kGeneralGbf, 0.0, std::move(m)}; }

  bool UsesBeta() const {
    return kind == MethodKind::kExpGbf || kind == MethodKind::kCombined;
  }
  /// Throws std::invalid_argument when beta or the template is missing/invalid.
  void Validate() const;
  /// Short label such as "exp(beta=0.1)" or "general(m=x1^4)".
  std::string Label() const;
};

/// CLI spelling: prajna, exp, asym, combined, general.
const char* MethodKeyword(MethodKind kind);
/// Throws std::invalid_argument on an unknown name.
MethodKind ParseMethodKind(std::string_view name);

/// Degrees tried in order by the sweep.
struct DegreePlan {
  std::vector<int> degrees;

  /// 2, 4, ..., max_degree.
  static DegreePlan Sweep(int max_degree = 20);
  /// Entries must be even, >= 2 and strictly increasing.
  void Validate() const;
};

}  // namespace reachavoid
