#include "reachavoid/method.h"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace reachavoid {

void Method::Validate() const {
  if (UsesBeta() && !(std::isfinite(beta) && beta > 0.0)) {
    throw std::invalid_argument(std::string(MethodKeyword(kind)) +
                                " requires a positive finite beta");
  }
  if (kind == MethodKind::kGeneralGbf) {
    if (!alpha_multiplier.has_value()) {
      throw std::invalid_argument("general requires a multiplier template m");
    }
    if (alpha_multiplier->dimension() <= 0) {
      throw std::invalid_argument("multiplier template has no dimension");
    }
  }
}

std::string Method::Label() const {
  std::string out = MethodKeyword(kind);
  if (UsesBeta()) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "(beta=%g)", beta);
    out += buf;
  } else if (kind == MethodKind::kGeneralGbf && alpha_multiplier) {
    out += "(m=" + alpha_multiplier->ToString() + ")";
  }
  return out;
}

const char* MethodKeyword(MethodKind kind) {
  switch (kind) {
    case MethodKind::kPrajna: return "prajna";
    case MethodKind::kExpGbf: return "exp";
    case MethodKind::kAsymGbf: return "asym";
    case MethodKind::kCombined: return "combined";
    case MethodKind::kGeneralGbf: return "general";
  }
  return "unknown";
}

MethodKind ParseMethodKind(std::string_view name) {
  for (MethodKind k : {MethodKind::kPrajna, MethodKind::kExpGbf, MethodKind::kAsymGbf,
                       MethodKind::kCombined, MethodKind::kGeneralGbf}) {
    if (name == MethodKeyword(k)) return k;
  }
  throw std::invalid_argument("unknown method '" + std::string(name) +
                              "' (expected prajna, exp, asym, combined or general)");
}

DegreePlan DegreePlan::Sweep(int max_degree) {
  if (max_degree < 2) throw std::invalid_argument("sweep needs max degree >= 2");
  DegreePlan plan;
  for (int d = 2; d <= max_degree; d += 2) plan.degrees.push_back(d);
  return plan;
}

void DegreePlan::Validate() const {
  for (size_t i = 0; i < degrees.size(); ++i) {
    if (degrees[i] < 2 || degrees[i] % 2 != 0) {
      throw std::invalid_argument("degree plan entries must be even and >= 2");
    }
    if (i > 0 && degrees[i] <= degrees[i - 1]) {
      throw std::invalid_argument("degree plan must be strictly increasing");
    }
  }
}

}  // namespace reachavoid
