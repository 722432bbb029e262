#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "reachavoid/method.h"
#include "reachavoid/semialg.h"

namespace reachavoid {

inline constexpr int kProblemSchemaVersion = 1;

/// Malformed or inconsistent problem input.
class ProblemError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Optional method parameters carried by a problem file.
struct MethodDefaults {
  std::optional<std::string> method;
  std::optional<double> beta;
  std::optional<std::string> alpha_m;
  std::optional<std::vector<int>> degrees;
};

struct ProblemFile {
  int schema_version = kProblemSchemaVersion;
  ProblemInstance instance;
  MethodDefaults defaults;
};

/// Throws ProblemError with a one-line message naming the offending field.
ProblemFile ParseProblem(const nlohmann::json& doc);
ProblemFile LoadProblem(const std::string& path);

/// Polynomials are written with ToString, so parse(serialize(p)) == p.
nlohmann::json SerializeProblem(const ProblemFile& file);

/// Structural equality of instances (exact coefficients).
bool SameInstance(const ProblemInstance& a, const ProblemInstance& b);

}  // namespace reachavoid
