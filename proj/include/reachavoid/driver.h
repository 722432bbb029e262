#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "reachavoid/certify.h"
#include "reachavoid/method.h"
#include "reachavoid/sdp.h"
#include "reachavoid/sim.h"
#include "reachavoid/sosbuild.h"

namespace reachavoid {

struct DriverConfig {
  DegreePlan plan = DegreePlan::Sweep(20);
  BuildOptions build;
  SolverConfig solver;
  ValidationConfig validation;
  /// Accept solver success alone, without independent validation.
  bool trust_solver = false;
  /// Wall-clock budget per cell; cells over budget end as iteration limit.
  double cell_budget_seconds = 600.0;
  /// Command for the external backend; empty disables it.
  std::string external_solver;
  /// Retry a cell with the external backend when the built-in one does not
  /// verify it.
  bool external_fallback = false;
  /// Use only the external backend.
  bool external_only = false;
  int simulation_samples = 500;
  std::uint64_t simulation_seed = 7;
  SimConfig sim;
  /// Level-set grid resolution for the winning certificate; 0 disables.
  int grid = 0;

  void Validate() const;
};

struct SolveAttempt {
  std::string backend;
  std::string status;
  int iterations = 0;
  double primal_residual = 0.0;
  double seconds = 0.0;
  std::string message;
};

struct SweepCell {
  Method method;
  int degree = 0;
  int rows = 0;
  int variables = 0;
  std::vector<SolveAttempt> attempts;
  /// Backend of the attempt that decided the cell.
  std::string backend;
  std::string solver_status;
  bool solver_success = false;
  std::optional<ValidationReport> validation;
  bool verified = false;
  std::string message;
  double build_seconds = 0.0;
  double solve_seconds = 0.0;
  double validate_seconds = 0.0;
};

struct VerificationReport {
  std::string instance_name;
  std::string instance_digest;
  Method method;
  std::vector<SweepCell> cells;
  int max_degree = 0;
  std::optional<int> verified_degree;
  std::optional<Certificate> certificate;
  std::optional<MonteCarloSummary> simulation;
  std::optional<LevelSet> level_set;
  bool trust_solver = false;

  bool Verified() const { return verified_degree.has_value(); }
  /// "verified at degree d" or "not verified up to degree d".
  std::string Verdict() const;
};

/// Stable hex digest of the serialized instance.
std::string InstanceDigest(const ProblemInstance& instance);

/// Tries each degree of the plan in order and stops at the first verified
/// cell. Per-cell failures are recorded; malformed input throws.
VerificationReport RunSweep(const ProblemInstance& instance, const Method& method,
                            const DriverConfig& config);

/// RunSweep for each method, in order.
std::vector<VerificationReport> CompareMethods(const ProblemInstance& instance,
                                               const std::vector<Method>& methods,
                                               const DriverConfig& config);

nlohmann::json ToJson(const Certificate& cert);
nlohmann::json ToJson(const MonteCarloSummary& summary);
/// Wall-clock fields are emitted only when include_timings is set, so the
/// default output is reproducible byte for byte.
nlohmann::json ToJson(const VerificationReport& report, bool include_timings = false);
/// Rows of {method, verified degree, backend}.
nlohmann::json ComparisonTable(const std::vector<VerificationReport>& reports);

}  // namespace reachavoid
