#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "reachavoid/semialg.h"

namespace reachavoid {

enum class Outcome {
  kReachedTargetSafely,
  kExitedSafeSet,
  kTimeout,
  kNumericalFailure,
};

const char* ToString(Outcome outcome);

struct SimConfig {
  double t_max = 100.0;
  double rtol = 1e-8;
  double atol = 1e-10;
  double max_step = 1.0;
  double initial_step = 1e-3;
  double event_tolerance = 1e-9;
  /// > 0 selects fixed steps of this size (no error control).
  double fixed_step = 0.0;
  /// Keep every accepted state (otherwise only the endpoints).
  bool record = true;

  /// Throws std::invalid_argument unless all quantities are positive.
  void Validate() const;
};

struct Trajectory {
  std::vector<double> t;
  std::vector<Point> x;
  Outcome outcome = Outcome::kTimeout;
  /// First hitting time of the target, set iff outcome is kReachedTargetSafely.
  std::optional<double> tau;
  /// min over recorded states of -h(x); negative once the state left X.
  double min_safety_margin = 0.0;
};

/// Dormand-Prince 5(4) integration of x' = f(x) with stop-on-event semantics:
/// entering the target ends with kReachedTargetSafely, leaving the safe set
/// (h >= 0) ends with kExitedSafeSet. Events are located by bisecting the step
/// length until the event function is within the event tolerance. The switched
/// system that freezes the state outside X has the same classification.
Trajectory Integrate(const ProblemInstance& instance, const Point& x0,
                     const SimConfig& config = {});

/// Event-free propagation of x' = f(x) to time t_end (adaptive, or fixed-step
/// when config.fixed_step > 0). Throws std::runtime_error on step underflow.
Point Propagate(const PolyVector& f, const Point& x0, double t_end,
                const SimConfig& config = {});

struct MonteCarloSummary {
  int samples = 0;
  int reached = 0;
  int exited = 0;
  int timeout = 0;
  int failed = 0;
  double min_safety_margin = 0.0;
  double max_tau = 0.0;
  std::uint64_t seed = 0;
  /// Initial states of trajectories that left X (at most 10 kept).
  std::vector<Point> counterexamples;
};

/// Integrates from `samples` points drawn uniformly from X0.
MonteCarloSummary MonteCarloReachAvoid(const ProblemInstance& instance, int samples,
                                       const SimConfig& config, std::uint64_t seed);

struct ValueEstimate {
  double value = 0.0;
  /// The horizon ended before any event.
  bool inconclusive = false;
  Outcome outcome = Outcome::kTimeout;
};

/// exp(-beta tau) when the trajectory reaches the target at tau, else 0.
ValueEstimate EstimateValue(const ProblemInstance& instance, const Point& x0, double beta,
                            const SimConfig& config = {});

/// CSV with header "t,x1,...,xn".
void WriteTrajectoryCsv(const Trajectory& traj, std::ostream& out);

}  // namespace reachavoid
