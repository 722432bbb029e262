#include "reachavoid/sim.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace reachavoid {
namespace {

constexpr int kMaxCounterexamples = 10;
constexpr int kMaxBisections = 200;

// Dormand-Prince 5(4) tableau.
constexpr double kA[7][6] = {
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84},
};
constexpr double kB5[7] = {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192,
                           -2187.0 / 6784, 11.0 / 84, 0.0};
constexpr double kB4[7] = {5179.0 / 57600, 0.0, 7571.0 / 16695, 393.0 / 640,
                           -92097.0 / 339200, 187.0 / 2100, 1.0 / 40};

Point EvalField(const PolyVector& f, const Point& x) {
  Point out(f.size());
  for (size_t i = 0; i < f.size(); ++i) out[i] = f[i].Evaluate(x);
  return out;
}

struct StepResult {
  Point x;
  double error = 0.0;  // scaled RMS error estimate
  bool finite = true;
};

StepResult DoStep(const PolyVector& f, const Point& x, double h, const SimConfig& cfg) {
  const size_t n = x.size();
  Point k[7];
  Point y(n);
  StepResult r;
  try {
    k[0] = EvalField(f, x);
    for (int s = 1; s < 7; ++s) {
      for (size_t i = 0; i < n; ++i) {
        double acc = x[i];
        for (int j = 0; j < s; ++j) acc += h * kA[s][j] * k[j][i];
        y[i] = acc;
      }
      k[s] = EvalField(f, y);
    }
  } catch (const std::range_error&) {
    r.finite = false;
    return r;
  }
  r.x.resize(n);
  double sum = 0.0;
  for (size_t i = 0; i < n; ++i) {
    double x5 = x[i], x4 = x[i];
    for (int s = 0; s < 7; ++s) {
      x5 += h * kB5[s] * k[s][i];
      x4 += h * kB4[s] * k[s][i];
    }
    r.x[i] = x5;
    const double scale = cfg.atol + cfg.rtol * std::max(std::abs(x[i]), std::abs(x5));
    const double e = (x5 - x4) / scale;
    sum += e * e;
    if (!std::isfinite(x5)) r.finite = false;
  }
  r.error = n ? std::sqrt(sum / n) : 0.0;
  return r;
}

double NextStep(double h, double error) {
  const double factor =
      error == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(error, -0.2), 0.2, 5.0);
  return h * factor;
}

enum class Event { kNone, kTarget, kExit };

Event Check(const ProblemInstance& inst, const Point& x) {
  if (inst.target.MaxConstraint(x) < 0.0) return Event::kTarget;
  if (inst.safe.h.Evaluate(x) >= 0.0) return Event::kExit;
  return Event::kNone;
}

// Distance of the event function from its switching surface.
double EventGap(const ProblemInstance& inst, const Point& x, Event e) {
  return e == Event::kTarget ? -inst.target.MaxConstraint(x) : inst.safe.h.Evaluate(x);
}

}  // namespace

const char* ToString(Outcome outcome) {
  switch (outcome) {
    case Outcome::kReachedTargetSafely: return "reached";
    case Outcome::kExitedSafeSet: return "exited";
    case Outcome::kTimeout: return "timeout";
    case Outcome::kNumericalFailure: return "numerical-failure";
  }
  return "unknown";
}

void SimConfig::Validate() const {
  for (double q : {t_max, rtol, atol, max_step, initial_step, event_tolerance}) {
    if (!(q > 0.0) || !std::isfinite(q)) {
      throw std::invalid_argument("simulation parameters must be positive and finite");
    }
  }
  if (fixed_step < 0.0 || !std::isfinite(fixed_step)) {
    throw std::invalid_argument("fixed step must be non-negative");
  }
}

Trajectory Integrate(const ProblemInstance& inst, const Point& x0, const SimConfig& cfg) {
  cfg.Validate();
  if (static_cast<int>(x0.size()) != inst.dimension) {
    throw std::invalid_argument("initial state dimension mismatch");
  }
  for (double c : x0) {
    if (!std::isfinite(c)) throw std::invalid_argument("initial state is not finite");
  }
  Trajectory traj;
  double t = 0.0;
  Point x = x0;
  auto record = [&](double time, const Point& state, bool force) {
    traj.min_safety_margin = std::min(traj.min_safety_margin, -inst.safe.h.Evaluate(state));
    if (cfg.record || force) {
      traj.t.push_back(time);
      traj.x.push_back(state);
    }
  };
  traj.min_safety_margin = -inst.safe.h.Evaluate(x);
  record(t, x, true);

  const Event first = Check(inst, x);
  if (first == Event::kTarget) {
    traj.outcome = Outcome::kReachedTargetSafely;
    traj.tau = 0.0;
    return traj;
  }
  if (first == Event::kExit) {
    traj.outcome = Outcome::kExitedSafeSet;
    return traj;
  }

  const bool fixed = cfg.fixed_step > 0.0;
  double h = fixed ? cfg.fixed_step : std::min(cfg.initial_step, cfg.max_step);
  while (t < cfg.t_max) {
    h = std::min(h, cfg.t_max - t);
    if (h < 1e-14 * std::max(1.0, std::abs(t))) {
      traj.outcome = Outcome::kNumericalFailure;
      return traj;
    }
    StepResult step = DoStep(inst.f, x, h, cfg);
    if (!step.finite) {
      if (fixed) {
        traj.outcome = Outcome::kNumericalFailure;
        return traj;
      }
      h *= 0.25;
      continue;
    }
    if (!fixed && step.error > 1.0) {
      h = NextStep(h, step.error);
      continue;
    }
    const Event ev = Check(inst, step.x);
    if (ev != Event::kNone) {
      // Bisect the step length; `hi` always produces an event state.
      double lo = 0.0, hi = h;
      Point x_hi = step.x;
      Event e_hi = ev;
      for (int it = 0; it < kMaxBisections; ++it) {
        if (EventGap(inst, x_hi, e_hi) <= cfg.event_tolerance) break;
        if (hi - lo <= 1e-15 * std::max(1.0, t)) break;
        const double mid = 0.5 * (lo + hi);
        StepResult probe = DoStep(inst.f, x, mid, cfg);
        const Event e_mid = probe.finite ? Check(inst, probe.x) : Event::kNone;
        if (e_mid != Event::kNone) {
          hi = mid;
          x_hi = std::move(probe.x);
          e_hi = e_mid;
        } else {
          lo = mid;
        }
      }
      t += hi;
      record(t, x_hi, true);
      if (e_hi == Event::kTarget) {
        traj.outcome = Outcome::kReachedTargetSafely;
        traj.tau = t;
      } else {
        traj.outcome = Outcome::kExitedSafeSet;
      }
      return traj;
    }
    t += h;
    x = std::move(step.x);
    record(t, x, t >= cfg.t_max);
    if (!fixed) h = std::min(NextStep(h, step.error), cfg.max_step);
  }
  traj.outcome = Outcome::kTimeout;
  return traj;
}

Point Propagate(const PolyVector& f, const Point& x0, double t_end, const SimConfig& cfg) {
  cfg.Validate();
  double t = 0.0;
  Point x = x0;
  const bool fixed = cfg.fixed_step > 0.0;
  double h = fixed ? cfg.fixed_step : std::min(cfg.initial_step, cfg.max_step);
  while (t < t_end) {
    // Snap to t_end without creating a sliver step.
    if (t + h > t_end || (fixed && t_end - (t + h) < 1e-12 * h)) h = t_end - t;
    if (h < 1e-14 * std::max(1.0, std::abs(t))) throw std::runtime_error("step size underflow");
    StepResult step = DoStep(f, x, h, cfg);
    if (!step.finite) throw std::runtime_error("non-finite state");
    if (!fixed && step.error > 1.0) {
      h = NextStep(h, step.error);
      continue;
    }
    t += h;
    x = std::move(step.x);
    if (!fixed) h = std::min(NextStep(h, step.error), cfg.max_step);
  }
  return x;
}

MonteCarloSummary MonteCarloReachAvoid(const ProblemInstance& inst, int samples,
                                       const SimConfig& cfg, std::uint64_t seed) {
  if (samples < 0) throw std::invalid_argument("sample count must be non-negative");
  MonteCarloSummary out;
  out.seed = seed;
  if (samples == 0) return out;
  SimConfig quiet = cfg;
  quiet.record = false;
  const auto pts = Sample(inst.initial, samples, inst.InitialSamplingBox(), seed).points;
  out.min_safety_margin = std::numeric_limits<double>::infinity();
  for (const Point& x0 : pts) {
    const Trajectory tr = Integrate(inst, x0, quiet);
    ++out.samples;
    out.min_safety_margin = std::min(out.min_safety_margin, tr.min_safety_margin);
    switch (tr.outcome) {
      case Outcome::kReachedTargetSafely:
        ++out.reached;
        out.max_tau = std::max(out.max_tau, *tr.tau);
        break;
      case Outcome::kExitedSafeSet:
        ++out.exited;
        if (static_cast<int>(out.counterexamples.size()) < kMaxCounterexamples) {
          out.counterexamples.push_back(x0);
        }
        break;
      case Outcome::kTimeout: ++out.timeout; break;
      case Outcome::kNumericalFailure: ++out.failed; break;
    }
  }
  return out;
}

ValueEstimate EstimateValue(const ProblemInstance& inst, const Point& x0, double beta,
                            const SimConfig& cfg) {
  if (!(beta >= 0.0) || !std::isfinite(beta)) {
    throw std::invalid_argument("beta must be non-negative");
  }
  SimConfig quiet = cfg;
  quiet.record = false;
  const Trajectory tr = Integrate(inst, x0, quiet);
  ValueEstimate v;
  v.outcome = tr.outcome;
  if (tr.outcome == Outcome::kReachedTargetSafely) {
    v.value = std::exp(-beta * *tr.tau);
  } else {
    v.inconclusive = tr.outcome == Outcome::kTimeout;
  }
  return v;
}

void WriteTrajectoryCsv(const Trajectory& traj, std::ostream& out) {
  out << "t";
  const size_t n = traj.x.empty() ? 0 : traj.x.front().size();
  for (size_t i = 0; i < n; ++i) out << ",x" << i + 1;
  out << "\n";
  char buf[64];
  for (size_t k = 0; k < traj.t.size(); ++k) {
    std::snprintf(buf, sizeof(buf), "%.12g", traj.t[k]);
    out << buf;
    for (double c : traj.x[k]) {
      std::snprintf(buf, sizeof(buf), ",%.12g", c);
      out << buf;
    }
    out << "\n";
  }
}

}  // namespace reachavoid
