#include "reachavoid/semialg.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>

namespace reachavoid {

namespace {

constexpr double kMinAcceptanceRate = 1e-4;
constexpr std::int64_t kMinWorkBudget = 200000;

Membership ClassifyValue(double max_value, double tolerance) {
  if (max_value < -tolerance) return Membership::kInside;
  if (max_value <= tolerance) return Membership::kBoundary;
  return Membership::kOutside;
}

void CheckPoint(int dimension, std::span<const double> x) {
  if (static_cast<int>(x.size()) != dimension) {
    throw std::invalid_argument("point has length " + std::to_string(x.size()) +
                                ", set dimension is " +
                                std::to_string(dimension));
  }
}

Point DrawPoint(const Box& box, std::mt19937_64& rng) {
  Point p(box.dimension());
  for (int i = 0; i < box.dimension(); ++i) {
    std::uniform_real_distribution<double> u(box.intervals[i].first,
                                             box.intervals[i].second);
    p[i] = u(rng);
  }
  return p;
}

SampleResult RejectionSample(const std::function<bool(const Point&)>& inside,
                             int count, const Box& box, std::uint64_t seed) {
  box.Validate();
  SampleResult out;
  if (count <= 0) return out;
  std::mt19937_64 rng(seed);
  const std::int64_t hard_cap =
      static_cast<std::int64_t>(count / kMinAcceptanceRate) * 2 + kMinWorkBudget;
  while (static_cast<int>(out.points.size()) < count && out.draws < hard_cap) {
    Point p = DrawPoint(box, rng);
    ++out.draws;
    if (inside(p)) out.points.push_back(std::move(p));
    if (out.draws >= kMinWorkBudget && out.draws % 10000 == 0) {
      const double rate =
          static_cast<double>(out.points.size()) / static_cast<double>(out.draws);
      if (rate < kMinAcceptanceRate) {
        throw SamplingError(
            "set appears empty or box too loose (acceptance rate " +
            std::to_string(rate) + " after " + std::to_string(out.draws) +
            " draws)");
      }
    }
  }
  out.acceptance_rate =
      static_cast<double>(out.points.size()) / static_cast<double>(out.draws);
  if (out.points.empty()) {
    throw SamplingError("set appears empty or box too loose (no accepted draws)");
  }
  return out;
}

}  // namespace

void Box::Validate() const {
  if (intervals.empty()) throw std::invalid_argument("bounding box is empty");
  for (const auto& [lo, hi] : intervals) {
    if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi)) {
      throw std::invalid_argument("bounding box intervals must be finite with lo < hi");
    }
  }
}

int BasicOpenSet::dimension() const {
  return constraints.empty() ? 0 : constraints.front().dimension();
}

void BasicOpenSet::Validate() const {
  if (constraints.empty()) {
    throw std::invalid_argument("a basic set needs at least one constraint");
  }
  for (const Polynomial& p : constraints) {
    if (p.dimension() != dimension()) {
      throw std::invalid_argument("set constraints disagree on dimension");
    }
  }
}

double BasicOpenSet::MaxConstraint(std::span<const double> x) const {
  double m = -std::numeric_limits<double>::infinity();
  for (const Polynomial& p : constraints) m = std::max(m, p.Evaluate(x));
  return m;
}

void ProblemInstance::Validate() const {
  if (dimension <= 0) throw std::invalid_argument("dimension must be positive");
  if (static_cast<int>(f.size()) != dimension) {
    throw std::invalid_argument("dynamics must have one entry per coordinate");
  }
  ValidatePolyVector(f);
  if (safe.dimension() != dimension) {
    throw std::invalid_argument("safe set dimension mismatch");
  }
  initial.Validate();
  target.Validate();
  if (initial.dimension() != dimension || target.dimension() != dimension) {
    throw std::invalid_argument("initial/target set dimension mismatch");
  }
  bounding_box.Validate();
  if (bounding_box.dimension() != dimension) {
    throw std::invalid_argument("bounding box dimension mismatch");
  }
  for (const Box* b : {&initial_box, &target_box}) {
    if (b->intervals.empty()) continue;
    b->Validate();
    if (b->dimension() != dimension) {
      throw std::invalid_argument("sampling box dimension mismatch");
    }
  }
}

Membership Classify(const BasicOpenSet& set, std::span<const double> x,
                    double tolerance) {
  CheckPoint(set.dimension(), x);
  return ClassifyValue(set.MaxConstraint(x), tolerance);
}

Membership Classify(const SafeSet& set, std::span<const double> x,
                    double tolerance) {
  CheckPoint(set.dimension(), x);
  return ClassifyValue(set.h.Evaluate(x), tolerance);
}

SampleResult Sample(const BasicOpenSet& set, int count, const Box& box,
                    std::uint64_t seed) {
  set.Validate();
  if (box.dimension() != set.dimension()) {
    throw std::invalid_argument("sampling box dimension mismatch");
  }
  return RejectionSample(
      [&set](const Point& p) { return Classify(set, p) == Membership::kInside; },
      count, box, seed);
}

SampleResult Sample(const SafeSet& set, int count, const Box& box,
                    std::uint64_t seed) {
  if (box.dimension() != set.dimension()) {
    throw std::invalid_argument("sampling box dimension mismatch");
  }
  return RejectionSample(
      [&set](const Point& p) { return Classify(set, p) == Membership::kInside; },
      count, box, seed);
}

std::vector<Point> SampleBoundary(const SafeSet& set, int count, const Box& box,
                                  std::uint64_t seed) {
  box.Validate();
  if (box.dimension() != set.dimension()) {
    throw std::invalid_argument("sampling box dimension mismatch");
  }
  std::vector<Point> out;
  if (count <= 0) return out;
  std::mt19937_64 rng(seed);
  const std::int64_t budget = std::max<std::int64_t>(kMinWorkBudget, 200LL * count);
  std::int64_t draws = 0;
  std::vector<Point> negatives, positives;
  while (static_cast<int>(out.size()) < count && draws < budget) {
    Point p = DrawPoint(box, rng);
    ++draws;
    const double value = set.h.Evaluate(p);
    if (std::abs(value) <= kBoundaryTolerance) {
      out.push_back(std::move(p));
      continue;
    }
    (value < 0 ? negatives : positives).push_back(std::move(p));
    if (negatives.empty() || positives.empty()) continue;

    Point lo = negatives.back();
    Point hi = positives.back();
    negatives.pop_back();
    positives.pop_back();
    Point mid(lo.size());
    double hm = 0.0;
    for (int it = 0; it < kBisectionDepth; ++it) {
      for (size_t i = 0; i < lo.size(); ++i) mid[i] = 0.5 * (lo[i] + hi[i]);
      hm = set.h.Evaluate(mid);
      if (std::abs(hm) <= kBoundaryTolerance) break;
      (hm < 0 ? lo : hi) = mid;
    }
    if (std::abs(hm) <= kBoundaryTolerance) out.push_back(mid);
  }
  if (out.empty()) {
    throw SamplingError("boundary not located in box (no sign change of h found)");
  }
  return out;
}

}  // namespace reachavoid
