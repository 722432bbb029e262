// Primal-dual path-following interior-point method for SdpProblem.
//
// Direction: HKM (dX = sigma*mu*S^-1 - X - sym(X dS S^-1)) with a Mehrotra
// predictor-corrector step and independent primal/dual step lengths. The
// Schur complement is assembled per block through the group structure:
//   M = sum_k L_k T_k L_k^T,  T_k(g, h) = tr(E_g X_k E_h S_k^-1),
// where L_k holds the row coefficients on block k's groups. Free variables
// enter through the quasi-definite system [M B; B^T 0].
//
// Feasibility problems (no objective) are homogenized before solving:
//   max t  s.t.  A(X) + B z = t b,  sum_k tr(X_k) + s = R,  X, s >= 0.
// Their solution sets are typically unbounded cones shifted by a tiny b, on
// which a zero-objective central path drifts off. The bounded problem has an
// interior, and any iterate with t > 0 maps back to (X, z) / t.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/QR>
#include <Eigen/Sparse>

#include "reachavoid/sdp.h"

namespace reachavoid {

namespace {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using SpMat = Eigen::SparseMatrix<double>;

constexpr double kStaticRegularization = 1e-10;
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMarginFraction = 0.5;

struct BlockData {
  int n = 0;
  int groups = 0;
  /// Group of the ordered pair (p, q), stored at p * n + q.
  std::vector<int> group_of;
  /// Ordered pairs (p, q) belonging to each group.
  std::vector<std::vector<std::pair<int, int>>> members;
  /// Global rows touched by this block, and L restricted to them.
  std::vector<int> rows;
  SpMat coeffs;  // rows.size() x groups
  Mat objective;
};

double MaxAbs(const Mat& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }
double MaxAbs(const Vec& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

Mat Sym(const Mat& m) { return 0.5 * (m + m.transpose()); }

/// Largest alpha with x + alpha * dx PSD, or +inf.
double MaxStep(const Mat& x, const Mat& dx) {
  Eigen::LLT<Mat> llt(x);
  if (llt.info() != Eigen::Success) return 0.0;
  Mat w = llt.matrixL().solve(dx);
  w = llt.matrixL().solve(w.transpose()).transpose();
  Eigen::SelfAdjointEigenSolver<Mat> es(Sym(w), Eigen::EigenvaluesOnly);
  const double lmin = es.eigenvalues()(0);
  return lmin < 0 ? -1.0 / lmin : kInf;
}

/// Indices of a maximal independent subset of the columns, ascending.
std::vector<int> IndependentColumns(const SpMat& cols) {
  std::vector<int> kept;
  if (cols.cols() == 0) return kept;
  Eigen::ColPivHouseholderQR<Mat> qr{Mat(cols)};
  qr.setThreshold(1e-10);
  const int rank = static_cast<int>(qr.rank());
  for (int j = 0; j < rank; ++j) kept.push_back(qr.colsPermutation().indices()(j));
  std::sort(kept.begin(), kept.end());
  return kept;
}

class InteriorPoint {
 public:
  InteriorPoint(const SdpProblem& problem, const SolverConfig& config)
      : problem_(problem), config_(config), homogenized_(!problem.HasObjective()) {
    rows_ = problem.num_rows;
    m_ = rows_ + (homogenized_ ? 1 : 0);
    blocks_.resize(problem.blocks.size());
    for (size_t k = 0; k < problem.blocks.size(); ++k) SetUpBlock(k);
    for (const BlockData& b : blocks_) original_dim_ += b.n;
    if (homogenized_) {
      BlockData slack;
      slack.n = 1;
      slack.groups = 1;
      slack.group_of = {0};
      slack.members = {{{0, 0}}};
      slack.coeffs.resize(0, 1);
      slack.objective = Mat::Zero(1, 1);
      blocks_.push_back(std::move(slack));
    }
    for (const BlockData& b : blocks_) total_dim_ += b.n;

    // Free columns that depend on others (e.g. a constant term that only
    // enters through a Lie derivative) make the Newton system singular; they
    // are pinned to zero.
    const int nfree = problem.num_free;
    SpMat all_free(rows_, nfree);
    std::vector<Eigen::Triplet<double>> trips;
    for (const Triplet& t : problem.free_rows) trips.emplace_back(t.row, t.col, t.value);
    all_free.setFromTriplets(trips.begin(), trips.end());
    kept_free_ = IndependentColumns(all_free);
    const int kept = static_cast<int>(kept_free_.size());
    nf_ = kept + (homogenized_ ? 1 : 0);

    trips.clear();
    for (int j = 0; j < kept; ++j) {
      for (SpMat::InnerIterator it(all_free, kept_free_[j]); it; ++it) {
        trips.emplace_back(static_cast<int>(it.row()), j, it.value());
      }
    }
    free_objective_ = Vec::Zero(nf_);
    b_ = Vec::Zero(m_);
    if (homogenized_) {
      // t multiplies b / |b| so that it lives on the scale of X.
      b_scale_ = std::max(MaxAbs(problem.b), 1e-300);
      for (int i = 0; i < rows_; ++i) {
        if (problem.b(i) != 0.0) trips.emplace_back(i, kept, -problem.b(i) / b_scale_);
      }
      free_objective_(kept) = -1.0;
      radius_ = 2.0 * std::max(1, original_dim_);
      b_(rows_) = radius_;
    } else {
      b_ = problem.b;
      if (problem.free_objective.size() == nfree) {
        for (int j = 0; j < kept; ++j) free_objective_(j) = problem.free_objective(kept_free_[j]);
      }
    }
    free_coeffs_.resize(m_, nf_);
    free_coeffs_.setFromTriplets(trips.begin(), trips.end());
  }

  SolveOutcome Run();

 private:
  void SetUpBlock(size_t k) {
    const PsdBlock& pb = problem_.blocks[k];
    BlockData& b = blocks_[k];
    b.n = pb.dim;
    b.groups = pb.num_groups;
    b.group_of.assign(b.n * b.n, 0);
    b.members.assign(b.groups, {});
    for (int p = 0; p < b.n; ++p) {
      for (int q = 0; q < b.n; ++q) {
        const int g = pb.entry_group[SvecIndex(b.n, std::min(p, q), std::max(p, q))];
        b.group_of[p * b.n + q] = g;
        b.members[g].emplace_back(p, q);
      }
    }
    std::vector<int> local(m_, -1);
    for (const Triplet& t : problem_.block_rows[k]) {
      if (local[t.row] < 0) {
        local[t.row] = 0;
        b.rows.push_back(t.row);
      }
    }
    std::sort(b.rows.begin(), b.rows.end());
    for (size_t i = 0; i < b.rows.size(); ++i) local[b.rows[i]] = static_cast<int>(i);
    std::vector<Eigen::Triplet<double>> trips;
    for (const Triplet& t : problem_.block_rows[k]) trips.emplace_back(local[t.row], t.col, t.value);
    b.coeffs.resize(static_cast<int>(b.rows.size()), b.groups);
    b.coeffs.setFromTriplets(trips.begin(), trips.end());
    if (problem_.block_objective.size() == problem_.blocks.size() &&
        problem_.block_objective[k].size() > 0) {
      b.objective = Sym(problem_.block_objective[k]);
    } else {
      b.objective = Mat::Zero(b.n, b.n);
    }
  }

  /// Group sums of an arbitrary (not necessarily symmetric) matrix.
  Vec GroupSums(const BlockData& b, const Mat& p) const {
    Vec s = Vec::Zero(b.groups);
    for (int i = 0; i < b.n; ++i) {
      for (int j = 0; j < b.n; ++j) s(b.group_of[i * b.n + j]) += p(i, j);
    }
    return s;
  }

  /// sum_k A_k(P_k), where A_k(P) = (<A_ik, P>)_i. The trace row of a
  /// homogenized problem is the identity on every block.
  Vec ApplyA(const std::vector<Mat>& mats) const {
    Vec out = Vec::Zero(m_);
    for (size_t k = 0; k < blocks_.size(); ++k) {
      const BlockData& b = blocks_[k];
      const Vec local = b.coeffs * GroupSums(b, mats[k]);
      for (size_t i = 0; i < b.rows.size(); ++i) out(b.rows[i]) += local(i);
      if (homogenized_) out(rows_) += mats[k].trace();
    }
    return out;
  }

  Mat ApplyATBlock(size_t k, const Vec& y) const {
    const BlockData& b = blocks_[k];
    Vec ylocal(b.rows.size());
    for (size_t i = 0; i < b.rows.size(); ++i) ylocal(i) = y(b.rows[i]);
    const Vec u = b.coeffs.transpose() * ylocal;
    Mat out(b.n, b.n);
    for (int p = 0; p < b.n; ++p) {
      for (int q = 0; q < b.n; ++q) out(p, q) = u(b.group_of[p * b.n + q]);
    }
    if (homogenized_) out.diagonal().array() += y(rows_);
    return out;
  }

  /// Adds L_k T_k L_k^T into the Schur matrix.
  void AccumulateSchur(const BlockData& b, const Mat& x, const Mat& zinv,
                       Mat& schur) const {
    if (b.rows.empty()) return;
    Mat t = Mat::Zero(b.groups, b.groups);
    Mat f(b.n, b.n);
    for (int g = 0; g < b.groups; ++g) {
      f.setZero();
      for (const auto& [p, q] : b.members[g]) f.noalias() += zinv.col(p) * x.row(q);
      // t(g, h) = sum over (r, s) in h of f(s, r).
      for (int r = 0; r < b.n; ++r) {
        for (int s = 0; s < b.n; ++s) t(g, b.group_of[r * b.n + s]) += f(s, r);
      }
    }
    const Mat lt = b.coeffs * t;
    const Mat local = lt * b.coeffs.transpose();
    for (size_t i = 0; i < b.rows.size(); ++i) {
      for (size_t j = 0; j < b.rows.size(); ++j) {
        schur(b.rows[i], b.rows[j]) += local(i, j);
      }
    }
  }

  struct Direction {
    std::vector<Mat> dx, ds;
    Vec dy, dz;
  };

  bool FactorSystem();
  Direction SolveDirection(const std::vector<Mat>& g, const Vec& base_rhs);
  Vec SolveKkt(const Vec& rhs) const;
  void WritePrimal(SolveOutcome& out, double scale) const;

  const SdpProblem& problem_;
  const SolverConfig& config_;
  const bool homogenized_;
  int rows_ = 0;  // rows of the input problem
  int m_ = 0;     // rows of the solved problem
  int nf_ = 0;
  int original_dim_ = 0;
  int total_dim_ = 0;
  double radius_ = 0.0;
  double b_scale_ = 1.0;
  std::vector<BlockData> blocks_;
  std::vector<int> kept_free_;
  SpMat free_coeffs_;
  Vec free_objective_;
  Vec b_;

  // Iterates.
  std::vector<Mat> x_, s_, zinv_;
  Vec y_, z_;
  // Residuals.
  Vec rp_, rz_;
  std::vector<Mat> rd_;

  Mat kkt_;  // equilibrated
  Vec equil_;
  Eigen::PartialPivLU<Mat> kkt_lu_;
};

bool InteriorPoint::FactorSystem() {
  kkt_ = Mat::Zero(m_ + nf_, m_ + nf_);
  Mat schur = Mat::Zero(m_, m_);
  for (size_t k = 0; k < blocks_.size(); ++k) {
    AccumulateSchur(blocks_[k], x_[k], zinv_[k], schur);
  }
  if (homogenized_) {
    // Column of the trace row: <A_i, X_k S_k^-1> summed over blocks.
    std::vector<Mat> xz(blocks_.size());
    for (size_t k = 0; k < blocks_.size(); ++k) xz[k] = x_[k] * zinv_[k];
    const Vec col = ApplyA(xz);
    schur.col(rows_) = col;
    schur.row(rows_) = col.transpose();
  }
  kkt_.topLeftCorner(m_, m_) = Sym(schur);
  if (nf_ > 0) {
    const Mat bdense = Mat(free_coeffs_);
    kkt_.topRightCorner(m_, nf_) = bdense;
    kkt_.bottomLeftCorner(nf_, m_) = bdense.transpose();
  }
  // Symmetric Ruiz equilibration, then a quasi-definite regularization.
  // SolveKkt refines against the exact (scaled) matrix.
  equil_ = Vec::Ones(m_ + nf_);
  for (int pass = 0; pass < 8; ++pass) {
    Vec r(m_ + nf_);
    for (int i = 0; i < m_ + nf_; ++i) {
      const double norm = kkt_.col(i).cwiseAbs().maxCoeff();
      r(i) = norm > 0.0 ? 1.0 / std::sqrt(norm) : 1.0;
    }
    kkt_ = r.asDiagonal() * kkt_ * r.asDiagonal();
    equil_ = equil_.cwiseProduct(r);
  }
  Mat regularized = kkt_;
  regularized.diagonal().head(m_).array() += kStaticRegularization;
  regularized.diagonal().tail(nf_).array() -= kStaticRegularization;
  kkt_lu_.compute(regularized);
  const double rcond = kkt_lu_.rcond();
  return std::isfinite(rcond) && rcond > 0.0;
}

Vec InteriorPoint::SolveKkt(const Vec& rhs_unscaled) const {
  const Vec rhs = equil_.cwiseProduct(rhs_unscaled);
  Vec sol = kkt_lu_.solve(rhs);
  double best = MaxAbs(Vec(rhs - kkt_ * sol));
  for (int step = 0; step < 8 && best > 1e-15 * (1.0 + MaxAbs(rhs)); ++step) {
    const Vec candidate = sol + kkt_lu_.solve(Vec(rhs - kkt_ * sol));
    const double res = MaxAbs(Vec(rhs - kkt_ * candidate));
    if (!(res < best)) break;
    sol = candidate;
    best = res;
  }
  return equil_.cwiseProduct(sol);
}

InteriorPoint::Direction InteriorPoint::SolveDirection(const std::vector<Mat>& g,
                                                       const Vec& base_rhs) {
  Direction d;
  // [M B; B^T 0][dy; dz] = [rhs; rz]
  Vec full(m_ + nf_);
  full << base_rhs - ApplyA(g), rz_;
  const Vec sol = SolveKkt(full);
  d.dy = sol.head(m_);
  d.dz = sol.tail(nf_);
  d.ds.resize(blocks_.size());
  d.dx.resize(blocks_.size());
  for (size_t k = 0; k < blocks_.size(); ++k) {
    d.ds[k] = rd_[k] - ApplyATBlock(k, d.dy);
    d.dx[k] = Sym(g[k] - x_[k] * d.ds[k] * zinv_[k]);
  }
  return d;
}

void InteriorPoint::WritePrimal(SolveOutcome& out, double scale) const {
  out.primal = Vec::Zero(problem_.NumVariables());
  for (size_t k = 0; k < problem_.blocks.size(); ++k) {
    out.primal.segment(problem_.BlockOffset(static_cast<int>(k)), SvecSize(blocks_[k].n)) =
        Svec(x_[k]) / scale;
  }
  const int offset = problem_.FreeOffset();
  for (size_t j = 0; j < kept_free_.size(); ++j) {
    out.primal(offset + kept_free_[j]) = z_(static_cast<int>(j)) / scale;
  }
}

SolveOutcome InteriorPoint::Run() {
  const auto start = std::chrono::steady_clock::now();
  SolveOutcome out;
  out.backend = "builtin-ipm";

  const double braw = MaxAbs(problem_.b);
  const double bnorm = MaxAbs(b_);
  double cnorm = MaxAbs(free_objective_);
  for (const BlockData& b : blocks_) cnorm = std::max(cnorm, MaxAbs(b.objective));

  x_.clear();
  s_.clear();
  const double eta = std::max(1.0, cnorm);
  for (const BlockData& b : blocks_) {
    x_.push_back(Mat::Identity(b.n, b.n));
    s_.push_back(eta * Mat::Identity(b.n, b.n));
  }
  y_ = Vec::Zero(m_);
  z_ = Vec::Zero(nf_);
  zinv_.resize(blocks_.size());
  rd_.resize(blocks_.size());

  int stalled = 0;
  for (int iter = 0;; ++iter) {
    out.iterations = iter;
    rp_ = b_ - ApplyA(x_) - free_coeffs_ * z_;
    rz_ = free_objective_ - free_coeffs_.transpose() * y_;
    double pobj = free_objective_.dot(z_);
    double gap = 0.0;
    double dres = MaxAbs(rz_);
    double ray = MaxAbs(Vec(free_coeffs_.transpose() * y_));
    for (size_t k = 0; k < blocks_.size(); ++k) {
      const Mat aty = ApplyATBlock(k, y_);
      rd_[k] = blocks_[k].objective - aty - s_[k];
      pobj += (blocks_[k].objective.cwiseProduct(x_[k])).sum();
      gap += (x_[k].cwiseProduct(s_[k])).sum();
      dres = std::max(dres, MaxAbs(rd_[k]));
      ray = std::max(ray, MaxAbs(Mat(aty + s_[k])));
    }
    const double dobj = b_.dot(y_);
    const double mu = gap / total_dim_;
    const double pinf = MaxAbs(rp_) / (1.0 + bnorm);
    const double dinf = dres / (1.0 + cnorm);
    const double relgap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
    // For a homogenized problem, the residual of the mapped-back candidate.
    const double t = homogenized_ ? z_(nf_ - 1) / b_scale_ : 1.0;
    const double candidate_res =
        homogenized_ ? MaxAbs(Vec(rp_.head(rows_))) / std::max(t, 1e-300) : MaxAbs(rp_);
    out.primal_residual = t > 0.0 ? candidate_res / (1.0 + braw) : pinf;
    out.dual_residual = dinf;
    out.gap = gap;
    out.primal_objective = pobj;
    out.dual_objective = dobj;

    if (config_.verbose) {
      std::fprintf(stderr,
                   "ipm %3d pinf %.2e dinf %.2e gap %.2e mu %.2e pobj %.6e dobj %.6e t %.3e "
                   "res %.2e\n",
                   iter, pinf, dinf, gap, mu, pobj, dobj, t, out.primal_residual);
    }
    if (!std::isfinite(pinf) || !std::isfinite(dinf) || !std::isfinite(gap)) {
      out.status = SolveStatus::kNumericalFailure;
      out.message = "non-finite iterate";
      break;
    }
    const bool converged = pinf <= config_.feasibility_tolerance &&
                           dinf <= config_.feasibility_tolerance &&
                           relgap <= config_.gap_tolerance;
    if (homogenized_) {
      // Accepting the first positive t returns points hugging the cone
      // boundary; waiting for half the dual bound keeps a usable margin.
      const double t_upper = -dobj / b_scale_;
      if (t > 0.0 && out.primal_residual <= config_.feasibility_tolerance &&
          t >= kMarginFraction * t_upper) {
        WritePrimal(out, t);
        out.status = SolveStatus::kFeasible;
        break;
      }
      if (converged) {
        out.status = SolveStatus::kInfeasibleCertificate;
        out.message = "no strictly feasible point: optimal homogenized margin " +
                      std::to_string(-pobj);
        break;
      }
    } else {
      if (converged) {
        out.status = SolveStatus::kFeasible;
        WritePrimal(out, 1.0);
        break;
      }
      if (dobj > 0 && ray * std::max(bnorm, 1e-300) / dobj <= config_.feasibility_tolerance) {
        out.status = SolveStatus::kInfeasibleCertificate;
        out.message = "primal infeasibility certificate: normalized dual ray residual " +
                      std::to_string(ray * bnorm / dobj);
        break;
      }
    }
    if (iter >= config_.max_iterations) {
      out.status = SolveStatus::kIterationLimit;
      out.message = "iteration limit reached";
      break;
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (elapsed > config_.time_limit_seconds) {
      out.status = SolveStatus::kIterationLimit;
      out.message = "time limit reached";
      break;
    }

    bool ok = true;
    for (size_t k = 0; k < blocks_.size() && ok; ++k) {
      Eigen::LLT<Mat> llt(s_[k]);
      if (llt.info() != Eigen::Success) {
        ok = false;
        break;
      }
      zinv_[k] = Sym(llt.solve(Mat::Identity(blocks_[k].n, blocks_[k].n)));
    }
    if (!ok || !FactorSystem()) {
      out.status = SolveStatus::kNumericalFailure;
      out.message = "singular Newton system";
      break;
    }

    std::vector<Mat> xrdz(blocks_.size());
    for (size_t k = 0; k < blocks_.size(); ++k) xrdz[k] = x_[k] * rd_[k] * zinv_[k];
    const Vec base_rhs = rp_ + ApplyA(xrdz);

    // Predictor.
    std::vector<Mat> g(blocks_.size());
    for (size_t k = 0; k < blocks_.size(); ++k) g[k] = -x_[k];
    const Direction pred = SolveDirection(g, base_rhs);
    double ap = kInf, ad = kInf;
    for (size_t k = 0; k < blocks_.size(); ++k) {
      ap = std::min(ap, MaxStep(x_[k], pred.dx[k]));
      ad = std::min(ad, MaxStep(s_[k], pred.ds[k]));
    }
    ap = std::min(1.0, ap);
    ad = std::min(1.0, ad);
    double gap_aff = 0.0;
    for (size_t k = 0; k < blocks_.size(); ++k) {
      gap_aff += ((x_[k] + ap * pred.dx[k]).cwiseProduct(s_[k] + ad * pred.ds[k])).sum();
    }
    const double mu_aff = gap_aff / total_dim_;
    const double expo = std::max(1.0, 3.0 * std::min(ap, ad) * std::min(ap, ad));
    double sigma = mu > 0 ? std::pow(std::max(0.0, mu_aff) / mu, expo) : 0.0;
    sigma = std::clamp(sigma, 0.0, 1.0);

    // Corrector.
    for (size_t k = 0; k < blocks_.size(); ++k) {
      g[k] = Sym(sigma * mu * zinv_[k] - x_[k] - pred.dx[k] * pred.ds[k] * zinv_[k]);
    }
    const Direction dir = SolveDirection(g, base_rhs);
    double max_p = kInf, max_d = kInf;
    for (size_t k = 0; k < blocks_.size(); ++k) {
      max_p = std::min(max_p, MaxStep(x_[k], dir.dx[k]));
      max_d = std::min(max_d, MaxStep(s_[k], dir.ds[k]));
    }
    const double step_p = std::min(1.0, config_.step_fraction * max_p);
    const double step_d = std::min(1.0, config_.step_fraction * max_d);
    if (!std::isfinite(step_p) || !std::isfinite(step_d)) {
      out.status = SolveStatus::kNumericalFailure;
      out.message = "non-finite step";
      break;
    }
    if (config_.verbose) {
      std::fprintf(stderr, "    step %.2e %.2e sigma %.2e\n", step_p, step_d, sigma);
    }
    for (size_t k = 0; k < blocks_.size(); ++k) {
      x_[k] = Sym(x_[k] + step_p * dir.dx[k]);
      s_[k] = Sym(s_[k] + step_d * dir.ds[k]);
    }
    z_ += step_p * dir.dz;
    y_ += step_d * dir.dy;

    stalled = (std::max(step_p, step_d) < 1e-8) ? stalled + 1 : 0;
    if (stalled >= 5) {
      out.status = SolveStatus::kNumericalFailure;
      out.message = "stalled: step lengths below 1e-8";
      out.iterations = iter + 1;
      break;
    }
  }

  out.dual = y_.head(rows_);
  out.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace

SolveOutcome InteriorPointBackend::Solve(const SdpProblem& problem,
                                         const SolverConfig& config) const {
  config.Validate();
  problem.Validate();
  return InteriorPoint(problem, config).Run();
}

}  // namespace reachavoid
