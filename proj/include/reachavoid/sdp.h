#pragma once

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace reachavoid {

/// Number of entries of svec for an n x n symmetric matrix.
inline int SvecSize(int n) { return n * (n + 1) / 2; }
/// Position of entry (p, q), p <= q, in svec: upper triangle, row by row.
inline int SvecIndex(int n, int p, int q) {
  return p * n - p * (p - 1) / 2 + (q - p);
}

/// svec with off-diagonal entries scaled by sqrt(2), so that
/// Svec(A).dot(Svec(B)) == <A, B>_F.
Eigen::VectorXd Svec(const Eigen::MatrixXd& m);
Eigen::MatrixXd Smat(const Eigen::VectorXd& v, int n);

/// A PSD matrix variable. Its upper-triangular entries are partitioned into
/// coefficient groups; a constraint row only sees the block through the group
/// sums <E_g, X> = sum of X(p, q) over all ordered pairs (p, q) in group g.
/// Gram matrices of SOS polynomials use one group per product monomial.
struct PsdBlock {
  int dim = 0;
  int num_groups = 0;
  /// Group of the upper-triangular entry at SvecIndex(dim, p, q).
  std::vector<int> entry_group;

  /// One group per svec entry (generic SDP data).
  static PsdBlock Plain(int dim);
};

struct Triplet {
  int row;
  int col;
  double value;
};

/// Standard-form SDP:
///   minimize   sum_k <C_k, X_k> + c_free . z
///   subject to sum_k A_k(X_k) + B z = b,  X_k PSD,  z free.
/// A_k is stored as row coefficients on the block's groups.
struct SdpProblem {
  std::vector<PsdBlock> blocks;
  int num_free = 0;
  int num_rows = 0;
  /// Per block: (row, group, coefficient on <E_group, X_k>).
  std::vector<std::vector<Triplet>> block_rows;
  /// (row, free variable, coefficient).
  std::vector<Triplet> free_rows;
  Eigen::VectorXd b;
  /// Per block objective matrices; empty vector means zero objective.
  std::vector<Eigen::MatrixXd> block_objective;
  Eigen::VectorXd free_objective;

  /// Length of the global variable vector [svec(X_1) .. svec(X_K), z].
  int NumVariables() const;
  int BlockOffset(int k) const;
  int FreeOffset() const { return NumVariables() - num_free; }
  bool HasObjective() const;

  /// Throws std::invalid_argument if dimensions are inconsistent, a block has
  /// dimension < 1, or a row has no nonzero coefficient.
  void Validate() const;

  /// The constraint map as triplets over the global svec variable vector.
  std::vector<Triplet> SvecTriplets() const;
  /// Objective over the global svec variable vector (dense).
  Eigen::VectorXd SvecObjective() const;

  /// Builds a problem with plain blocks from svec-coordinate data.
  static SdpProblem FromSvec(const std::vector<int>& block_dims, int num_free,
                             int num_rows, const std::vector<Triplet>& a,
                             const Eigen::VectorXd& b,
                             const Eigen::VectorXd& c = Eigen::VectorXd());
};

/// Plain-text sparse dump: block sizes, free count, b, A triplets and c over
/// the global svec vector. WriteSdpDump/ReadSdpDump round-trip exactly.
void WriteSdpDump(const SdpProblem& problem, std::ostream& out);
SdpProblem ReadSdpDump(std::istream& in);

struct SolverConfig {
  int max_iterations = 200;
  double feasibility_tolerance = 1e-8;
  double gap_tolerance = 1e-8;
  double step_fraction = 0.98;
  double time_limit_seconds = 600.0;
  bool verbose = false;

  void Validate() const;
};

enum class SolveStatus {
  kFeasible,  // also "optimal" when the problem has an objective
  kInfeasibleCertificate,
  kIterationLimit,
  kNumericalFailure,
};

const char* ToString(SolveStatus status);

struct SolveOutcome {
  SolveStatus status = SolveStatus::kNumericalFailure;
  /// Global primal vector [svec(X_1) .. svec(X_K), z]; empty unless feasible.
  Eigen::VectorXd primal;
  Eigen::VectorXd dual;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double gap = 0.0;
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  int iterations = 0;
  double wall_seconds = 0.0;
  std::string backend;
  std::string message;
};

/// Recomputed independently of any solver internals.
struct ResidualReport {
  double equality_residual = 0.0;  // ||Ax - b||_inf
  double relative_equality_residual = 0.0;  // divided by (1 + ||b||_inf)
  std::vector<double> block_min_eigenvalues;
  double min_eigenvalue = 0.0;
  /// Per block min eigenvalue relative to (1 + ||X_k||_F).
  double min_relative_eigenvalue = 0.0;
};

ResidualReport CheckSolution(const SdpProblem& problem,
                             const Eigen::VectorXd& solution);

/// Replaceable SDP backend.
class SdpBackend {
 public:
  virtual ~SdpBackend() = default;
  virtual std::string Name() const = 0;
  virtual SolveOutcome Solve(const SdpProblem& problem,
                             const SolverConfig& config) const = 0;
};

/// Built-in primal-dual interior-point method (HKM direction, Mehrotra
/// predictor-corrector, infeasible start).
class InteriorPointBackend : public SdpBackend {
 public:
  std::string Name() const override { return "builtin-ipm"; }
  SolveOutcome Solve(const SdpProblem& problem,
                     const SolverConfig& config) const override;
};

/// Runs an external command on a sparse dump. The command is invoked as
/// `<command> <dump path> <solution path>` and must write
///   status <feasible|infeasible|failed>
///   x <n>  followed by n values
/// to the solution path.
class ExternalBackend : public SdpBackend {
 public:
  explicit ExternalBackend(std::string command) : command_(std::move(command)) {}
  std::string Name() const override { return "external:" + command_; }
  SolveOutcome Solve(const SdpProblem& problem,
                     const SolverConfig& config) const override;

 private:
  std::string command_;
};

/// Convenience wrapper around InteriorPointBackend.
SolveOutcome Solve(const SdpProblem& problem, const SolverConfig& config = {});

}  // namespace reachavoid
