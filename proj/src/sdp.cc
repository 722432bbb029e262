#include "reachavoid/sdp.h"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace reachavoid {

namespace {
const double kSqrt2 = std::sqrt(2.0);
}

Eigen::VectorXd Svec(const Eigen::MatrixXd& m) {
  const int n = static_cast<int>(m.rows());
  Eigen::VectorXd v(SvecSize(n));
  for (int p = 0; p < n; ++p) {
    for (int q = p; q < n; ++q) {
      v(SvecIndex(n, p, q)) = p == q ? m(p, p) : kSqrt2 * 0.5 * (m(p, q) + m(q, p));
    }
  }
  return v;
}

Eigen::MatrixXd Smat(const Eigen::VectorXd& v, int n) {
  if (v.size() != SvecSize(n)) throw std::invalid_argument("svec length mismatch");
  Eigen::MatrixXd m(n, n);
  for (int p = 0; p < n; ++p) {
    for (int q = p; q < n; ++q) {
      const double x = v(SvecIndex(n, p, q));
      if (p == q) {
        m(p, p) = x;
      } else {
        m(p, q) = m(q, p) = x / kSqrt2;
      }
    }
  }
  return m;
}

PsdBlock PsdBlock::Plain(int dim) {
  PsdBlock b;
  b.dim = dim;
  b.num_groups = SvecSize(dim);
  b.entry_group.resize(b.num_groups);
  for (int i = 0; i < b.num_groups; ++i) b.entry_group[i] = i;
  return b;
}

int SdpProblem::NumVariables() const {
  int n = num_free;
  for (const PsdBlock& b : blocks) n += SvecSize(b.dim);
  return n;
}

int SdpProblem::BlockOffset(int k) const {
  int off = 0;
  for (int i = 0; i < k; ++i) off += SvecSize(blocks[i].dim);
  return off;
}

bool SdpProblem::HasObjective() const {
  for (const auto& c : block_objective) {
    if (c.size() > 0 && c.cwiseAbs().maxCoeff() > 0) return true;
  }
  return free_objective.size() > 0 && free_objective.cwiseAbs().maxCoeff() > 0;
}

void SdpProblem::Validate() const {
  if (b.size() != num_rows) throw std::invalid_argument("b length != num_rows");
  if (block_rows.size() != blocks.size()) {
    throw std::invalid_argument("block_rows must have one entry per block");
  }
  std::vector<char> row_used(num_rows, 0);
  for (size_t k = 0; k < blocks.size(); ++k) {
    const PsdBlock& blk = blocks[k];
    if (blk.dim < 1) throw std::invalid_argument("PSD block dimension must be >= 1");
    if (static_cast<int>(blk.entry_group.size()) != SvecSize(blk.dim)) {
      throw std::invalid_argument("entry_group size mismatch");
    }
    for (int g : blk.entry_group) {
      if (g < 0 || g >= blk.num_groups) throw std::invalid_argument("group index out of range");
    }
    for (const Triplet& t : block_rows[k]) {
      if (t.row < 0 || t.row >= num_rows || t.col < 0 || t.col >= blk.num_groups) {
        throw std::invalid_argument("block coefficient out of range");
      }
      if (t.value != 0.0) row_used[t.row] = 1;
    }
  }
  for (const Triplet& t : free_rows) {
    if (t.row < 0 || t.row >= num_rows || t.col < 0 || t.col >= num_free) {
      throw std::invalid_argument("free coefficient out of range");
    }
    if (t.value != 0.0) row_used[t.row] = 1;
  }
  for (int i = 0; i < num_rows; ++i) {
    if (!row_used[i]) {
      throw std::invalid_argument("constraint row " + std::to_string(i) +
                                  " is identically zero");
    }
  }
  if (!block_objective.empty()) {
    if (block_objective.size() != blocks.size()) {
      throw std::invalid_argument("block objective count mismatch");
    }
    for (size_t k = 0; k < blocks.size(); ++k) {
      const auto& c = block_objective[k];
      if (c.size() > 0 && (c.rows() != blocks[k].dim || c.cols() != blocks[k].dim)) {
        throw std::invalid_argument("block objective size mismatch");
      }
    }
  }
  if (free_objective.size() != 0 && free_objective.size() != num_free) {
    throw std::invalid_argument("free objective length mismatch");
  }
}

std::vector<Triplet> SdpProblem::SvecTriplets() const {
  std::map<std::pair<int, int>, double> acc;
  for (size_t k = 0; k < blocks.size(); ++k) {
    const PsdBlock& blk = blocks[k];
    const int off = BlockOffset(static_cast<int>(k));
    // Members of each group in svec coordinates.
    std::vector<std::vector<std::pair<int, double>>> members(blk.num_groups);
    for (int p = 0; p < blk.dim; ++p) {
      for (int q = p; q < blk.dim; ++q) {
        const int idx = SvecIndex(blk.dim, p, q);
        members[blk.entry_group[idx]].emplace_back(idx, p == q ? 1.0 : kSqrt2);
      }
    }
    for (const Triplet& t : block_rows[k]) {
      for (const auto& [idx, scale] : members[t.col]) {
        acc[{t.row, off + idx}] += t.value * scale;
      }
    }
  }
  const int foff = FreeOffset();
  for (const Triplet& t : free_rows) acc[{t.row, foff + t.col}] += t.value;
  std::vector<Triplet> out;
  out.reserve(acc.size());
  for (const auto& [key, v] : acc) {
    if (v != 0.0) out.push_back({key.first, key.second, v});
  }
  return out;
}

Eigen::VectorXd SdpProblem::SvecObjective() const {
  Eigen::VectorXd c = Eigen::VectorXd::Zero(NumVariables());
  for (size_t k = 0; k < block_objective.size(); ++k) {
    if (block_objective[k].size() == 0) continue;
    c.segment(BlockOffset(static_cast<int>(k)), SvecSize(blocks[k].dim)) =
        Svec(block_objective[k]);
  }
  if (free_objective.size() == num_free && num_free > 0) {
    c.tail(num_free) = free_objective;
  }
  return c;
}

SdpProblem SdpProblem::FromSvec(const std::vector<int>& block_dims, int num_free,
                                int num_rows, const std::vector<Triplet>& a,
                                const Eigen::VectorXd& b,
                                const Eigen::VectorXd& c) {
  SdpProblem prob;
  prob.num_free = num_free;
  prob.num_rows = num_rows;
  prob.b = b;
  std::vector<int> offsets;
  int off = 0;
  for (int d : block_dims) {
    prob.blocks.push_back(PsdBlock::Plain(d));
    offsets.push_back(off);
    off += SvecSize(d);
  }
  const int total = off + num_free;
  std::vector<std::vector<char>> diagonal_flags;
  for (int d : block_dims) {
    std::vector<char> flags(SvecSize(d), 0);
    for (int p = 0; p < d; ++p) flags[SvecIndex(d, p, p)] = 1;
    diagonal_flags.push_back(std::move(flags));
  }
  prob.block_rows.resize(block_dims.size());
  for (const Triplet& t : a) {
    if (t.col < 0 || t.col >= total || t.row < 0 || t.row >= num_rows) {
      throw std::invalid_argument("svec triplet out of range");
    }
    if (t.col >= off) {
      prob.free_rows.push_back({t.row, t.col - off, t.value});
      continue;
    }
    size_t k = 0;
    while (k + 1 < offsets.size() && t.col >= offsets[k + 1]) ++k;
    const int local = t.col - offsets[k];
    const bool diagonal = diagonal_flags[k][local];
    prob.block_rows[k].push_back({t.row, local, diagonal ? t.value : t.value / kSqrt2});
  }
  if (c.size() > 0) {
    if (c.size() != total) throw std::invalid_argument("objective length mismatch");
    prob.block_objective.resize(block_dims.size());
    for (size_t k = 0; k < block_dims.size(); ++k) {
      prob.block_objective[k] = Smat(c.segment(offsets[k], SvecSize(block_dims[k])), block_dims[k]);
    }
    prob.free_objective = c.tail(num_free);
  }
  return prob;
}

void WriteSdpDump(const SdpProblem& problem, std::ostream& out) {
  char buf[64];
  auto num = [&buf](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  out << "reachavoid-sdp 1\n";
  out << "blocks " << problem.blocks.size() << "\n";
  for (size_t k = 0; k < problem.blocks.size(); ++k) {
    out << (k ? " " : "") << problem.blocks[k].dim;
  }
  out << "\nfree " << problem.num_free << "\n";
  out << "rows " << problem.num_rows << "\n";
  out << "b\n";
  for (int i = 0; i < problem.num_rows; ++i) out << num(problem.b(i)) << "\n";
  const auto a = problem.SvecTriplets();
  out << "A " << a.size() << "\n";
  for (const Triplet& t : a) out << t.row << " " << t.col << " " << num(t.value) << "\n";
  const Eigen::VectorXd c = problem.SvecObjective();
  int nnz = 0;
  for (int i = 0; i < c.size(); ++i) nnz += c(i) != 0.0;
  out << "c " << nnz << "\n";
  for (int i = 0; i < c.size(); ++i) {
    if (c(i) != 0.0) out << i << " " << num(c(i)) << "\n";
  }
  out << "end\n";
}

SdpProblem ReadSdpDump(std::istream& in) {
  auto expect = [&in](const std::string& word) {
    std::string tok;
    if (!(in >> tok) || tok != word) {
      throw std::runtime_error("SDP dump: expected '" + word + "', got '" + tok + "'");
    }
  };
  expect("reachavoid-sdp");
  int version = 0;
  in >> version;
  if (version != 1) throw std::runtime_error("SDP dump: unsupported version");
  expect("blocks");
  size_t nblocks = 0;
  in >> nblocks;
  std::vector<int> dims(nblocks);
  for (auto& d : dims) in >> d;
  int nfree = 0, nrows = 0;
  expect("free");
  in >> nfree;
  expect("rows");
  in >> nrows;
  expect("b");
  Eigen::VectorXd b(nrows);
  for (int i = 0; i < nrows; ++i) in >> b(i);
  expect("A");
  size_t nnz = 0;
  in >> nnz;
  std::vector<Triplet> a(nnz);
  for (auto& t : a) in >> t.row >> t.col >> t.value;
  expect("c");
  size_t cnnz = 0;
  in >> cnnz;
  int total = nfree;
  for (int d : dims) total += SvecSize(d);
  Eigen::VectorXd c = Eigen::VectorXd::Zero(total);
  for (size_t i = 0; i < cnnz; ++i) {
    int idx = 0;
    double v = 0;
    in >> idx >> v;
    if (idx < 0 || idx >= total) throw std::runtime_error("SDP dump: objective index out of range");
    c(idx) = v;
  }
  expect("end");
  if (!in) throw std::runtime_error("SDP dump: truncated input");
  return SdpProblem::FromSvec(dims, nfree, nrows, a, b, cnnz ? c : Eigen::VectorXd());
}

void SolverConfig::Validate() const {
  if (max_iterations <= 0 || !(feasibility_tolerance > 0) || !(gap_tolerance > 0) ||
      !(time_limit_seconds > 0)) {
    throw std::invalid_argument("solver tolerances and limits must be positive");
  }
  if (!(step_fraction > 0 && step_fraction < 1)) {
    throw std::invalid_argument("step fraction must lie in (0, 1)");
  }
}

const char* ToString(SolveStatus status) {
  switch (status) {
    case SolveStatus::kFeasible: return "Feasible";
    case SolveStatus::kInfeasibleCertificate: return "InfeasibleCertificate";
    case SolveStatus::kIterationLimit: return "IterationLimit";
    case SolveStatus::kNumericalFailure: return "NumericalFailure";
  }
  return "Unknown";
}

ResidualReport CheckSolution(const SdpProblem& problem,
                             const Eigen::VectorXd& solution) {
  if (solution.size() != problem.NumVariables()) {
    throw std::invalid_argument("solution length mismatch");
  }
  ResidualReport rep;
  Eigen::VectorXd ax = Eigen::VectorXd::Zero(problem.num_rows);
  for (const Triplet& t : problem.SvecTriplets()) ax(t.row) += t.value * solution(t.col);
  const Eigen::VectorXd r = ax - problem.b;
  rep.equality_residual = r.size() ? r.cwiseAbs().maxCoeff() : 0.0;
  const double bnorm = problem.b.size() ? problem.b.cwiseAbs().maxCoeff() : 0.0;
  rep.relative_equality_residual = rep.equality_residual / (1.0 + bnorm);
  rep.min_eigenvalue = std::numeric_limits<double>::infinity();
  rep.min_relative_eigenvalue = std::numeric_limits<double>::infinity();
  for (size_t k = 0; k < problem.blocks.size(); ++k) {
    const int n = problem.blocks[k].dim;
    const Eigen::MatrixXd x =
        Smat(solution.segment(problem.BlockOffset(static_cast<int>(k)), SvecSize(n)), n);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(x, Eigen::EigenvaluesOnly);
    const double lmin = es.eigenvalues()(0);
    rep.block_min_eigenvalues.push_back(lmin);
    rep.min_eigenvalue = std::min(rep.min_eigenvalue, lmin);
    rep.min_relative_eigenvalue = std::min(rep.min_relative_eigenvalue, lmin / (1.0 + x.norm()));
  }
  if (problem.blocks.empty()) rep.min_eigenvalue = rep.min_relative_eigenvalue = 0.0;
  return rep;
}

SolveOutcome ExternalBackend::Solve(const SdpProblem& problem,
                                    const SolverConfig& config) const {
  namespace fs = std::filesystem;
  const auto start = std::chrono::steady_clock::now();
  SolveOutcome out;
  out.backend = Name();
  std::random_device rd;
  const std::string tag = std::to_string(rd()) + std::to_string(rd());
  const fs::path dump = fs::temp_directory_path() / ("reachavoid_sdp_" + tag + ".txt");
  const fs::path sol = fs::temp_directory_path() / ("reachavoid_sol_" + tag + ".txt");
  {
    std::ofstream f(dump);
    WriteSdpDump(problem, f);
  }
  std::ostringstream cmd;
  cmd << command_ << " '" << dump.string() << "' '" << sol.string() << "'"
      << " --tolerance " << config.feasibility_tolerance;
  const int rc = std::system(cmd.str().c_str());
  std::ifstream f(sol);
  std::string word, status;
  if (rc != 0 || !(f >> word >> status) || word != "status") {
    out.status = SolveStatus::kNumericalFailure;
    out.message = "external solver failed (exit code " + std::to_string(rc) + ")";
  } else if (status == "feasible") {
    int n = 0;
    f >> word >> n;
    if (word != "x" || n != problem.NumVariables()) {
      out.status = SolveStatus::kNumericalFailure;
      out.message = "external solver returned a malformed solution";
    } else {
      out.primal.resize(n);
      for (int i = 0; i < n; ++i) f >> out.primal(i);
      out.status = SolveStatus::kFeasible;
      const ResidualReport rep = CheckSolution(problem, out.primal);
      out.primal_residual = rep.relative_equality_residual;
    }
  } else if (status == "infeasible") {
    out.status = SolveStatus::kInfeasibleCertificate;
  } else {
    out.status = SolveStatus::kNumericalFailure;
    out.message = "external solver status: " + status;
  }
  std::error_code ec;
  fs::remove(dump, ec);
  fs::remove(sol, ec);
  out.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

SolveOutcome Solve(const SdpProblem& problem, const SolverConfig& config) {
  return InteriorPointBackend().Solve(problem, config);
}

}  // namespace reachavoid
