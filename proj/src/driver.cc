#include "reachavoid/driver.h"

#include <chrono>
#include <cstdio>
#include <memory>
#include <stdexcept>

#include "reachavoid/problem_io.h"

namespace reachavoid {
namespace {

using Clock = std::chrono::steady_clock;
using nlohmann::json;

double Since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::vector<std::unique_ptr<SdpBackend>> Backends(const DriverConfig& config) {
  std::vector<std::unique_ptr<SdpBackend>> out;
  if (!config.external_only) out.push_back(std::make_unique<InteriorPointBackend>());
  if (!config.external_solver.empty() && (config.external_only || config.external_fallback)) {
    out.push_back(std::make_unique<ExternalBackend>(config.external_solver));
  }
  return out;
}

SweepCell RunCell(const ProblemInstance& instance, const Method& method, int degree,
                  const DriverConfig& config, std::optional<Certificate>* winner) {
  SweepCell cell;
  cell.method = method;
  cell.degree = degree;
  auto t0 = Clock::now();
  SosProgram program = BuildProgram(instance, method, degree, config.build);
  cell.build_seconds = Since(t0);
  cell.rows = program.sdp.num_rows;
  cell.variables = program.sdp.NumVariables();

  SolverConfig solver = config.solver;
  solver.time_limit_seconds = std::min(solver.time_limit_seconds, config.cell_budget_seconds);
  for (const auto& backend : Backends(config)) {
    t0 = Clock::now();
    SolveOutcome out;
    try {
      out = backend->Solve(program.sdp, solver);
    } catch (const std::exception& e) {
      out.status = SolveStatus::kNumericalFailure;
      out.message = e.what();
    }
    const double secs = Since(t0);
    cell.solve_seconds += secs;
    cell.attempts.push_back({backend->Name(), ToString(out.status), out.iterations,
                             out.primal_residual, secs, out.message});
    cell.backend = backend->Name();
    cell.solver_status = ToString(out.status);
    cell.solver_success = out.status == SolveStatus::kFeasible;
    cell.message = out.message;
    if (!cell.solver_success) continue;

    t0 = Clock::now();
    Certificate cert = Reconstruct(program, out.primal);
    cert.solver = {ToString(out.status), backend->Name(), out.iterations, out.wall_seconds,
                   out.primal_residual};
    try {
      cell.validation = Validate(cert, instance, config.validation);
    } catch (const SamplingError& e) {
      cell.validation.reset();
      cell.message = std::string("validation sampling failed: ") + e.what();
    }
    cell.validate_seconds += Since(t0);
    const bool valid = cell.validation && cell.validation->Pass();
    cell.verified = config.trust_solver || valid;
    if (cell.verified) {
      *winner = std::move(cert);
      return cell;
    }
  }
  return cell;
}

json CellJson(const SweepCell& cell, bool timings) {
  json attempts = json::array();
  for (const SolveAttempt& a : cell.attempts) {
    json j = {{"backend", a.backend},
              {"status", a.status},
              {"iterations", a.iterations},
              {"primal_residual", a.primal_residual}};
    if (!a.message.empty()) j["message"] = a.message;
    if (timings) j["seconds"] = a.seconds;
    attempts.push_back(j);
  }
  json j = {{"method", cell.method.Label()},
            {"degree", cell.degree},
            {"rows", cell.rows},
            {"variables", cell.variables},
            {"backend", cell.backend},
            {"solver_status", cell.solver_status},
            {"solver_success", cell.solver_success},
            {"attempts", attempts},
            {"verified", cell.verified}};
  if (cell.validation) j["validation"] = ToJson(*cell.validation);
  if (!cell.message.empty()) j["message"] = cell.message;
  if (timings) {
    j["build_seconds"] = cell.build_seconds;
    j["solve_seconds"] = cell.solve_seconds;
    j["validate_seconds"] = cell.validate_seconds;
  }
  return j;
}

}  // namespace

void DriverConfig::Validate() const {
  plan.Validate();
  solver.Validate();
  sim.Validate();
  if (!(cell_budget_seconds > 0.0)) throw std::invalid_argument("cell budget must be positive");
  if (simulation_samples < 0) throw std::invalid_argument("simulation samples must be >= 0");
  if (grid < 0) throw std::invalid_argument("grid resolution must be >= 0");
  if (external_only && external_solver.empty()) {
    throw std::invalid_argument("external-only mode needs an external solver command");
  }
  if (validation.samples <= 0) throw std::invalid_argument("validation samples must be positive");
}

std::string VerificationReport::Verdict() const {
  if (verified_degree) return "verified at degree " + std::to_string(*verified_degree);
  return "not verified up to degree " + std::to_string(max_degree);
}

std::string InstanceDigest(const ProblemInstance& instance) {
  ProblemFile file;
  file.instance = instance;
  const std::string text = SerializeProblem(file).dump();
  std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

VerificationReport RunSweep(const ProblemInstance& instance, const Method& method,
                            const DriverConfig& config) {
  instance.Validate();
  method.Validate();
  config.Validate();
  VerificationReport report;
  report.instance_name = instance.name;
  report.instance_digest = InstanceDigest(instance);
  report.method = method;
  report.trust_solver = config.trust_solver;
  for (int degree : config.plan.degrees) {
    report.max_degree = degree;
    std::optional<Certificate> winner;
    report.cells.push_back(RunCell(instance, method, degree, config, &winner));
    if (winner) {
      report.verified_degree = degree;
      report.certificate = std::move(winner);
      break;
    }
  }
  if (report.certificate) {
    if (config.simulation_samples > 0) {
      report.simulation = MonteCarloReachAvoid(instance, config.simulation_samples, config.sim,
                                               config.simulation_seed);
    }
    if (config.grid > 0 && instance.dimension <= 3) {
      report.level_set =
          ExtractLevelSet(report.certificate->Barrier(), config.grid, instance.bounding_box);
    }
  }
  return report;
}

std::vector<VerificationReport> CompareMethods(const ProblemInstance& instance,
                                               const std::vector<Method>& methods,
                                               const DriverConfig& config) {
  std::vector<VerificationReport> out;
  for (const Method& m : methods) out.push_back(RunSweep(instance, m, config));
  return out;
}

json ToJson(const Certificate& cert) {
  json polys = json::object();
  for (const auto& [name, p] : cert.polynomials) {
    if (name.rfind("sigma:", 0) == 0) continue;
    polys[name] = p.ToString();
  }
  json j = {{"method", cert.method.Label()},
            {"degree", cert.degree},
            {"eps", cert.eps},
            {"barrier", cert.Barrier().ToString()},
            {"polynomials", polys},
            {"solver",
             {{"status", cert.solver.status},
              {"backend", cert.solver.backend},
              {"iterations", cert.solver.iterations},
              {"primal_residual", cert.solver.primal_residual}}}};
  if (cert.method.UsesBeta()) j["beta"] = cert.method.beta;
  if (cert.method.alpha_multiplier) j["alpha_m"] = cert.method.alpha_multiplier->ToString();
  return j;
}

json ToJson(const MonteCarloSummary& s) {
  json ce = json::array();
  for (const Point& p : s.counterexamples) ce.push_back(p);
  return {{"samples", s.samples},
          {"reached", s.reached},
          {"exited", s.exited},
          {"timeout", s.timeout},
          {"numerical_failure", s.failed},
          {"min_safety_margin", s.samples ? s.min_safety_margin : 0.0},
          {"max_hitting_time", s.max_tau},
          {"seed", s.seed},
          {"counterexamples", ce}};
}

json ToJson(const VerificationReport& report, bool include_timings) {
  json cells = json::array();
  for (const SweepCell& c : report.cells) cells.push_back(CellJson(c, include_timings));
  json j = {{"report_version", 1},
            {"instance", report.instance_name},
            {"instance_digest", report.instance_digest},
            {"method", report.method.Label()},
            {"trust_solver", report.trust_solver},
            {"cells", cells},
            {"verified", report.Verified()},
            {"verdict", report.Verdict()}};
  if (report.verified_degree) {
    j["verified_degree"] = *report.verified_degree;
    j["backend"] = report.cells.back().backend;
  }
  if (report.certificate) j["certificate"] = ToJson(*report.certificate);
  if (report.simulation) j["simulation"] = ToJson(*report.simulation);
  return j;
}

json ComparisonTable(const std::vector<VerificationReport>& reports) {
  json rows = json::array();
  for (const VerificationReport& r : reports) {
    json row = {{"method", r.method.Label()},
                {"verdict", r.Verdict()},
                {"verified_degree", r.verified_degree ? json(*r.verified_degree) : json(nullptr)}};
    if (r.Verified()) row["backend"] = r.cells.back().backend;
    if (r.simulation) row["simulation_exited"] = r.simulation->exited;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace reachavoid
