// Command-line front end: verify, simulate, bench, fixture.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "reachavoid/driver.h"
#include "reachavoid/fixtures.h"
#include "reachavoid/poly_parse.h"
#include "reachavoid/problem_io.h"

namespace {

using nlohmann::json;
using namespace reachavoid;

constexpr int kExitVerified = 0;
constexpr int kExitNotVerified = 1;
constexpr int kExitInputError = 2;

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SolverFlags {
  std::string external;
  bool external_fallback = false;
  bool external_only = false;
  double budget = 600.0;
  int max_iterations = 200;
};

void AddSolverFlags(CLI::App* cmd, SolverFlags* s) {
  cmd->add_option("--external-solver", s->external,
                  "Command for the external SDP backend, e.g. \"python3 tools/external_solve.py\"");
  cmd->add_flag("--external-fallback", s->external_fallback,
                "Retry cells the built-in solver cannot verify with the external backend");
  cmd->add_flag("--external-only", s->external_only, "Use only the external backend");
  cmd->add_option("--cell-budget", s->budget, "Wall-clock seconds per sweep cell")
      ->capture_default_str();
  cmd->add_option("--max-iterations", s->max_iterations, "Interior-point iteration cap")
      ->capture_default_str();
}

void ApplySolverFlags(const SolverFlags& s, DriverConfig* c) {
  c->external_solver = s.external;
  c->external_fallback = s.external_fallback;
  c->external_only = s.external_only;
  c->cell_budget_seconds = s.budget;
  c->solver.max_iterations = s.max_iterations;
}

ProblemFile LoadInput(const std::string& path, const std::string& suite) {
  if (!path.empty() && !suite.empty()) throw InputError("give either --problem or --suite");
  if (!suite.empty()) {
    ProblemFile f;
    try {
      f.instance = FixtureInstance(suite);
    } catch (const std::invalid_argument& e) {
      throw InputError(e.what());
    }
    return f;
  }
  if (path.empty()) throw InputError("--problem is required");
  try {
    return LoadProblem(path);
  } catch (const ProblemError& e) {
    throw InputError(e.what());
  }
}

std::vector<int> ParseDegrees(const std::string& text, int max_degree) {
  if (text == "sweep") return DegreePlan::Sweep(max_degree).degrees;
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      size_t used = 0;
      out.push_back(std::stoi(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw InputError("--degrees must be \"sweep\" or a comma list of even integers");
    }
  }
  return out;
}

void WriteJson(const json& j, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << j.dump(2) << "\n";
    return;
  }
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << j.dump(2) << "\n";
}

std::string StemOf(const std::string& out_path) {
  if (out_path.empty() || out_path == "-") return "levelset";
  std::filesystem::path p(out_path);
  return (p.parent_path() / p.stem()).string();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reach-avoid verification with guidance-barrier certificates"};
  app.require_subcommand(1);

  // verify
  auto* verify = app.add_subcommand("verify", "Run a degree sweep for one method");
  std::string problem_path, suite, method_name, alpha_m, degrees_text, out_path;
  double beta = 0.0, eps = 1e-6;
  bool trust = false, split_p = false, volume = false, timings = false;
  int grid = 0, max_degree = 20, sim_samples = 500, val_samples = 10000;
  std::uint64_t seed = 1;
  SolverFlags vflags;
  verify->add_option("--problem", problem_path, "Problem JSON file");
  verify->add_option("--suite", suite, "Built-in benchmark instead of a problem file");
  verify->add_option("--method", method_name, "prajna, exp, asym, combined or general");
  verify->add_option("--beta", beta, "Rate for exp and combined");
  verify->add_option("--alpha-m", alpha_m, "Template m in alpha = m v for general");
  verify->add_option("--degrees", degrees_text,
                     "\"sweep\" (2,4,...,max) or a comma list, e.g. 6,8")
      ->default_str("sweep");
  verify->add_option("--max-degree", max_degree, "Upper end of the sweep")->capture_default_str();
  verify->add_option("--eps", eps, "Strictness margin")->capture_default_str();
  verify->add_flag("--trust-solver", trust, "Accept solver success without validation");
  verify->add_option("--grid", grid, "Level-set grid resolution per axis (0 = off)")
      ->capture_default_str();
  verify->add_option("--seed", seed, "Validation sampling seed")->capture_default_str();
  verify->add_option("--samples", val_samples, "Validation samples per constraint")
      ->capture_default_str();
  verify->add_option("--sim-samples", sim_samples, "Monte-Carlo trajectories for the winner")
      ->capture_default_str();
  verify->add_flag("--split-p", split_p, "Separate boundary multipliers for combined");
  verify->add_flag("--volume-objective", volume, "Maximize the integral of v over the box");
  verify->add_flag("--timings", timings, "Include wall-clock times in the report");
  verify->add_option("--out", out_path, "Report path (default stdout)");
  AddSolverFlags(verify, &vflags);

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Monte-Carlo reach-avoid check from X0");
  std::string sim_problem, sim_suite, sim_out, traj_out;
  int samples = 500;
  double horizon = 100.0;
  std::uint64_t sim_seed = 7;
  simulate->add_option("--problem", sim_problem, "Problem JSON file");
  simulate->add_option("--suite", sim_suite, "Built-in benchmark instead of a problem file");
  simulate->add_option("--samples", samples, "Number of initial states")->capture_default_str();
  simulate->add_option("--horizon", horizon, "Time horizon")->capture_default_str();
  simulate->add_option("--seed", sim_seed, "Sampling seed")->capture_default_str();
  simulate->add_option("--traj-out", traj_out, "CSV of all trajectories");
  simulate->add_option("--out", sim_out, "Summary path (default stdout)");

  // bench
  auto* bench = app.add_subcommand("bench", "Compare methods on built-in benchmarks");
  std::string bench_suite = "all", bench_out = "bench_out";
  int bench_max = 0;
  SolverFlags bflags;
  bool bench_timings = false;
  bench->add_option("--suite", bench_suite, "Suite name or all")->capture_default_str();
  bench->add_option("--out", bench_out, "Output directory")->capture_default_str();
  bench->add_option("--max-degree", bench_max, "Cap on every sweep (0 = suite default)");
  bench->add_flag("--timings", bench_timings, "Include wall-clock times");
  AddSolverFlags(bench, &bflags);

  // fixture
  auto* fixture = app.add_subcommand("fixture", "Write a built-in benchmark as a problem file");
  std::string fixture_suite, fixture_out;
  fixture->add_option("--suite", fixture_suite, "Suite name")->required();
  fixture->add_option("--out", fixture_out, "Output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInputError;
  }

  try {
    if (*verify) {
      ProblemFile file = LoadInput(problem_path, suite);
      const MethodDefaults& d = file.defaults;
      if (method_name.empty()) method_name = d.method.value_or("");
      if (method_name.empty()) throw InputError("--method is required");
      MethodKind kind;
      try {
        kind = ParseMethodKind(method_name);
      } catch (const std::invalid_argument& e) {
        throw InputError(e.what());
      }
      const bool has_beta = verify->count("--beta") > 0;
      const bool has_alpha = verify->count("--alpha-m") > 0;
      const bool wants_beta = kind == MethodKind::kExpGbf || kind == MethodKind::kCombined;
      if (has_beta && !wants_beta) throw InputError("--beta only applies to exp and combined");
      if (has_alpha && kind != MethodKind::kGeneralGbf) {
        throw InputError("--alpha-m only applies to general");
      }
      if (!has_beta && wants_beta && d.beta) beta = *d.beta;
      if (!has_alpha && kind == MethodKind::kGeneralGbf && d.alpha_m) alpha_m = *d.alpha_m;
      if (wants_beta && !has_beta && !d.beta) throw InputError(method_name + " requires --beta");
      if (kind == MethodKind::kGeneralGbf && alpha_m.empty()) {
        throw InputError("general requires --alpha-m");
      }
      Method method{kind, beta, std::nullopt};
      if (kind == MethodKind::kGeneralGbf) {
        try {
          method.alpha_multiplier = ParsePolynomial(alpha_m, file.instance.dimension);
        } catch (const std::exception& e) {
          throw InputError(std::string("--alpha-m: ") + e.what());
        }
      }
      DriverConfig config;
      std::vector<int> degs;
      if (verify->count("--degrees") == 0 && d.degrees) {
        degs = *d.degrees;
      } else {
        degs = ParseDegrees(degrees_text.empty() ? "sweep" : degrees_text, max_degree);
      }
      config.plan.degrees = degs;
      config.build.eps = eps;
      config.build.split_boundary_multiplier = split_p;
      config.build.volume_objective = volume;
      config.trust_solver = trust;
      config.grid = grid;
      config.validation.seed = seed;
      config.validation.samples = val_samples;
      config.simulation_samples = sim_samples;
      ApplySolverFlags(vflags, &config);
      try {
        method.Validate();
        config.Validate();
        if (grid > 0 && file.instance.dimension > 3) {
          throw std::invalid_argument("level-set export unsupported above 3 dimensions");
        }
      } catch (const std::invalid_argument& e) {
        throw InputError(e.what());
      }
      VerificationReport report;
      try {
        report = RunSweep(file.instance, method, config);
      } catch (const std::invalid_argument& e) {
        throw InputError(e.what());
      }
      json j = ToJson(report, timings);
      if (report.level_set) {
        const std::string stem = StemOf(out_path);
        std::ofstream g(stem + "_grid.csv");
        report.level_set->WriteGridCsv(g);
        json paths = {stem + "_grid.csv"};
        if (report.level_set->dimension == 2) {
          std::ofstream s(stem + "_contour.csv");
          report.level_set->WriteSegmentsCsv(s);
          paths.push_back(stem + "_contour.csv");
        }
        j["level_set_files"] = paths;
      }
      WriteJson(j, out_path);
      std::fprintf(stderr, "%s %s: %s\n", report.instance_name.c_str(),
                   method.Label().c_str(), report.Verdict().c_str());
      return report.Verified() ? kExitVerified : kExitNotVerified;
    }

    if (*simulate) {
      ProblemFile file = LoadInput(sim_problem, sim_suite);
      if (samples < 0) throw InputError("--samples must be >= 0");
      SimConfig cfg;
      cfg.t_max = horizon;
      try {
        cfg.Validate();
      } catch (const std::invalid_argument& e) {
        throw InputError(e.what());
      }
      MonteCarloSummary summary;
      try {
        summary = MonteCarloReachAvoid(file.instance, samples, cfg, sim_seed);
      } catch (const SamplingError& e) {
        throw InputError(e.what());
      }
      if (!traj_out.empty() && samples > 0) {
        std::ofstream out(traj_out);
        if (!out) throw InputError("cannot write '" + traj_out + "'");
        const auto pts = Sample(file.instance.initial, samples,
                                file.instance.InitialSamplingBox(), sim_seed)
                             .points;
        out << "trajectory,";
        bool header = true;
        for (size_t k = 0; k < pts.size(); ++k) {
          std::ostringstream buf;
          WriteTrajectoryCsv(Integrate(file.instance, pts[k], cfg), buf);
          std::string line;
          std::istringstream lines(buf.str());
          std::getline(lines, line);
          if (header) out << line << "\n";
          header = false;
          while (std::getline(lines, line)) out << k << "," << line << "\n";
        }
      }
      WriteJson(ToJson(summary), sim_out);
      return kExitVerified;
    }

    if (*bench) {
      std::vector<std::string> suites;
      if (bench_suite == "all") {
        suites = SuiteNames();
      } else {
        try {
          FixtureInstance(bench_suite);
        } catch (const std::invalid_argument& e) {
          throw InputError(e.what());
        }
        suites = {bench_suite};
      }
      std::filesystem::create_directories(bench_out);
      bool all_match = true;
      for (const std::string& s : suites) {
        const ProblemInstance inst = FixtureInstance(s);
        json table = json::array();
        json reports = json::array();
        for (const BenchCell& cell : SuiteGrid(s)) {
          DriverConfig config;
          ApplySolverFlags(bflags, &config);
          const int top = bench_max > 0 ? std::min(bench_max, cell.max_degree) : cell.max_degree;
          config.plan = DegreePlan::Sweep(top);
          const VerificationReport r = RunSweep(inst, cell.method, config);
          json row = ComparisonTable({r})[0];
          row["reference_degree"] =
              cell.reference_degree ? json(*cell.reference_degree) : json(nullptr);
          table.push_back(row);
          reports.push_back(ToJson(r, bench_timings));
          std::fprintf(stderr, "%s %-28s %s\n", s.c_str(), cell.method.Label().c_str(),
                       r.Verdict().c_str());
          all_match = all_match && (r.Verified() == cell.reference_degree.has_value());
        }
        WriteJson({{"suite", s}, {"table", table}, {"reports", reports}},
                  (std::filesystem::path(bench_out) / (s + ".json")).string());
      }
      return all_match ? kExitVerified : kExitNotVerified;
    }

    if (*fixture) {
      ProblemFile f;
      try {
        f.instance = FixtureInstance(fixture_suite);
      } catch (const std::invalid_argument& e) {
        throw InputError(e.what());
      }
      WriteJson(SerializeProblem(f), fixture_out);
      return kExitVerified;
    }
  } catch (const InputError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitInputError;
  }
  return kExitInputError;
}
