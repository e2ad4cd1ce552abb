#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "igaflow/benchmarks.hpp"
#include "igaflow/genalpha.hpp"
#include "igaflow/verify.hpp"

namespace igaflow {

enum class BenchmarkKind { EthierSteinman, Womersley };

struct RunConfig {
  BenchmarkKind benchmark = BenchmarkKind::EthierSteinman;
  Variant scheme = Variant::Scheme1;
  double rho_inf = 0.5;
  int p = 3;
  int continuity = 2;
  std::array<int, 3> nel = {6, 6, 6};
  std::vector<int> nts_list = {5, 10, 20, 40};
  double t_final = 1.0;
  double t_eval = 1.0;
  std::string out_path;
  std::string format = "csv";
  bool profile_export = false;
  std::vector<double> profile_times = {0.0, 0.2, 0.4, 0.6, 0.8};
  bool dry_run = false;
  InitMode init = InitMode::ProjectAnalytic;
  TangentPolicy policy = TangentPolicy::Reuse;
  int reference_nts = 0;  // > 0 adds temporal errors against a fine reference
  double newton_rel_tol = 1e-6;
  double newton_abs_tol = 1e-10;
  int max_newton_iters = 10;

  void validate() const;
  ConfigEcho echo() const;
  std::string benchmark_name() const;
  std::string scheme_name() const;
};

/// Everything a benchmark pins down: geometry, boundary partition, material,
/// boundary data, and the exact fields.
struct BenchmarkSetup {
  NurbsPatch patch;
  std::array<FaceType, 6> face_types;
  MaterialParams material;
  ProblemData problem;
  ExactFields exact;
};

BenchmarkSetup make_benchmark(BenchmarkKind kind);

/// Reusable context: space and assembler for one (benchmark, mesh) pair.
struct RunContext {
  BenchmarkSetup setup;
  MixedSpace space;
  std::unique_ptr<Assembler> assembler;

  RunContext(const RunConfig& cfg);
};

using StepObserver =
    std::function<void(const State& state, const StepStats& stats)>;

/// Integrate from the given initial state to t_final with uniform steps,
/// returning the state at t_eval (grid-aligned). The observer runs after
/// every accepted step.
State integrate(RunContext& ctx, const RunConfig& cfg, Variant scheme, int nts,
                const State& initial, const StepObserver& observer = {});

ErrorReport make_report(const RunContext& ctx, const RunConfig& cfg,
                        Variant scheme, int nts, const State& at_eval);

struct FamilyResult {
  std::vector<ErrorReport> reports;   // errors vs the exact solution
  std::vector<ErrorReport> temporal;  // vs fine-dt reference (optional)
  std::vector<std::array<double, 3>> profile;  // (time, x, v_z) samples
  double profile_vmax = 0.0;
  long total_newton_iters = 0;
  long total_factorizations = 0;
};

FamilyResult run_family(const RunConfig& cfg, std::ostream* log = nullptr);

/// Full CLI-style run: validate, run the family, write artifacts.
int run(const RunConfig& cfg, std::ostream& log);

}  // namespace igaflow
