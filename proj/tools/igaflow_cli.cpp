// Command-line runner for the temporal-accuracy benchmark families.

#include <CLI11.hpp>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "igaflow/runner.hpp"

using namespace igaflow;

namespace {

void apply_preset(RunConfig& cfg, const std::string& name) {
  if (name == "es-desk") {
    cfg.benchmark = BenchmarkKind::EthierSteinman;
    cfg.p = 3;
    cfg.continuity = 2;
    cfg.nel = {6, 6, 6};
    cfg.nts_list = {5, 10, 20, 40};
    cfg.t_final = cfg.t_eval = 1.0;
  } else if (name == "es-paper") {
    // full-scale configuration; expensive (hours)
    cfg.benchmark = BenchmarkKind::EthierSteinman;
    cfg.p = 4;
    cfg.continuity = 3;
    cfg.nel = {25, 25, 25};
    cfg.nts_list = {10, 20, 40, 50, 80, 100};
    cfg.t_final = cfg.t_eval = 1.0;
  } else if (name == "womersley-desk") {
    cfg.benchmark = BenchmarkKind::Womersley;
    cfg.p = 3;
    cfg.continuity = 2;
    cfg.nel = {6, 6, 8};
    cfg.nts_list = {11, 22, 44};
    cfg.t_final = cfg.t_eval = 0.8;
  } else if (name == "womersley-paper") {
    // full-scale configuration; expensive
    cfg.benchmark = BenchmarkKind::Womersley;
    cfg.p = 4;
    cfg.continuity = 3;
    cfg.nel = {10, 10, 16};
    cfg.nts_list = {11, 22, 44, 88};
    cfg.t_final = cfg.t_eval = 0.8;
  } else {
    throw CLI::ValidationError("unknown preset: " + name);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"igaflow: generalized-alpha temporal accuracy benchmarks on "
               "inf-sup stable spline discretizations"};
  app.set_config("--config", "", "key=value config file (CLI flags override)");

  RunConfig cfg;
  std::string benchmark = "ethier_steinman", scheme = "scheme1";
  std::string preset, init = "project", policy = "reuse";
  std::vector<int> nel;
  std::vector<int> nts;

  app.add_option("--preset", preset,
                 "es-desk | es-paper | womersley-desk | womersley-paper");
  app.add_option("--benchmark", benchmark, "ethier_steinman | womersley");
  app.add_option("--scheme", scheme, "scheme1 | scheme2");
  app.add_option("--rho-inf", cfg.rho_inf, "spectral radius parameter in [0,1]");
  app.add_option("--p", cfg.p, "pressure degree (velocity is p+1)");
  app.add_option("--continuity", cfg.continuity, "interior continuity alpha");
  app.add_option("--nel", nel, "elements per direction (1 or 3 values)")
      ->expected(1, 3);
  app.add_option("--nts", nts, "time step counts (repeatable)")
      ->expected(1, 64);
  app.add_option("--t-final", cfg.t_final, "end time");
  app.add_option("--t-eval", cfg.t_eval, "error evaluation time");
  app.add_option("--out", cfg.out_path, "output report path");
  app.add_option("--format", cfg.format, "csv | json");
  app.add_flag("--profile-export", cfg.profile_export,
               "export Womersley axial-velocity profiles (finest nts run)");
  app.add_option("--profile-times", cfg.profile_times,
                 "sample times for --profile-export")
      ->expected(1, 64);
  app.add_flag("--dry-run", cfg.dry_run,
               "validate config and print space dimensions only");
  app.add_option("--init-mode", init,
                 "project (analytic-rate projections) | consistent");
  app.add_option("--tangent-policy", policy, "reuse | every-step | every-iteration");
  app.add_option("--reference-nts", cfg.reference_nts,
                 "if > 0, also report temporal errors vs a scheme2 reference "
                 "with this many steps");
  app.add_option("--newton-rel-tol", cfg.newton_rel_tol, "Newton relative tol");
  app.add_option("--newton-abs-tol", cfg.newton_abs_tol, "Newton absolute tol");
  app.add_option("--max-newton-iters", cfg.max_newton_iters, "Newton cap");

  CLI11_PARSE(app, argc, argv);

  try {
    if (!preset.empty()) apply_preset(cfg, preset);
    if (benchmark == "ethier_steinman")
      cfg.benchmark = BenchmarkKind::EthierSteinman;
    else if (benchmark == "womersley")
      cfg.benchmark = BenchmarkKind::Womersley;
    else
      throw std::invalid_argument("unknown benchmark: " + benchmark);
    if (scheme == "scheme1")
      cfg.scheme = Variant::Scheme1;
    else if (scheme == "scheme2")
      cfg.scheme = Variant::Scheme2;
    else
      throw std::invalid_argument("unknown scheme: " + scheme);
    if (!nel.empty()) {
      if (nel.size() == 1)
        cfg.nel = {nel[0], nel[0], nel[0]};
      else if (nel.size() == 3)
        cfg.nel = {nel[0], nel[1], nel[2]};
      else
        throw std::invalid_argument("--nel takes 1 or 3 values");
    }
    if (!nts.empty()) cfg.nts_list = nts;
    if (init == "project")
      cfg.init = InitMode::ProjectAnalytic;
    else if (init == "consistent")
      cfg.init = InitMode::ConsistentSolve;
    else
      throw std::invalid_argument("unknown init mode: " + init);
    if (policy == "reuse")
      cfg.policy = TangentPolicy::Reuse;
    else if (policy == "every-step")
      cfg.policy = TangentPolicy::EveryStep;
    else if (policy == "every-iteration")
      cfg.policy = TangentPolicy::EveryIteration;
    else
      throw std::invalid_argument("unknown tangent policy: " + policy);

    return run(cfg, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
