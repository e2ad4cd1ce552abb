#include "igaflow/runner.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

namespace igaflow {

namespace {

std::string fmt_g(double x) {
  std::ostringstream os;
  os.precision(15);
  os << x;
  return os.str();
}

}  // namespace

void RunConfig::validate() const {
  require(p >= 1 && continuity >= 0 && continuity <= p - 1,
          "RunConfig: invalid degree/continuity");
  require(rho_inf >= 0.0 && rho_inf <= 1.0, "RunConfig: rho_inf outside [0,1]");
  for (int d = 0; d < 3; ++d) require(nel[d] >= 1, "RunConfig: nel must be >= 1");
  require(!nts_list.empty(), "RunConfig: empty nts list");
  require(t_final > 0.0 && t_eval > 0.0 && t_eval <= t_final + 1e-12,
          "RunConfig: need 0 < t_eval <= t_final");
  for (int nts : nts_list) {
    require(nts >= 1, "RunConfig: nts must be >= 1");
    const double steps = t_eval / (t_final / nts);
    require(std::abs(steps - std::round(steps)) < 1e-9 * nts,
            "RunConfig: t_eval must land exactly on the time grid");
  }
  require(format == "csv" || format == "json", "RunConfig: format must be csv|json");
}

std::string RunConfig::benchmark_name() const {
  return benchmark == BenchmarkKind::EthierSteinman ? "ethier_steinman"
                                                    : "womersley";
}

std::string RunConfig::scheme_name() const {
  return scheme == Variant::Scheme1 ? "scheme1" : "scheme2";
}

ConfigEcho RunConfig::echo() const {
  ConfigEcho e;
  e.emplace_back("benchmark", benchmark_name());
  e.emplace_back("scheme", scheme_name());
  e.emplace_back("rho_inf", fmt_g(rho_inf));
  e.emplace_back("p", std::to_string(p));
  e.emplace_back("continuity", std::to_string(continuity));
  e.emplace_back("nel", std::to_string(nel[0]) + "," + std::to_string(nel[1]) +
                            "," + std::to_string(nel[2]));
  std::string nts;
  for (size_t i = 0; i < nts_list.size(); ++i)
    nts += (i ? "," : "") + std::to_string(nts_list[i]);
  e.emplace_back("nts", nts);
  e.emplace_back("t_final", fmt_g(t_final));
  e.emplace_back("t_eval", fmt_g(t_eval));
  e.emplace_back("init", init == InitMode::ProjectAnalytic ? "project" : "consistent");
  e.emplace_back("tangent_policy",
                 policy == TangentPolicy::EveryIteration ? "every-iteration"
                 : policy == TangentPolicy::EveryStep    ? "every-step"
                                                         : "reuse");
  e.emplace_back("newton_rel_tol", fmt_g(newton_rel_tol));
  e.emplace_back("newton_abs_tol", fmt_g(newton_abs_tol));
  if (reference_nts > 0)
    e.emplace_back("reference_nts", std::to_string(reference_nts));
  return e;
}

BenchmarkSetup make_benchmark(BenchmarkKind kind) {
  if (kind == BenchmarkKind::EthierSteinman) {
    EthierSteinman es;  // rho = 1, mu = 0.1 -> nu = 0.1
    const double mu = 0.1;
    BenchmarkSetup s{
        make_cube_patch({-1, -1, -1}, {1, 1, 1}, 1),
        {FaceType::Neumann, FaceType::Neumann, FaceType::Neumann,
         FaceType::Neumann, FaceType::Neumann, FaceType::Neumann},
        MaterialParams{es.rho, mu, nullptr},
        ProblemData{},
        ExactFields{}};
    s.problem.traction = [es, mu](const Vec3& x, double t, const Vec3& n) {
      return es_traction(es, mu, x, t, n);
    };
    s.exact.v = [es](const Vec3& x, double t) { return es_eval(es, x, t).v; };
    s.exact.grad_v = [es](const Vec3& x, double t) {
      return es_eval(es, x, t).grad_v;
    };
    s.exact.vdot = [es](const Vec3& x, double t) {
      return es_eval(es, x, t).vdot;
    };
    s.exact.grad_vdot = [es](const Vec3& x, double t) {
      return es_eval(es, x, t).grad_vdot;
    };
    s.exact.p = [es](const Vec3& x, double t) { return es_eval(es, x, t).p; };
    s.exact.grad_p = [es](const Vec3& x, double t) {
      return es_eval(es, x, t).grad_p;
    };
    s.exact.pdot = [es](const Vec3& x, double t) {
      return es_eval(es, x, t).pdot;
    };
    s.exact.grad_pdot = [es](const Vec3& x, double t) {
      return es_eval(es, x, t).grad_pdot;
    };
    return s;
  }
  const Womersley w = make_paper_womersley();
  BenchmarkSetup s{make_pipe_patch(w.R, w.L),
                   {FaceType::Dirichlet, FaceType::Dirichlet,
                    FaceType::Dirichlet, FaceType::Dirichlet,
                    FaceType::Neumann, FaceType::Neumann},
                   MaterialParams{w.rho, w.mu, nullptr},
                   ProblemData{},
                   ExactFields{}};
  s.problem.traction = [w](const Vec3& x, double t, const Vec3& n) {
    return womersley_traction(w, x, t, n);
  };
  // no-slip wall: homogeneous Dirichlet (null means exact zeros)
  s.exact.v = [w](const Vec3& x, double t) { return womersley_eval(w, x, t).v; };
  s.exact.grad_v = [w](const Vec3& x, double t) {
    return womersley_eval(w, x, t).grad_v;
  };
  s.exact.vdot = [w](const Vec3& x, double t) {
    return womersley_eval(w, x, t).vdot;
  };
  s.exact.grad_vdot = [w](const Vec3& x, double t) {
    return womersley_eval(w, x, t).grad_vdot;
  };
  s.exact.p = [w](const Vec3& x, double t) { return womersley_eval(w, x, t).p; };
  s.exact.grad_p = [w](const Vec3& x, double t) {
    return womersley_eval(w, x, t).grad_p;
  };
  s.exact.pdot = [w](const Vec3& x, double t) {
    return womersley_eval(w, x, t).pdot;
  };
  s.exact.grad_pdot = [w](const Vec3& x, double t) {
    return womersley_eval(w, x, t).grad_pdot;
  };
  return s;
}

RunContext::RunContext(const RunConfig& cfg)
    : setup(make_benchmark(cfg.benchmark)),
      space(setup.patch, cfg.nel, cfg.p, cfg.continuity, setup.face_types),
      assembler(std::make_unique<Assembler>(setup.patch, space, setup.material)) {}

State integrate(RunContext& ctx, const RunConfig& cfg, Variant scheme, int nts,
                const State& initial, const StepObserver& observer) {
  const SchemeParams sp = params_from_rho_inf(cfg.rho_inf, scheme);
  TimeStepper stepper(*ctx.assembler, sp, ctx.setup.problem);
  require(ctx.space.has_neumann(),
          "all-Dirichlet velocity boundary: pressure level undetermined; "
          "refusing to run");
  StepConfig sc;
  sc.dt = cfg.t_final / nts;
  sc.newton_rel_tol = cfg.newton_rel_tol;
  sc.newton_abs_tol = cfg.newton_abs_tol;
  sc.max_newton_iters = cfg.max_newton_iters;
  sc.policy = cfg.policy;
  State state = initial;
  State at_eval;
  bool have_eval = false;
  const long eval_step = std::lround(cfg.t_eval / sc.dt);
  for (int k = 1; k <= nts; ++k) {
    const StepStats stats = stepper.step(state, sc);
    if (observer) observer(state, stats);
    if (k == eval_step) {
      at_eval = state;
      have_eval = true;
    }
  }
  require(have_eval, "integrate: t_eval not reached");
  return at_eval;
}

ErrorReport make_report(const RunContext& ctx, const RunConfig& cfg,
                        Variant scheme, int nts, const State& at_eval) {
  const Assembler& as = *ctx.assembler;
  const ExactFields& ex = ctx.setup.exact;
  const double t = at_eval.t;
  ErrorReport r;
  r.meta = {cfg.benchmark_name(),
            scheme == Variant::Scheme1 ? "scheme1" : "scheme2",
            nts,
            cfg.t_final / nts,
            cfg.nel,
            cfg.p,
            cfg.continuity,
            cfg.rho_inf,
            cfg.t_eval};
  r.v_l2 = relative_error_velocity(as, at_eval.v, ex.v, ex.grad_v, t, Norm::L2);
  r.v_h1 = relative_error_velocity(as, at_eval.v, ex.v, ex.grad_v, t, Norm::H1);
  r.p_l2 = relative_error_pressure(as, at_eval.p, ex.p, ex.grad_p, t, Norm::L2);
  r.p_h1 = relative_error_pressure(as, at_eval.p, ex.p, ex.grad_p, t, Norm::H1);
  r.vdot_l2 =
      relative_error_velocity(as, at_eval.vdot, ex.vdot, ex.grad_vdot, t, Norm::L2);
  r.vdot_h1 =
      relative_error_velocity(as, at_eval.vdot, ex.vdot, ex.grad_vdot, t, Norm::H1);
  r.pdot_l2 =
      relative_error_pressure(as, at_eval.pdot, ex.pdot, ex.grad_pdot, t, Norm::L2);
  r.pdot_h1 =
      relative_error_pressure(as, at_eval.pdot, ex.pdot, ex.grad_pdot, t, Norm::H1);
  return r;
}

namespace {

// temporal errors: coefficient differences against a fine-dt reference,
// normalized by the exact-solution norms at t_eval
ErrorReport temporal_report(const RunContext& ctx, const RunConfig& cfg,
                            Variant scheme, int nts, const State& run,
                            const State& ref) {
  const Assembler& as = *ctx.assembler;
  const ExactFields& ex = ctx.setup.exact;
  const double t = run.t;
  ErrorReport r;
  r.meta = {cfg.benchmark_name(),
            scheme == Variant::Scheme1 ? "scheme1" : "scheme2",
            nts,
            cfg.t_final / nts,
            cfg.nel,
            cfg.p,
            cfg.continuity,
            cfg.rho_inf,
            cfg.t_eval};
  const ErrorIntegrals den_v = as.exact_vector_norms(ex.v, ex.grad_v, t);
  const ErrorIntegrals den_vd = as.exact_vector_norms(ex.vdot, ex.grad_vdot, t);
  const ErrorIntegrals den_p = as.exact_scalar_norms(ex.p, ex.grad_p, t);
  const ErrorIntegrals den_pd = as.exact_scalar_norms(ex.pdot, ex.grad_pdot, t);
  const auto rel = [](const ErrorIntegrals& n, const ErrorIntegrals& d,
                      Norm norm) {
    const double nn = norm == Norm::L2 ? n.value_sq : n.value_sq + n.grad_sq;
    const double dd = norm == Norm::L2 ? d.value_sq : d.value_sq + d.grad_sq;
    return std::sqrt(nn / dd);
  };
  const Eigen::VectorXd dv = run.v - ref.v;
  const Eigen::VectorXd dvd = run.vdot - ref.vdot;
  const Eigen::VectorXd dp = run.p - ref.p;
  const Eigen::VectorXd dpd = run.pdot - ref.pdot;
  const ErrorIntegrals nv = as.velocity_error(dv, nullptr, nullptr, t);
  const ErrorIntegrals nvd = as.velocity_error(dvd, nullptr, nullptr, t);
  const ErrorIntegrals np = as.pressure_error(dp, nullptr, nullptr, t);
  const ErrorIntegrals npd = as.pressure_error(dpd, nullptr, nullptr, t);
  r.v_l2 = rel(nv, den_v, Norm::L2);
  r.v_h1 = rel(nv, den_v, Norm::H1);
  r.p_l2 = rel(np, den_p, Norm::L2);
  r.p_h1 = rel(np, den_p, Norm::H1);
  r.vdot_l2 = rel(nvd, den_vd, Norm::L2);
  r.vdot_h1 = rel(nvd, den_vd, Norm::H1);
  r.pdot_l2 = rel(npd, den_pd, Norm::L2);
  r.pdot_h1 = rel(npd, den_pd, Norm::H1);
  return r;
}

// discrete axial velocity along the x-axis line (xi2 = 1/2, z = L/2)
void sample_profile(const RunContext& ctx, const State& state, double t,
                    std::vector<std::array<double, 3>>& rows, double& vmax) {
  const TensorBasis& vs = ctx.space.velocity_space();
  const int nsamp = 101;
  for (int i = 0; i < nsamp; ++i) {
    const double xi1 = double(i) / (nsamp - 1);
    const Vec3 xi = {xi1, 0.5, 0.5};
    const GeometryPoint gp = ctx.setup.patch.geometry_at(xi, false);
    const TensorEval te = vs.eval(xi);
    double vz = 0.0;
    for (int k = 0; k < te.count; ++k)
      vz += te.values[k] * state.v[3L * te.indices[k] + 2];
    rows.push_back({t, gp.x[0], vz});
    vmax = std::max(vmax, std::abs(vz));
  }
}

}  // namespace

FamilyResult run_family(const RunConfig& cfg, std::ostream* log) {
  cfg.validate();
  RunContext ctx(cfg);
  FamilyResult out;
  const State init = initial_state(*ctx.assembler, ctx.setup.exact,
                                   ctx.setup.problem, cfg.init);

  std::optional<State> reference;
  if (cfg.reference_nts > 0) {
    if (log)
      (*log) << "reference run: scheme2, nts = " << cfg.reference_nts << "\n";
    reference = integrate(ctx, cfg, Variant::Scheme2, cfg.reference_nts, init);
  }

  const int profile_nts = cfg.nts_list.back();
  for (int nts : cfg.nts_list) {
    long iters = 0, factors = 0;
    std::vector<long> profile_steps;
    if (cfg.profile_export && cfg.benchmark == BenchmarkKind::Womersley &&
        nts == profile_nts) {
      for (double tp : cfg.profile_times)
        profile_steps.push_back(std::lround(tp / (cfg.t_final / nts)));
    }
    long stepno = 0;
    const State at_eval = integrate(
        ctx, cfg, cfg.scheme, nts, init,
        [&](const State& st, const StepStats& stats) {
          iters += stats.newton_iters;
          factors += stats.factorizations;
          ++stepno;
          for (long ps : profile_steps)
            if (ps == stepno)
              sample_profile(ctx, st, st.t, out.profile, out.profile_vmax);
        });
    out.total_newton_iters += iters;
    out.total_factorizations += factors;
    out.reports.push_back(make_report(ctx, cfg, cfg.scheme, nts, at_eval));
    if (reference)
      out.temporal.push_back(
          temporal_report(ctx, cfg, cfg.scheme, nts, at_eval, *reference));
    if (log) {
      const ErrorReport& r = out.reports.back();
      (*log) << cfg.scheme_name() << " nts=" << nts << " v_l2=" << r.v_l2
             << " p_l2=" << r.p_l2 << " pdot_l2=" << r.pdot_l2
             << " (newton " << iters << ", factor " << factors << ")\n";
    }
  }
  return out;
}

int run(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  if (cfg.dry_run) {
    RunContext ctx(cfg);
    const MixedSpace& ms = ctx.space;
    log << "benchmark: " << cfg.benchmark_name() << "\n"
        << "pressure space:  " << ms.pressure_space().dims()[0] << " x "
        << ms.pressure_space().dims()[1] << " x " << ms.pressure_space().dims()[2]
        << " = " << ms.n_pnodes() << " DOFs\n"
        << "velocity space:  " << ms.velocity_space().dims()[0] << " x "
        << ms.velocity_space().dims()[1] << " x "
        << ms.velocity_space().dims()[2] << " scalar nodes, n_v = "
        << 3 * ms.n_vnodes() << " (free " << ms.n_vfree() << ")\n"
        << "unknowns: " << ms.n_unknowns() << "\n";
    return 0;
  }
  const FamilyResult res = run_family(cfg, &log);
  if (!cfg.out_path.empty()) {
    std::ofstream os(cfg.out_path);
    if (!os) {
      log << "error: cannot write " << cfg.out_path << "\n";
      return 2;
    }
    if (cfg.format == "csv")
      emit_report_csv(os, res.reports, cfg.echo());
    else
      emit_report_json(os, res.reports, cfg.echo());
    if (!res.temporal.empty()) {
      std::ofstream ts(cfg.out_path + ".temporal");
      ConfigEcho echo = cfg.echo();
      echo.emplace_back("note", "temporal errors vs scheme2 reference");
      if (cfg.format == "csv")
        emit_report_csv(ts, res.temporal, echo);
      else
        emit_report_json(ts, res.temporal, echo);
    }
    if (cfg.profile_export && !res.profile.empty()) {
      std::ofstream ps(cfg.out_path + ".profile.csv");
      for (const auto& [k, v] : cfg.echo()) ps << "# " << k << " = " << v << "\n";
      char buf[96];
      std::snprintf(buf, sizeof(buf), "# v_max_sampled = %.10e\n",
                    res.profile_vmax);
      ps << buf << "time,x,v_z\n";
      for (const auto& row : res.profile) {
        std::snprintf(buf, sizeof(buf), "%.10e,%.10e,%.10e\n", row[0], row[1],
                      row[2]);
        ps << buf;
      }
    }
  }
  return 0;
}

}  // namespace igaflow
