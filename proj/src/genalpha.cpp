#include "igaflow/genalpha.hpp"

#include <cmath>
#include <sstream>

namespace igaflow {

SchemeParams params_from_rho_inf(double rho_inf, Variant variant) {
  require(rho_inf >= 0.0 && rho_inf <= 1.0,
          "params_from_rho_inf: rho_inf must be in [0,1]");
  SchemeParams sp;
  sp.rho_inf = rho_inf;
  sp.alpha_m = 0.5 * (3.0 - rho_inf) / (1.0 + rho_inf);
  sp.alpha_f = 1.0 / (1.0 + rho_inf);
  sp.gamma = 0.5 + sp.alpha_m - sp.alpha_f;
  sp.variant = variant;
  // the parametrization guarantees alpha_m >= alpha_f >= 1/2
  if (!(sp.alpha_m >= sp.alpha_f && sp.alpha_f >= 0.5))
    fail("params_from_rho_inf: parameter ordering violated");
  return sp;
}

void predict(const State& state, const SchemeParams& sp, Eigen::VectorXd& vdot1,
             Eigen::VectorXd& p1) {
  vdot1 = ((sp.gamma - 1.0) / sp.gamma) * state.vdot;
  p1 = state.p;
}

TimeStepper::TimeStepper(Assembler& as, SchemeParams sp, ProblemData problem)
    : asm_(as), sp_(sp), prob_(std::move(problem)) {}

void TimeStepper::invalidate() { have_factor_ = false; }

StepStats TimeStepper::step(State& state, const StepConfig& cfg) {
  require(cfg.dt > 0.0 && std::isfinite(cfg.dt), "step: dt must be positive");
  state.check_finite();
  const MixedSpace& ms = asm_.space();
  const double dt = cfg.dt;
  const double am = sp_.alpha_m, af = sp_.alpha_f, g = sp_.gamma;
  const double tn = state.t;
  const double ts = tn + af * dt;  // data collocation time for both schemes
  const double c_p = (sp_.variant == Variant::Scheme1) ? 1.0 : af;
  const long nvf = ms.n_vfree();
  const long np = ms.n_pnodes();

  if (factor_dt_ != dt) have_factor_ = false;

  Eigen::VectorXd vdot1, p1;
  predict(state, sp_, vdot1, p1);
  // end-of-step Dirichlet traces (benchmarks use g = 0)
  asm_.apply_dirichlet(prob_.dirichlet_gdot, tn + dt, vdot1);

  Eigen::VectorXd v1(state.v.size()), vdot_s(state.v.size()),
      v_s(state.v.size()), p_s(np), R;
  StepStats stats;
  std::vector<double> history;
  bool refreshed_this_step = false;
  double res_tol = 0.0;

  for (int it = 0;; ++it) {
    v1 = state.v + dt * state.vdot + g * dt * (vdot1 - state.vdot);
    if (ms.n_free_nodes() != ms.n_vnodes())
      asm_.apply_dirichlet(prob_.dirichlet_g, tn + dt, v1);
    vdot_s = state.vdot + am * (vdot1 - state.vdot);
    v_s = state.v + af * (v1 - state.v);
    if (sp_.variant == Variant::Scheme1)
      p_s = p1;
    else
      p_s = state.p + af * (p1 - state.p);

    StageValues stage{&vdot_s, &v_s, &p_s, ts};
    asm_.residual(stage, prob_.traction, R);
    const double rn = R.norm();
    history.push_back(rn);
    if (it == 0) {
      stats.first_residual = rn;
      res_tol = std::max(cfg.newton_abs_tol, cfg.newton_rel_tol * rn);
    }
    if (rn <= res_tol) {
      stats.final_residual = rn;
      stats.newton_iters = it;
      break;
    }
    if (it >= cfg.max_newton_iters) {
      std::ostringstream os;
      os << "Newton failed to converge in " << cfg.max_newton_iters
         << " iterations at t = " << tn << " (dt = " << dt
         << "); residual history:";
      for (double h : history) os << " " << h;
      fail(os.str());
    }

    const bool need_factor =
        !have_factor_ || cfg.policy == TangentPolicy::EveryIteration ||
        (cfg.policy == TangentPolicy::EveryStep && it == 0) ||
        (it >= cfg.refresh_iters && !refreshed_this_step);
    if (need_factor) {
      const SchemeFactors f{am, af * g * dt, c_p, af * g * dt};
      const Csr& A = asm_.tangent(stage, f);
      lu_.factorize(A);
      have_factor_ = true;
      factor_dt_ = dt;
      if (it >= cfg.refresh_iters) refreshed_this_step = true;
      ++stats.factorizations;
    }
    const Eigen::VectorXd dx = lu_.solve(-R);
    for (long fn = 0; fn < nvf / 3; ++fn) {
      const int node = ms.free_nodes()[fn];
      vdot1[3L * node + 0] += dx[3 * fn + 0];
      vdot1[3L * node + 1] += dx[3 * fn + 1];
      vdot1[3L * node + 2] += dx[3 * fn + 2];
    }
    p1 += dx.tail(np);
  }

  // accept: update the state and the scheme-specific pdot
  if (sp_.variant == Variant::Scheme1) {
    state.pdot = (p1 - state.p) / dt;
  } else {
    state.pdot = (p1 - state.p) / (g * dt) + (1.0 - 1.0 / g) * state.pdot;
  }
  state.v = v1;
  state.vdot = vdot1;
  state.p = p1;
  state.t = tn + dt;
  return stats;
}

State initial_state(Assembler& as, const ExactFields& exact,
                    const ProblemData& prob, InitMode mode) {
  const MixedSpace& ms = as.space();
  State s;
  s.t = 0.0;
  s.v = as.project_velocity(exact.v, 0.0);
  as.apply_dirichlet(prob.dirichlet_g, 0.0, s.v);
  s.p = as.project_pressure(exact.p, 0.0);
  s.pdot = as.project_pressure(exact.pdot, 0.0);
  s.vdot = as.project_velocity(exact.vdot, 0.0);
  as.apply_dirichlet(prob.dirichlet_gdot, 0.0, s.vdot);
  if (mode == InitMode::ProjectAnalytic) return s;

  // Consistent initialization: with v_0 fixed, solve the (linear) momentum
  // residual at t=0 together with div(vdot_0) = 0 for (vdot_0, p_0). The
  // projected values above serve as the starting guess.
  const long nvf = ms.n_vfree();
  const long np = ms.n_pnodes();
  SparseLu lu;
  Eigen::VectorXd R(nvf + np), Rm, Rdiv;
  double first_norm = 0.0;
  for (int it = 0; it < 3; ++it) {
    StageValues mom{&s.vdot, &s.v, &s.p, 0.0};
    as.residual(mom, prob.traction, Rm);
    // continuity rows evaluated on vdot (the velocity slot drives B^c)
    StageValues div{&s.vdot, &s.vdot, &s.p, 0.0};
    as.residual(div, nullptr, Rdiv);
    R.head(nvf) = Rm.head(nvf);
    R.tail(np) = Rdiv.tail(np);
    const double rn = R.norm();
    if (it == 0) first_norm = rn;
    if (rn <= 1e-10 * first_norm || it == 2) break;
    if (!lu.factorized()) {
      // the system is linear in (vdot_0, p_0): the tangent is state-free
      const SchemeFactors f{1.0, 0.0, 1.0, 1.0};
      lu.factorize(as.tangent(mom, f));
    }
    const Eigen::VectorXd dx = lu.solve(-R);
    for (long fn = 0; fn < nvf / 3; ++fn) {
      const int node = ms.free_nodes()[fn];
      s.vdot[3L * node + 0] += dx[3 * fn + 0];
      s.vdot[3L * node + 1] += dx[3 * fn + 1];
      s.vdot[3L * node + 2] += dx[3 * fn + 2];
    }
    s.p += dx.tail(np);
  }
  return s;
}

}  // namespace igaflow
