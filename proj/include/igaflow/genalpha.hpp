#pragma once

#include <vector>

#include "igaflow/assembly.hpp"
#include "igaflow/linsolve.hpp"
#include "igaflow/spaces.hpp"

namespace igaflow {

enum class Variant { Scheme1, Scheme2 };

/// Generalized-alpha parameters. Scheme-1 collocates the pressure at t_{n+1};
/// Scheme-2 evaluates it at the intermediate level t_{n+alpha_f}. Everything
/// else (velocity stages, the velocity update, and the data collocation time
/// t_{n+alpha_f} for traction and body force) is shared.
struct SchemeParams {
  double rho_inf;
  double alpha_m;
  double alpha_f;
  double gamma;
  Variant variant;
};

/// alpha_m = (3-rho)/(2(1+rho)), alpha_f = 1/(1+rho), gamma = 1/2+alpha_m-alpha_f.
SchemeParams params_from_rho_inf(double rho_inf, Variant variant);

enum class TangentPolicy {
  EveryIteration,  // textbook Newton
  EveryStep,       // factorize at the first iterate of each step
  Reuse,           // keep the factorization across steps, refresh on demand
};

struct StepConfig {
  double dt = 0.0;
  double newton_rel_tol = 1e-6;
  double newton_abs_tol = 1e-10;
  int max_newton_iters = 10;
  TangentPolicy policy = TangentPolicy::Reuse;
  int refresh_iters = 4;  // rebuild a stale tangent if not converged by then
};

struct StepStats {
  int newton_iters = 0;
  int factorizations = 0;
  double first_residual = 0.0;
  double final_residual = 0.0;
};

/// Boundary/forcing data of the problem being integrated.
struct ProblemData {
  TractionFn traction;    // Neumann data h(x,t,n)
  VectorFn dirichlet_g;   // null means homogeneous (exact zeros)
  VectorFn dirichlet_gdot;
};

/// Same-velocity predictor: vdot0 = ((gamma-1)/gamma) vdot_n, p0 = p_n, so
/// that the Newmark-style update returns v_{n+1} = v_n exactly.
void predict(const State& state, const SchemeParams& sp, Eigen::VectorXd& vdot1,
             Eigen::VectorXd& p1);

/// One implicit step of either scheme: Newton on (dvdot_{n+1}, dp_{n+1}) with
/// the consistent tangent; v_{n+1} is eliminated through the velocity update.
class TimeStepper {
 public:
  TimeStepper(Assembler& as, SchemeParams sp, ProblemData problem);

  StepStats step(State& state, const StepConfig& cfg);

  /// Drop any cached factorization (e.g. before changing dt).
  void invalidate();

  const SchemeParams& scheme() const { return sp_; }

 private:
  Assembler& asm_;
  SchemeParams sp_;
  ProblemData prob_;
  SparseLu lu_;
  bool have_factor_ = false;
  double factor_dt_ = -1.0;
};

enum class InitMode {
  ProjectAnalytic,  // vdot_0, pdot_0 are L2 projections of analytic rates
  ConsistentSolve,  // vdot_0, p_0 solve the t=0 residual with div(vdot)=0
};

/// Exact fields used to set initial data (and measure errors later).
struct ExactFields {
  VectorFn v;
  MatrixFn grad_v;
  VectorFn vdot;
  MatrixFn grad_vdot;
  ScalarFn p;
  VectorFn grad_p;
  ScalarFn pdot;
  VectorFn grad_pdot;
};

/// Initial state by L2 projection of the exact data; in ConsistentSolve mode
/// the momentum residual at t=0 together with div(vdot_0)=0 determines
/// (vdot_0, p_0) instead of the analytic-rate projections.
State initial_state(Assembler& as, const ExactFields& exact,
                    const ProblemData& prob, InitMode mode);

}  // namespace igaflow
