#pragma once

#include <Eigen/Core>
#include <memory>

#include "igaflow/linsolve.hpp"
#include "igaflow/mesh.hpp"
#include "igaflow/spaces.hpp"

namespace igaflow {

/// Stage values the semi-discrete residual is evaluated at. Velocity-type
/// vectors are full-length (constrained coefficients included); the time
/// carried here is the data-collocation time (boundary traction and body
/// force are evaluated at it).
struct StageValues {
  const Eigen::VectorXd* vdot = nullptr;
  const Eigen::VectorXd* v = nullptr;
  const Eigen::VectorXd* p = nullptr;
  double t = 0.0;
};

/// Chain-rule factors of the Newton linearization with respect to the step
/// unknowns (dvdot_{n+1}, dp_{n+1}): d(stage vdot) = c_vdot, d(stage v) = c_v,
/// d(stage p) = c_p. c_div is the factor on the continuity rows (equal to c_v
/// for a time step; 1 with c_v = 0 for the consistent-initialization solve).
struct SchemeFactors {
  double c_vdot;
  double c_v;
  double c_p;
  double c_div;
};

/// Squared error integrals of a discrete field against an exact one.
struct ErrorIntegrals {
  double value_sq = 0.0;  // int |u_h - u|^2
  double grad_sq = 0.0;   // int |grad u_h - grad u|^2
};

/// Galerkin assembly of the mixed Navier-Stokes residuals and consistent
/// tangent on one patch. Quadrature is degree(velocity)+2 points per
/// direction per knot span; geometry data is cached up front (the map is
/// time-independent). Assembly is single-threaded and deterministic.
class Assembler {
 public:
  Assembler(const NurbsPatch& patch, const MixedSpace& ms, MaterialParams mat);
  ~Assembler();
  Assembler(const Assembler&) = delete;
  Assembler& operator=(const Assembler&) = delete;

  const MixedSpace& space() const;
  const MaterialParams& material() const;

  /// Residual over the unknowns: R = [Rm on free velocity DOFs; Rc].
  /// `traction` supplies h on Neumann faces (evaluated at stage.t).
  void residual(const StageValues& stage, const TractionFn& traction,
                Eigen::VectorXd& R) const;

  /// Consistent tangent into the internal CSR (pattern is built once).
  const Csr& tangent(const StageValues& stage, const SchemeFactors& f);
  const Csr& matrix() const;

  /// Unconstrained L2 projections onto the velocity (per-component) and
  /// pressure spaces; mass solves are verified to 1e-12 relative residual.
  Eigen::VectorXd project_velocity(const VectorFn& f, double t) const;
  Eigen::VectorXd project_pressure(const ScalarFn& f, double t) const;

  /// Dirichlet values for the constrained velocity coefficients by
  /// face-restricted L2 projection of g (exact zeros when g is null).
  void apply_dirichlet(const VectorFn& g, double t, Eigen::VectorXd& v) const;

  /// Error integrals of the discrete velocity (3 components) against an exact
  /// field and gradient; null exact functions give plain norms of u_h.
  ErrorIntegrals velocity_error(const Eigen::VectorXd& coeffs,
                                const VectorFn* exact, const MatrixFn* grad,
                                double t) const;
  ErrorIntegrals pressure_error(const Eigen::VectorXd& coeffs,
                                const ScalarFn* exact, const VectorFn* grad,
                                double t) const;
  /// Norm integrals of exact fields by the same quadrature.
  ErrorIntegrals exact_vector_norms(const VectorFn& f, const MatrixFn& g,
                                    double t) const;
  ErrorIntegrals exact_scalar_norms(const ScalarFn& f, const VectorFn& g,
                                    double t) const;

  /// Volume of the physical domain by the assembly quadrature.
  double domain_volume() const;
  /// Surface quadrature data (all six faces) used for traction integrals.
  const std::vector<BoundaryFace>& faces() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace igaflow
