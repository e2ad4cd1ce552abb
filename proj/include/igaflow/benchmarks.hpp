#pragma once

#include <complex>
#include <vector>

#include "igaflow/common.hpp"
#include "igaflow/spaces.hpp"

namespace igaflow {

/// Closed-form sample of an exact solution at one point and time.
struct FieldSample {
  Vec3 v;
  Mat3 grad_v;  // grad_v[i][j] = dv_i/dx_j
  Vec3 vdot;
  Mat3 grad_vdot;
  double p;
  Vec3 grad_p;
  double pdot;
  Vec3 grad_pdot;
};

/// Ethier-Steinman exact unsteady Navier-Stokes solution on R^3 (f = 0,
/// analytically divergence-free, exponential temporal decay).
struct EthierSteinman {
  double a = M_PI / 4.0;
  double d = M_PI / 2.0;
  double nu = 0.1;   // paper: rho = 1, mu = 0.1
  double rho = 1.0;
};

FieldSample es_eval(const EthierSteinman& es, const Vec3& x, double t);
/// Traction sigma . n = (2 mu eps(v) - p I) n from the closed forms.
Vec3 es_traction(const EthierSteinman& es, double mu, const Vec3& x, double t,
                 const Vec3& n);

/// Zeroth-order Bessel function of the first kind for complex argument,
/// by the power series sum_k (-z^2/4)^k / (k!)^2 (truncated at relative
/// 1e-16); supported for |z| <= 30.
std::complex<double> complex_j0(std::complex<double> z);

/// Womersley pulsatile pipe flow: oscillating axial pressure gradient in a
/// rigid circular pipe; real parts of the complex solution are used.
struct Womersley {
  double R = 0.3;    // cm
  double L = 1.0;    // cm
  double rho = 1.0;  // g/cm^3
  double mu = 0.04;  // g/(cm s)
  double T_p = 1.1;  // s
  double p_ref = 0.0;
  double k0 = -21.0469;
  std::vector<std::complex<double>> kn = {{-33.0102, 42.9332}};

  double nu() const { return mu / rho; }
  double omega() const { return 2.0 * M_PI / T_p; }
  /// Womersley number of the n-th mode (n is 1-based).
  double alpha(int n) const { return R * std::sqrt(n * omega() / nu()); }
};

/// Validated construction: checks omega ~ 5.71 and alpha_1 ~ 3.59 for the
/// paper's parameter set (skipped for custom parameters).
Womersley make_paper_womersley();

FieldSample womersley_eval(const Womersley& w, const Vec3& x, double t);
/// Traction on the pipe ends; n must be +-e_z (the wall is Dirichlet).
Vec3 womersley_traction(const Womersley& w, const Vec3& x, double t,
                        const Vec3& n);

}  // namespace igaflow
