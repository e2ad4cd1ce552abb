#include "igaflow/benchmarks.hpp"

#include <cmath>

namespace igaflow {

FieldSample es_eval(const EthierSteinman& es, const Vec3& X, double t) {
  const double a = es.a, d = es.d;
  const double x = X[0], y = X[1], z = X[2];
  const double ex = std::exp(a * x), ey = std::exp(a * y), ez = std::exp(a * z);
  const double s1 = std::sin(a * x + d * y), c1 = std::cos(a * x + d * y);
  const double s2 = std::sin(a * y + d * z), c2 = std::cos(a * y + d * z);
  const double s3 = std::sin(a * z + d * x), c3 = std::cos(a * z + d * x);
  const double lam = es.nu * d * d;
  const double et = std::exp(-lam * t);
  const double et2 = std::exp(-2.0 * lam * t);

  FieldSample out;
  out.v = {-a * (ex * s2 + ez * c1) * et, -a * (ey * s3 + ex * c2) * et,
           -a * (ez * s1 + ey * c3) * et};
  out.grad_v[0] = {-a * (a * ex * s2 - a * ez * s1) * et,
                   -a * (a * ex * c2 - d * ez * s1) * et,
                   -a * (d * ex * c2 + a * ez * c1) * et};
  out.grad_v[1] = {-a * (d * ey * c3 + a * ex * c2) * et,
                   -a * (a * ey * s3 - a * ex * s2) * et,
                   -a * (a * ey * c3 - d * ex * s2) * et};
  out.grad_v[2] = {-a * (a * ez * c1 - d * ey * s3) * et,
                   -a * (d * ez * c1 + a * ey * c3) * et,
                   -a * (a * ez * s1 - a * ey * s3) * et};
  for (int i = 0; i < 3; ++i) {
    out.vdot[i] = -lam * out.v[i];
    for (int j = 0; j < 3; ++j) out.grad_vdot[i][j] = -lam * out.grad_v[i][j];
  }

  const double e2x = std::exp(2 * a * x), e2y = std::exp(2 * a * y),
               e2z = std::exp(2 * a * z);
  const double eyz = std::exp(a * (y + z)), ezx = std::exp(a * (z + x)),
               exy = std::exp(a * (x + y));
  const double c = -0.5 * a * a;
  out.p = c * (e2x + e2y + e2z + 2 * s1 * c3 * eyz + 2 * s2 * c1 * ezx +
               2 * s3 * c2 * exy) *
          et2;
  out.grad_p = {
      c * (2 * a * e2x + 2 * eyz * (a * c1 * c3 - d * s1 * s3) +
           2 * ezx * (a * s2 * c1 - a * s1 * s2) +
           2 * exy * (d * c2 * c3 + a * s3 * c2)) *
          et2,
      c * (2 * a * e2y + 2 * ezx * (a * c2 * c1 - d * s2 * s1) +
           2 * exy * (a * s3 * c2 - a * s2 * s3) +
           2 * eyz * (d * c3 * c1 + a * s1 * c3)) *
          et2,
      c * (2 * a * e2z + 2 * exy * (a * c3 * c2 - d * s3 * s2) +
           2 * eyz * (a * s1 * c3 - a * s3 * s1) +
           2 * ezx * (d * c1 * c2 + a * s2 * c1)) *
          et2};
  out.pdot = -2.0 * lam * out.p;
  for (int j = 0; j < 3; ++j) out.grad_pdot[j] = -2.0 * lam * out.grad_p[j];
  return out;
}

Vec3 es_traction(const EthierSteinman& es, double mu, const Vec3& x, double t,
                 const Vec3& n) {
  const FieldSample s = es_eval(es, x, t);
  Vec3 h;
  for (int i = 0; i < 3; ++i) {
    double acc = -s.p * n[i];
    for (int j = 0; j < 3; ++j)
      acc += mu * (s.grad_v[i][j] + s.grad_v[j][i]) * n[j];
    h[i] = acc;
  }
  return h;
}

std::complex<double> complex_j0(std::complex<double> z) {
  require(std::abs(z) <= 30.0, "complex_j0: |z| beyond supported radius");
  const std::complex<double> m = -z * z * 0.25;
  std::complex<double> term = 1.0, sum = 1.0;
  for (int k = 1; k <= 200; ++k) {
    term *= m / double(k * k);
    sum += term;
    if (std::abs(term) < 1e-16 * std::abs(sum)) break;
  }
  return sum;
}

namespace {

// (1/r) d/dr J0(lam r) = sum_{m>=1} (-lam^2/4)^m (2m) r^{2m-2} / (m!)^2,
// a series in r^2 with no singularity at the axis.
std::complex<double> j0_radial_over_r(std::complex<double> lam, double r) {
  const std::complex<double> q = -lam * lam * 0.25;
  std::complex<double> cm = q;  // (-lam^2/4)^m / (m!)^2 at m = 1
  double r2m = 1.0;             // r^{2m-2} at m = 1
  std::complex<double> sum = 0.0;
  for (int m = 1; m <= 200; ++m) {
    const std::complex<double> term = cm * double(2 * m) * r2m;
    sum += term;
    if (std::abs(term) < 1e-16 * std::abs(sum) && m > 2) break;
    r2m *= r * r;
    cm *= q / double((m + 1) * (m + 1));
  }
  return sum;
}

}  // namespace

Womersley make_paper_womersley() {
  Womersley w;
  require(std::abs(w.omega() - 5.71) < 0.01, "Womersley: omega mismatch");
  require(std::abs(w.alpha(1) - 3.59) < 0.01, "Womersley: alpha_1 mismatch");
  return w;
}

FieldSample womersley_eval(const Womersley& w, const Vec3& X, double t) {
  using C = std::complex<double>;
  const double x = X[0], y = X[1], z = X[2];
  const double r2 = x * x + y * y;
  const double r = std::sqrt(r2);
  require(r <= w.R * (1.0 + 1e-12), "womersley_eval: point outside the pipe");
  const double om = w.omega();
  const C iota(0.0, 1.0);
  const C i32 = std::exp(iota * (3.0 * M_PI / 4.0));  // principal i^{3/2}

  FieldSample out{};
  // pressure: p = p_ref + (k0 + sum Re[k_n e^{i n om t}]) z
  double k = w.k0, kd = 0.0;
  for (size_t n = 1; n <= w.kn.size(); ++n) {
    const C e = std::exp(iota * (double(n) * om * t));
    k += std::real(w.kn[n - 1] * e);
    kd += std::real(iota * double(n) * om * w.kn[n - 1] * e);
  }
  out.p = w.p_ref + k * z;
  out.grad_p = {0, 0, k};
  out.pdot = kd * z;
  out.grad_pdot = {0, 0, kd};

  // axial velocity: steady Poiseuille part + oscillatory Bessel modes
  double vz = w.k0 / (4.0 * w.mu) * (r2 - w.R * w.R);
  double psi = w.k0 / (2.0 * w.mu);  // (1/r) dvz/dr
  double vzd = 0.0, psid = 0.0;
  for (size_t n = 1; n <= w.kn.size(); ++n) {
    const double al = w.alpha(static_cast<int>(n));
    const C lam = i32 * al / w.R;
    const C j0R = complex_j0(i32 * al);
    const C amp = iota * w.kn[n - 1] / (w.rho * double(n) * om);
    const C e = std::exp(iota * (double(n) * om * t));
    const C prof = 1.0 - complex_j0(lam * r) / j0R;
    const C dprof_over_r = -j0_radial_over_r(lam, r) / j0R;
    vz += std::real(amp * prof * e);
    psi += std::real(amp * dprof_over_r * e);
    const C iw = iota * double(n) * om;
    vzd += std::real(iw * amp * prof * e);
    psid += std::real(iw * amp * dprof_over_r * e);
  }
  out.v = {0, 0, vz};
  out.grad_v[2] = {x * psi, y * psi, 0.0};
  out.vdot = {0, 0, vzd};
  out.grad_vdot[2] = {x * psid, y * psid, 0.0};
  return out;
}

Vec3 womersley_traction(const Womersley& w, const Vec3& x, double t,
                        const Vec3& n) {
  require(std::abs(n[0]) < 1e-12 && std::abs(n[1]) < 1e-12 &&
              std::abs(std::abs(n[2]) - 1.0) < 1e-12,
          "womersley_traction: normal must be +-e_z (wall is Dirichlet)");
  const FieldSample s = womersley_eval(w, x, t);
  // sigma.n with v = (0,0,vz(x,y)): shear (mu dvz/dx, mu dvz/dy), normal -p
  return {w.mu * s.grad_v[2][0] * n[2], w.mu * s.grad_v[2][1] * n[2],
          -s.p * n[2]};
}

}  // namespace igaflow
