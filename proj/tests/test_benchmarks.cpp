#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>

#include "igaflow/benchmarks.hpp"

using namespace igaflow;

namespace {

std::mt19937 rng(31);

Vec3 random_point(double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  return {u(rng), u(rng), u(rng)};
}

// central finite differences of a sampled quantity
template <typename F>
Vec3 fd_gradient(F&& f, const Vec3& x, double t, double h = 1e-6) {
  Vec3 g;
  for (int d = 0; d < 3; ++d) {
    Vec3 xp = x, xm = x;
    xp[d] += h;
    xm[d] -= h;
    g[d] = (f(xp, t) - f(xm, t)) / (2 * h);
  }
  return g;
}

}  // namespace

TEST_CASE("ES: values at the origin") {
  const EthierSteinman es;
  const FieldSample s = es_eval(es, {0, 0, 0}, 0.0);
  CHECK(s.v[0] == doctest::Approx(-M_PI / 4).epsilon(1e-14));
  CHECK(s.v[1] == doctest::Approx(-M_PI / 4).epsilon(1e-14));
  CHECK(s.v[2] == doctest::Approx(-M_PI / 4).epsilon(1e-14));
  CHECK(s.p == doctest::Approx(-3.0 * M_PI * M_PI / 32.0).epsilon(1e-12));
  CHECK(s.p == doctest::Approx(-0.92527).epsilon(1e-4));
}

TEST_CASE("ES: analytically divergence-free") {
  const EthierSteinman es;
  for (int k = 0; k < 50; ++k) {
    const Vec3 x = random_point(-1, 1);
    std::uniform_real_distribution<double> ut(0.0, 1.0);
    const FieldSample s = es_eval(es, x, ut(rng));
    double gmax = 0.0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) gmax = std::max(gmax, std::abs(s.grad_v[i][j]));
    CHECK(std::abs(s.grad_v[0][0] + s.grad_v[1][1] + s.grad_v[2][2]) <
          1e-12 * gmax);
  }
}

TEST_CASE("ES: gradients and rates match finite differences") {
  const EthierSteinman es;
  std::uniform_real_distribution<double> ut(0.0, 1.0);
  for (int k = 0; k < 20; ++k) {
    const Vec3 x = random_point(-1, 1);
    const double t = ut(rng);
    const FieldSample s = es_eval(es, x, t);
    for (int i = 0; i < 3; ++i) {
      const Vec3 g = fd_gradient(
          [&](const Vec3& y, double tt) { return es_eval(es, y, tt).v[i]; }, x, t);
      for (int j = 0; j < 3; ++j)
        CHECK(s.grad_v[i][j] ==
              doctest::Approx(g[j]).epsilon(1e-6).scale(std::abs(g[j]) + 1.0));
      const double vd = (es_eval(es, x, t + 1e-6).v[i] -
                         es_eval(es, x, t - 1e-6).v[i]) / 2e-6;
      CHECK(s.vdot[i] == doctest::Approx(vd).epsilon(1e-6));
    }
    const Vec3 gp = fd_gradient(
        [&](const Vec3& y, double tt) { return es_eval(es, y, tt).p; }, x, t);
    for (int j = 0; j < 3; ++j)
      CHECK(s.grad_p[j] ==
            doctest::Approx(gp[j]).epsilon(1e-6).scale(std::abs(gp[j]) + 1.0));
    const double pd =
        (es_eval(es, x, t + 1e-6).p - es_eval(es, x, t - 1e-6).p) / 2e-6;
    CHECK(s.pdot == doctest::Approx(pd).epsilon(1e-6));
  }
}

TEST_CASE("ES: satisfies the strong Navier-Stokes equations with f = 0") {
  // second-order FD stencils of the momentum residual
  const EthierSteinman es;
  const double mu = es.nu * es.rho;
  const double h = 1e-4;
  std::uniform_real_distribution<double> ut(0.1, 0.9);
  for (int k = 0; k < 10; ++k) {
    const Vec3 x = random_point(-0.8, 0.8);
    const double t = ut(rng);
    const FieldSample s = es_eval(es, x, t);
    double scale = 0.0, worst = 0.0;
    for (int i = 0; i < 3; ++i) {
      double lap = 0.0;
      for (int d = 0; d < 3; ++d) {
        Vec3 xp = x, xm = x;
        xp[d] += h;
        xm[d] -= h;
        lap += (es_eval(es, xp, t).v[i] - 2 * s.v[i] + es_eval(es, xm, t).v[i]) /
               (h * h);
      }
      const double conv = s.v[0] * s.grad_v[i][0] + s.v[1] * s.grad_v[i][1] +
                          s.v[2] * s.grad_v[i][2];
      const double res =
          es.rho * (s.vdot[i] + conv) + s.grad_p[i] - mu * lap;
      worst = std::max(worst, std::abs(res));
      scale = std::max(scale, std::abs(es.rho * conv) + std::abs(s.grad_p[i]));
    }
    CHECK(worst < 1e-5 * scale);
  }
}

TEST_CASE("ES traction: odd in the normal, hand-evaluated sample") {
  const EthierSteinman es;
  const double mu = 0.1;
  for (int k = 0; k < 5; ++k) {
    const Vec3 x = random_point(-1, 1);
    const Vec3 n = {0.6, 0.8, 0.0};
    const Vec3 hp = es_traction(es, mu, x, 0.3, n);
    const Vec3 hm = es_traction(es, mu, x, 0.3, {-0.6, -0.8, 0.0});
    for (int i = 0; i < 3; ++i) CHECK(hp[i] == doctest::Approx(-hm[i]));
  }
  // n = e_x at x = (1,0,0), t = 0: sigma.n = (2 mu dvx/dx - p, mu(dvx/dy+dvy/dx), mu(dvx/dz+dvz/dx))
  const Vec3 x0 = {1, 0, 0};
  const FieldSample s = es_eval(es, x0, 0.0);
  const Vec3 h = es_traction(es, mu, x0, 0.0, {1, 0, 0});
  CHECK(h[0] == doctest::Approx(2 * mu * s.grad_v[0][0] - s.p).epsilon(1e-13));
  CHECK(h[1] ==
        doctest::Approx(mu * (s.grad_v[0][1] + s.grad_v[1][0])).epsilon(1e-13));
  CHECK(h[2] ==
        doctest::Approx(mu * (s.grad_v[0][2] + s.grad_v[2][0])).epsilon(1e-13));
}

TEST_CASE("complex J0: reference values and ODE residual") {
  using C = std::complex<double>;
  CHECK(complex_j0(C(0, 0)) == C(1, 0));
  // 50-term fixed series oracle on the real axis
  {
    long double sum = 0.0L, term = 1.0L;
    const long double m = -0.25L;  // -z^2/4 at z=1
    sum = term;
    for (int k = 1; k <= 50; ++k) {
      term *= m / (static_cast<long double>(k) * k);
      sum += term;
    }
    CHECK(std::abs(complex_j0(C(1, 0)).real() - double(sum)) < 1e-15);
    CHECK(complex_j0(C(1, 0)).real() == doctest::Approx(0.7651976866).epsilon(1e-9));
  }
  // modified-Bessel identity: J0(i) = I0(1)
  {
    long double sum = 0.0L, term = 1.0L;
    sum = term;
    for (int k = 1; k <= 50; ++k) {
      term *= 0.25L / (static_cast<long double>(k) * k);  // (z^2/4)^k at z=1
      sum += term;
    }
    const C j0i = complex_j0(C(0, 1));
    CHECK(j0i.real() == doctest::Approx(double(sum)).epsilon(1e-14));
    CHECK(j0i.real() == doctest::Approx(1.2660658778).epsilon(1e-9));
    CHECK(std::abs(j0i.imag()) < 1e-15);
  }
  CHECK_THROWS(complex_j0(C(40, 0)));

  // z^2 J'' + z J' + z^2 J = 0 with derivatives via the differentiated series
  std::uniform_real_distribution<double> u(-4.0, 4.0);
  for (int k = 0; k < 10; ++k) {
    const C z(u(rng), u(rng));
    if (std::abs(z) < 0.5) continue;
    const C q = -z * z * 0.25;
    C term = 1.0, j = 1.0, jp = 0.0, jpp = 0.0;
    for (int m = 1; m <= 80; ++m) {
      term *= q / double(m * m);
      j += term;
      // d/dz of (-z^2/4)^m/(m!)^2 = term * 2m/z ; second derivative similarly
      jp += term * double(2 * m) / z;
      jpp += term * double(2 * m) * double(2 * m - 1) / (z * z);
    }
    const C res = z * z * jpp + z * jp + z * z * j;
    CHECK(std::abs(res) < 1e-10 * std::max(1.0, std::abs(z * z * j)));
    CHECK(std::abs(complex_j0(z) - j) < 1e-13 * std::abs(j));
  }
}

TEST_CASE("Womersley: paper constants and structure") {
  const Womersley w = make_paper_womersley();
  CHECK(w.omega() == doctest::Approx(5.712).epsilon(1e-3));
  CHECK(w.alpha(1) == doctest::Approx(3.585).epsilon(1e-3));

  // steady centerline velocity: -k0 R^2/(4 mu)
  Womersley steady = w;
  steady.kn.clear();
  const FieldSample c = womersley_eval(steady, {0, 0, 0.5}, 0.37);
  CHECK(c.v[2] == doctest::Approx(-w.k0 * w.R * w.R / (4 * w.mu)).epsilon(1e-13));
  CHECK(c.v[2] == doctest::Approx(11.839).epsilon(1e-3));

  // no-slip at the wall for all times
  for (double t : {0.0, 0.3, 0.8, 1.05}) {
    const FieldSample s = womersley_eval(w, {w.R, 0, 0.2}, t);
    CHECK(std::abs(s.v[2]) < 1e-12);
    const FieldSample s2 = womersley_eval(w, {w.R / std::sqrt(2.0),
                                              w.R / std::sqrt(2.0), 0.2}, t);
    CHECK(std::abs(s2.v[2]) < 1e-12);
  }

  // axial pressure gradient at t = 0: Re(k0 + k1)
  const FieldSample s0 = womersley_eval(w, {0.1, 0.05, 0.4}, 0.0);
  CHECK(s0.grad_p[2] == doctest::Approx(-21.0469 - 33.0102).epsilon(1e-12));
  CHECK(s0.grad_p[2] == doctest::Approx(-54.0571).epsilon(1e-6));

  // steady wall shear: mu dvz/dr = k0 R / 2
  const FieldSample sw = womersley_eval(steady, {w.R, 0, 0.5}, 0.0);
  CHECK(w.mu * sw.grad_v[2][0] == doctest::Approx(w.k0 * w.R / 2).epsilon(1e-12));

  CHECK_THROWS(womersley_eval(w, {w.R * 1.1, 0, 0}, 0.0));
}

TEST_CASE("Womersley: gradients and rates match finite differences") {
  const Womersley w = make_paper_womersley();
  std::uniform_real_distribution<double> ur(0.0, 0.9 * w.R), uth(0.0, 2 * M_PI),
      ut(0.0, 1.1);
  for (int k = 0; k < 15; ++k) {
    const double r = ur(rng), th = uth(rng), t = ut(rng);
    const Vec3 x = {r * std::cos(th), r * std::sin(th), 0.5};
    const FieldSample s = womersley_eval(w, x, t);
    const Vec3 g = fd_gradient(
        [&](const Vec3& y, double tt) { return womersley_eval(w, y, tt).v[2]; },
        x, t);
    const double gscale = std::abs(g[0]) + std::abs(g[1]) + 1.0;
    CHECK(std::abs(s.grad_v[2][0] - g[0]) < 1e-6 * gscale);
    CHECK(std::abs(s.grad_v[2][1] - g[1]) < 1e-6 * gscale);
    CHECK(std::abs(s.grad_v[2][2] - g[2]) < 1e-9 * gscale);
    const double vd = (womersley_eval(w, x, t + 1e-6).v[2] -
                       womersley_eval(w, x, t - 1e-6).v[2]) / 2e-6;
    CHECK(s.vdot[2] == doctest::Approx(vd).epsilon(1e-6));
    const double pd = (womersley_eval(w, x, t + 1e-6).p -
                       womersley_eval(w, x, t - 1e-6).p) / 2e-6;
    CHECK(s.pdot == doctest::Approx(pd).epsilon(1e-6).scale(std::abs(pd) + 1.0));
  }
}

TEST_CASE("Womersley: axial momentum balance in radial form") {
  // rho dvz/dt = -dp/dz + mu (vz'' + vz'/r), FD in r at interior radii
  const Womersley w = make_paper_womersley();
  const double h = 1e-4 * w.R;
  std::uniform_real_distribution<double> ur(0.05 * w.R, 0.95 * w.R),
      ut(0.0, 1.1);
  for (int k = 0; k < 15; ++k) {
    const double r = ur(rng), t = ut(rng);
    const auto vz = [&](double rr) {
      return womersley_eval(w, {rr, 0, 0.5}, t).v[2];
    };
    const FieldSample s = womersley_eval(w, {r, 0, 0.5}, t);
    const double d1 = (vz(r + h) - vz(r - h)) / (2 * h);
    const double d2 = (vz(r + h) - 2 * vz(r) + vz(r - h)) / (h * h);
    const double res = w.rho * s.vdot[2] + s.grad_p[2] - w.mu * (d2 + d1 / r);
    const double scale = std::abs(s.grad_p[2]) + w.rho * std::abs(s.vdot[2]);
    CHECK(std::abs(res) < 1e-5 * scale);
  }
}

TEST_CASE("Womersley traction: end faces") {
  const Womersley w = make_paper_womersley();
  // centerline: zero shear by symmetry, normal component is -+p
  for (double t : {0.0, 0.4}) {
    const Vec3 hin = womersley_traction(w, {0, 0, 0}, t, {0, 0, -1});
    const Vec3 hout = womersley_traction(w, {0, 0, w.L}, t, {0, 0, 1});
    CHECK(std::abs(hin[0]) < 1e-13);
    CHECK(std::abs(hin[1]) < 1e-13);
    const FieldSample sin_ = womersley_eval(w, {0, 0, 0}, t);
    const FieldSample sout = womersley_eval(w, {0, 0, w.L}, t);
    CHECK(hin[2] == doctest::Approx(sin_.p).epsilon(1e-12).scale(1.0));
    CHECK(hout[2] == doctest::Approx(-sout.p).epsilon(1e-12).scale(1.0));
  }
  // same (r,t) on the two ends: shear equal and opposite, normal components
  // differ by the pressure drop k(t) * L
  const double t = 0.6, r = 0.21;
  const Vec3 hin = womersley_traction(w, {r, 0, 0}, t, {0, 0, -1});
  const Vec3 hout = womersley_traction(w, {r, 0, w.L}, t, {0, 0, 1});
  CHECK(hin[0] == doctest::Approx(-hout[0]).epsilon(1e-12));
  const FieldSample s = womersley_eval(w, {r, 0, 0}, t);
  const double k_t = womersley_eval(w, {r, 0, 1.0}, t).p -
                     womersley_eval(w, {r, 0, 0.0}, t).p;  // k(t)*L
  CHECK(hin[2] + hout[2] == doctest::Approx(-k_t).epsilon(1e-10).scale(
                                std::abs(s.p) + std::abs(k_t) + 1.0));
  CHECK_THROWS(womersley_traction(w, {r, 0, 0}, t, {1, 0, 0}));
}
