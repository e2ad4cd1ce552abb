#include <doctest.h>

#include <cmath>
#include <random>
#include <tuple>

#include "igaflow/splines.hpp"

using namespace igaflow;

namespace {

// Brute-force full-table Cox-de Boor recursion over all n functions, with no
// local-support shortcuts. Test-only oracle, independent of the library path.
std::vector<double> brute_force_all(const std::vector<double>& U, int p,
                                    double x) {
  const int nfun0 = static_cast<int>(U.size()) - 1;
  std::vector<double> N(nfun0, 0.0);
  for (int i = 0; i < nfun0; ++i) {
    const bool last = U[i + 1] == U.back();
    if ((x >= U[i] && x < U[i + 1]) || (last && x == U.back() && U[i] < U[i + 1]))
      N[i] = 1.0;
  }
  for (int d = 1; d <= p; ++d) {
    std::vector<double> M(U.size() - 1 - d, 0.0);
    for (size_t i = 0; i + d + 1 < U.size(); ++i) {
      double t1 = 0.0, t2 = 0.0;
      if (U[i + d] > U[i]) t1 = (x - U[i]) / (U[i + d] - U[i]) * N[i];
      if (U[i + d + 1] > U[i + 1])
        t2 = (U[i + d + 1] - x) / (U[i + d + 1] - U[i + 1]) * N[i + 1];
      M[i] = t1 + t2;
    }
    N = M;
  }
  return N;  // size = dim
}

std::vector<double> global_values(const KnotVector& kv, double xi) {
  std::vector<double> out(kv.dim(), 0.0);
  const LocalBasis lb = eval_bspline(kv, xi);
  for (int r = 0; r <= kv.degree(); ++r) out[lb.first + r] = lb.values[r];
  return out;
}

}  // namespace

TEST_CASE("open uniform knot vectors") {
  const KnotVector kv = KnotVector::open_uniform(2, 2, 1);
  CHECK(kv.knots() == std::vector<double>{0, 0, 0, 0.5, 1, 1, 1});
  CHECK(kv.dim() == 4);

  const KnotVector lin = KnotVector::open_uniform(1, 1, 0);
  CHECK(lin.knots() == std::vector<double>{0, 0, 1, 1});
  CHECK(lin.dim() == 2);

  // dimension formula cross-checked by counting nonzero functions in the
  // brute-force tabulation
  const KnotVector big = KnotVector::open_uniform(25, 4, 3);
  CHECK(big.dim() == 29);
  std::vector<char> seen(static_cast<size_t>(big.dim()), 0);
  for (int k = 0; k <= 200; ++k) {
    const auto vals = brute_force_all(big.knots(), 4, k / 200.0);
    REQUIRE(static_cast<int>(vals.size()) == big.dim());
    for (size_t i = 0; i < vals.size(); ++i)
      if (vals[i] > 1e-14) seen[i] = 1;
  }
  int distinct = 0;
  for (char c : seen) distinct += c;
  CHECK(distinct == 29);

  CHECK_THROWS(KnotVector::open_uniform(2, 2, 2));   // continuity >= degree
  CHECK_THROWS(KnotVector::open_uniform(0, 2, 1));   // nel < 1
  CHECK_THROWS(KnotVector::open_uniform(2, 2, -1));  // negative continuity
}

TEST_CASE("unique knots and multiplicities") {
  const KnotVector kv = KnotVector::open_uniform(3, 3, 1);
  const auto [z, r] = kv.unique_knots();
  CHECK(z == std::vector<double>{0, 1.0 / 3, 2.0 / 3, 1});
  CHECK(r == std::vector<int>{4, 2, 2, 4});
}

TEST_CASE("find_span") {
  const KnotVector kv(2, {0, 0, 0, 0.5, 1, 1, 1});
  CHECK(kv.find_span(0.25) == 2);
  CHECK(kv.find_span(1.0) == 3);
  CHECK(kv.find_span(0.5) == 3);
  const KnotVector lin(1, {0, 0, 1, 1});
  CHECK(lin.find_span(0.0) == 1);
  CHECK_THROWS(kv.find_span(-0.1));
  CHECK_THROWS(kv.find_span(1.1));
}

TEST_CASE("linear hat functions") {
  const KnotVector kv(1, {0, 0, 1, 1});
  const LocalBasis lb = eval_bspline(kv, 0.5);
  CHECK(lb.values[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(lb.values[1] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(lb.derivs[0] == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(lb.derivs[1] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("partition of unity, nonnegativity, derivative sum") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (const auto& [nel, deg, cont] :
       {std::tuple{2, 2, 1}, {5, 3, 2}, {4, 4, 1}, {6, 5, 4}, {1, 1, 0}}) {
    const KnotVector kv = KnotVector::open_uniform(nel, deg, cont);
    for (int k = 0; k < 40; ++k) {
      const double xi = (k < 2) ? double(k) : uni(rng);
      const LocalBasis lb = eval_bspline(kv, xi);
      double s = 0.0, ds = 0.0;
      for (int r = 0; r <= deg; ++r) {
        CHECK(lb.values[r] >= -1e-14);
        s += lb.values[r];
        ds += lb.derivs[r];
      }
      CHECK(std::abs(s - 1.0) < 1e-12);
      CHECK(std::abs(ds) < 1e-11);
    }
  }
}

TEST_CASE("brute-force Cox-de Boor oracle agreement") {
  const KnotVector kv(2, {0, 0, 0, 0.5, 1, 1, 1});
  const auto oracle = brute_force_all(kv.knots(), 2, 0.75);
  const auto vals = global_values(kv, 0.75);
  REQUIRE(oracle.size() == vals.size());
  for (size_t i = 0; i < vals.size(); ++i)
    CHECK(vals[i] == doctest::Approx(oracle[i]).epsilon(1e-14));

  std::mt19937 rng(11);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (const auto& [nel, deg, cont] : {std::tuple{3, 3, 1}, {7, 4, 3}, {2, 5, 0}}) {
    const KnotVector k2 = KnotVector::open_uniform(nel, deg, cont);
    for (int k = 0; k < 25; ++k) {
      const double xi = uni(rng);
      const auto o = brute_force_all(k2.knots(), deg, xi);
      const auto v = global_values(k2, xi);
      for (size_t i = 0; i < v.size(); ++i)
        CHECK(std::abs(v[i] - o[i]) < 1e-13);
    }
  }
}

TEST_CASE("derivatives match central finite differences") {
  std::mt19937 rng(13);
  std::uniform_real_distribution<double> uni(0.05, 0.95);
  const KnotVector kv = KnotVector::open_uniform(5, 4, 2);
  const double h = 1e-6;
  for (int k = 0; k < 20; ++k) {
    double xi = uni(rng);
    // keep away from knots so the FD stencil stays inside one span
    const auto [z, r] = kv.unique_knots();
    for (double zk : z)
      if (std::abs(xi - zk) < 10 * h) xi += 20 * h;
    const int span = kv.find_span(xi);
    std::vector<double> vm(5), vp(5), vals(5), ders(5);
    kv.eval_basis(xi, span, vals, ders);
    kv.eval_basis(xi - h, span, vm, {});
    kv.eval_basis(xi + h, span, vp, {});
    for (int i = 0; i < 5; ++i) {
      const double fd = (vp[i] - vm[i]) / (2 * h);
      CHECK(ders[i] == doctest::Approx(fd).epsilon(1e-6));
    }
  }
}

TEST_CASE("continuity at interior knots via one-sided span evaluation") {
  for (const auto& [nel, deg, cont] :
       {std::tuple{4, 3, 2}, {4, 3, 0}, {3, 2, 1}, {5, 4, 1}}) {
    const KnotVector kv = KnotVector::open_uniform(nel, deg, cont);
    const SplineSpace1D sp{kv};
    const auto [z, r] = kv.unique_knots();
    for (size_t iz = 1; iz + 1 < z.size(); ++iz) {
      const double zk = z[iz];
      const int right_span = kv.find_span(zk);
      // the span ending at zk: last nonempty span left of it
      int left_span = right_span;
      for (int e = 0; e < kv.num_spans(); ++e)
        if (kv.span_interval(e).second == zk) left_span = kv.span_knot_index(e);
      const LocalBasis L = sp.eval_at_span(zk, left_span);
      const LocalBasis R = sp.eval_at_span(zk, right_span);
      std::vector<double> lv(kv.dim(), 0.0), rv(kv.dim(), 0.0), ld(kv.dim(), 0.0),
          rd(kv.dim(), 0.0);
      for (int k = 0; k <= deg; ++k) {
        lv[L.first + k] = L.values[k];
        ld[L.first + k] = L.derivs[k];
        rv[R.first + k] = R.values[k];
        rd[R.first + k] = R.derivs[k];
      }
      for (int i = 0; i < kv.dim(); ++i) {
        CHECK(std::abs(lv[i] - rv[i]) < 1e-12);
        if (cont >= 1) CHECK(std::abs(ld[i] - rd[i]) < 1e-10);
      }
    }
  }
}

TEST_CASE("NURBS with unit weights equals the B-spline basis exactly") {
  const KnotVector kv = KnotVector::open_uniform(4, 3, 2);
  const SplineSpace1D sp{kv};
  for (double xi : {0.0, 0.1, 0.37, 0.55, 0.99, 1.0}) {
    const LocalBasis a = sp.eval(xi);
    const LocalBasis b = eval_bspline(kv, xi);
    for (int r = 0; r <= 3; ++r) {
      CHECK(a.values[r] == b.values[r]);  // bitwise
      CHECK(a.derivs[r] == b.derivs[r]);
    }
  }
}

TEST_CASE("quarter-circle rational weights") {
  const KnotVector kv(2, {0, 0, 0, 1, 1, 1});
  const SplineSpace1D sp(kv, {1.0, std::sqrt(2.0) / 2.0, 1.0});
  const LocalBasis lb = sp.eval(0.5);
  // hand evaluation of the quotient: W(1/2) = (2+sqrt(2))/4
  const double W = 0.5 + std::sqrt(2.0) / 4.0;
  CHECK(lb.values[0] == doctest::Approx(0.25 / W).epsilon(1e-10));
  CHECK(lb.values[1] == doctest::Approx((std::sqrt(2.0) / 4.0) / W).epsilon(1e-10));
  CHECK(lb.values[2] == doctest::Approx(0.25 / W).epsilon(1e-10));
  CHECK(lb.values[0] == doctest::Approx(0.29289).epsilon(1e-4));
  CHECK(lb.values[1] == doctest::Approx(0.41421).epsilon(1e-4));

  std::mt19937 rng(17);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (int k = 0; k < 10; ++k) {
    const LocalBasis b = sp.eval(uni(rng));
    double s = 0.0, ds = 0.0;
    for (int r = 0; r <= 2; ++r) {
      s += b.values[r];
      ds += b.derivs[r];
      CHECK(b.values[r] >= -1e-14);
    }
    CHECK(std::abs(s - 1.0) < 1e-13);
    CHECK(std::abs(ds) < 1e-13);
  }
}

TEST_CASE("tensor basis: trilinear element and partition of unity") {
  const KnotVector lin = KnotVector::open_uniform(1, 1, 0);
  const TensorBasis tb({SplineSpace1D{lin}, SplineSpace1D{lin}, SplineSpace1D{lin}});
  CHECK(tb.total_dim() == 8);
  const TensorEval te = tb.eval({0.5, 0.5, 0.5});
  REQUIRE(te.count == 8);
  for (int k = 0; k < 8; ++k)
    CHECK(te.values[k] == doctest::Approx(0.125).epsilon(1e-15));

  const KnotVector kv = KnotVector::open_uniform(3, 3, 2);
  const TensorBasis big({SplineSpace1D{kv}, SplineSpace1D{kv}, SplineSpace1D{kv}});
  std::mt19937 rng(19);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (int k = 0; k < 20; ++k) {
    const Vec3 xi = {uni(rng), uni(rng), uni(rng)};
    const TensorEval t = big.eval(xi);
    double s = 0.0;
    Vec3 gs = {0, 0, 0};
    for (int i = 0; i < t.count; ++i) {
      s += t.values[i];
      for (int d = 0; d < 3; ++d) gs[d] += t.grads[3 * i + d];
    }
    CHECK(std::abs(s - 1.0) < 1e-12);
    for (int d = 0; d < 3; ++d) CHECK(std::abs(gs[d]) < 1e-11);
  }
}

TEST_CASE("tensor gradients match finite differences of values") {
  const KnotVector kv = KnotVector::open_uniform(3, 2, 1);
  const TensorBasis tb({SplineSpace1D{kv}, SplineSpace1D{kv}, SplineSpace1D{kv}});
  std::mt19937 rng(23);
  std::uniform_real_distribution<double> uni(0.1, 0.9);
  const double h = 1e-6;
  for (int k = 0; k < 10; ++k) {
    Vec3 xi = {uni(rng), uni(rng), uni(rng)};
    for (int d = 0; d < 3; ++d) {
      // nudge away from knot lines
      for (double zk : {1.0 / 3, 2.0 / 3})
        if (std::abs(xi[d] - zk) < 10 * h) xi[d] += 20 * h;
    }
    const TensorEval t0 = tb.eval(xi);
    for (int d = 0; d < 3; ++d) {
      Vec3 xp = xi, xm = xi;
      xp[d] += h;
      xm[d] -= h;
      const TensorEval tp = tb.eval(xp);
      const TensorEval tm = tb.eval(xm);
      for (int i = 0; i < t0.count; ++i) {
        const double fd = (tp.values[i] - tm.values[i]) / (2 * h);
        const double an = t0.grads[3 * i + d];
        CHECK(std::abs(fd - an) <= 1e-6 * std::max(1.0, std::abs(an)));
      }
    }
  }
}

TEST_CASE("dimension formula property") {
  std::mt19937 rng(29);
  for (int trial = 0; trial < 20; ++trial) {
    const int deg = 1 + int(rng() % 5);
    const int cont = int(rng() % deg);
    const int nel = 1 + int(rng() % 9);
    const KnotVector kv = KnotVector::open_uniform(nel, deg, cont);
    CHECK(kv.dim() == (deg + 1) + (nel - 1) * (deg - cont));
    CHECK(int(kv.knots().size()) == kv.dim() + deg + 1);
    CHECK(kv.num_spans() == nel);
  }
}
