#include "igaflow/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

namespace igaflow::kernels {
namespace {

double dot_avx2(int n, const double* a, const double* b) {
  __m256d acc = _mm256_setzero_pd();
  int i = 0;
  for (; i + 4 <= n; i += 4)
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc);
  double buf[4];
  _mm256_storeu_pd(buf, acc);
  double s = buf[0] + buf[1] + buf[2] + buf[3];
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_avx2(int n, double alpha, const double* x, double* y) {
  const __m256d va = _mm256_set1_pd(alpha);
  int i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(
        y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void grad_transform_avx2(int n, const double* T, const double* g1,
                         const double* g2, const double* g3, double* gx,
                         double* gy, double* gz) {
  const __m256d t00 = _mm256_set1_pd(T[0]), t10 = _mm256_set1_pd(T[3]),
                t20 = _mm256_set1_pd(T[6]);
  const __m256d t01 = _mm256_set1_pd(T[1]), t11 = _mm256_set1_pd(T[4]),
                t21 = _mm256_set1_pd(T[7]);
  const __m256d t02 = _mm256_set1_pd(T[2]), t12 = _mm256_set1_pd(T[5]),
                t22 = _mm256_set1_pd(T[8]);
  int k = 0;
  for (; k + 4 <= n; k += 4) {
    const __m256d a = _mm256_loadu_pd(g1 + k);
    const __m256d b = _mm256_loadu_pd(g2 + k);
    const __m256d c = _mm256_loadu_pd(g3 + k);
    _mm256_storeu_pd(
        gx + k, _mm256_fmadd_pd(t00, a, _mm256_fmadd_pd(t10, b, _mm256_mul_pd(t20, c))));
    _mm256_storeu_pd(
        gy + k, _mm256_fmadd_pd(t01, a, _mm256_fmadd_pd(t11, b, _mm256_mul_pd(t21, c))));
    _mm256_storeu_pd(
        gz + k, _mm256_fmadd_pd(t02, a, _mm256_fmadd_pd(t12, b, _mm256_mul_pd(t22, c))));
  }
  for (; k < n; ++k) {
    gx[k] = T[0] * g1[k] + T[3] * g2[k] + T[6] * g3[k];
    gy[k] = T[1] * g1[k] + T[4] * g2[k] + T[7] * g3[k];
    gz[k] = T[2] * g1[k] + T[5] * g2[k] + T[8] * g3[k];
  }
}

void velocity_block_avx2(int n, const double* N, const double* gx,
                         const double* gy, const double* gz, const double* conv,
                         const double* gradv, double c0, double c1, double cmu,
                         double* const* K) {
  const __m256d vcmu = _mm256_set1_pd(cmu);
  const __m256d gv[9] = {_mm256_set1_pd(gradv[0]), _mm256_set1_pd(gradv[1]),
                         _mm256_set1_pd(gradv[2]), _mm256_set1_pd(gradv[3]),
                         _mm256_set1_pd(gradv[4]), _mm256_set1_pd(gradv[5]),
                         _mm256_set1_pd(gradv[6]), _mm256_set1_pd(gradv[7]),
                         _mm256_set1_pd(gradv[8])};
  for (int a = 0; a < n; ++a) {
    const double Na = N[a];
    const __m256d c0Na = _mm256_set1_pd(c0 * Na);
    const __m256d c1Na = _mm256_set1_pd(c1 * Na);
    const __m256d cgax = _mm256_set1_pd(cmu * gx[a]);
    const __m256d cgay = _mm256_set1_pd(cmu * gy[a]);
    const __m256d cgaz = _mm256_set1_pd(cmu * gz[a]);
    const __m256d gax = _mm256_set1_pd(gx[a]);
    const __m256d gay = _mm256_set1_pd(gy[a]);
    const __m256d gaz = _mm256_set1_pd(gz[a]);
    const long row = static_cast<long>(a) * n;
    int b = 0;
    for (; b + 4 <= n; b += 4) {
      const __m256d Nb = _mm256_loadu_pd(N + b);
      const __m256d gbx = _mm256_loadu_pd(gx + b);
      const __m256d gby = _mm256_loadu_pd(gy + b);
      const __m256d gbz = _mm256_loadu_pd(gz + b);
      const __m256d cb = _mm256_loadu_pd(conv + b);
      __m256d gdot = _mm256_mul_pd(gax, gbx);
      gdot = _mm256_fmadd_pd(gay, gby, gdot);
      gdot = _mm256_fmadd_pd(gaz, gbz, gdot);
      __m256d s0 = _mm256_mul_pd(c0Na, Nb);
      s0 = _mm256_fmadd_pd(c1Na, cb, s0);
      s0 = _mm256_fmadd_pd(vcmu, gdot, s0);
      const __m256d t = _mm256_mul_pd(c1Na, Nb);
#define IGAFLOW_BLK(idx, cga, gb, diag)                                         \
  {                                                                             \
    double* dst = K[idx] + row + b;                                             \
    __m256d acc = _mm256_loadu_pd(dst);                                         \
    acc = _mm256_add_pd(acc, _mm256_fmadd_pd(cga, gb, _mm256_mul_pd(t, gv[idx]))); \
    if (diag) acc = _mm256_add_pd(acc, s0);                                     \
    _mm256_storeu_pd(dst, acc);                                                 \
  }
      IGAFLOW_BLK(0, cgax, gbx, true)
      IGAFLOW_BLK(1, cgay, gbx, false)
      IGAFLOW_BLK(2, cgaz, gbx, false)
      IGAFLOW_BLK(3, cgax, gby, false)
      IGAFLOW_BLK(4, cgay, gby, true)
      IGAFLOW_BLK(5, cgaz, gby, false)
      IGAFLOW_BLK(6, cgax, gbz, false)
      IGAFLOW_BLK(7, cgay, gbz, false)
      IGAFLOW_BLK(8, cgaz, gbz, true)
#undef IGAFLOW_BLK
    }
    for (; b < n; ++b) {
      const double gbx = gx[b], gby = gy[b], gbz = gz[b];
      const double s0 = c0 * Na * N[b] + c1 * Na * conv[b] +
                        cmu * (gx[a] * gbx + gy[a] * gby + gz[a] * gbz);
      const double t = c1 * Na * N[b];
      K[0][row + b] += s0 + cmu * gx[a] * gbx + t * gradv[0];
      K[1][row + b] += cmu * gy[a] * gbx + t * gradv[1];
      K[2][row + b] += cmu * gz[a] * gbx + t * gradv[2];
      K[3][row + b] += cmu * gx[a] * gby + t * gradv[3];
      K[4][row + b] += s0 + cmu * gy[a] * gby + t * gradv[4];
      K[5][row + b] += cmu * gz[a] * gby + t * gradv[5];
      K[6][row + b] += cmu * gx[a] * gbz + t * gradv[6];
      K[7][row + b] += cmu * gy[a] * gbz + t * gradv[7];
      K[8][row + b] += s0 + cmu * gz[a] * gbz + t * gradv[8];
    }
  }
}

void pressure_coupling_avx2(int nv, int np, const double* gx, const double* gy,
                            const double* gz, const double* Mp, double w,
                            double* S0, double* S1, double* S2) {
  for (int a = 0; a < nv; ++a) {
    const __m256d wx = _mm256_set1_pd(w * gx[a]);
    const __m256d wy = _mm256_set1_pd(w * gy[a]);
    const __m256d wz = _mm256_set1_pd(w * gz[a]);
    const long row = static_cast<long>(a) * np;
    int b = 0;
    for (; b + 4 <= np; b += 4) {
      const __m256d m = _mm256_loadu_pd(Mp + b);
      _mm256_storeu_pd(S0 + row + b,
                       _mm256_fmadd_pd(wx, m, _mm256_loadu_pd(S0 + row + b)));
      _mm256_storeu_pd(S1 + row + b,
                       _mm256_fmadd_pd(wy, m, _mm256_loadu_pd(S1 + row + b)));
      _mm256_storeu_pd(S2 + row + b,
                       _mm256_fmadd_pd(wz, m, _mm256_loadu_pd(S2 + row + b)));
    }
    for (; b < np; ++b) {
      S0[row + b] += w * gx[a] * Mp[b];
      S1[row + b] += w * gy[a] * Mp[b];
      S2[row + b] += w * gz[a] * Mp[b];
    }
  }
}

void residual_velocity_avx2(int n, const double* N, const double* gx,
                            const double* gy, const double* gz, const double* F,
                            const double* G, double* R0, double* R1,
                            double* R2) {
  const __m256d f0 = _mm256_set1_pd(F[0]), f1 = _mm256_set1_pd(F[1]),
                f2 = _mm256_set1_pd(F[2]);
  const __m256d g00 = _mm256_set1_pd(G[0]), g01 = _mm256_set1_pd(G[1]),
                g02 = _mm256_set1_pd(G[2]);
  const __m256d g10 = _mm256_set1_pd(G[3]), g11 = _mm256_set1_pd(G[4]),
                g12 = _mm256_set1_pd(G[5]);
  const __m256d g20 = _mm256_set1_pd(G[6]), g21 = _mm256_set1_pd(G[7]),
                g22 = _mm256_set1_pd(G[8]);
  int a = 0;
  for (; a + 4 <= n; a += 4) {
    const __m256d Na = _mm256_loadu_pd(N + a);
    const __m256d ax = _mm256_loadu_pd(gx + a);
    const __m256d ay = _mm256_loadu_pd(gy + a);
    const __m256d az = _mm256_loadu_pd(gz + a);
    __m256d r = _mm256_loadu_pd(R0 + a);
    r = _mm256_fmadd_pd(Na, f0, r);
    r = _mm256_fmadd_pd(ax, g00, r);
    r = _mm256_fmadd_pd(ay, g01, r);
    r = _mm256_fmadd_pd(az, g02, r);
    _mm256_storeu_pd(R0 + a, r);
    r = _mm256_loadu_pd(R1 + a);
    r = _mm256_fmadd_pd(Na, f1, r);
    r = _mm256_fmadd_pd(ax, g10, r);
    r = _mm256_fmadd_pd(ay, g11, r);
    r = _mm256_fmadd_pd(az, g12, r);
    _mm256_storeu_pd(R1 + a, r);
    r = _mm256_loadu_pd(R2 + a);
    r = _mm256_fmadd_pd(Na, f2, r);
    r = _mm256_fmadd_pd(ax, g20, r);
    r = _mm256_fmadd_pd(ay, g21, r);
    r = _mm256_fmadd_pd(az, g22, r);
    _mm256_storeu_pd(R2 + a, r);
  }
  for (; a < n; ++a) {
    R0[a] += N[a] * F[0] + gx[a] * G[0] + gy[a] * G[1] + gz[a] * G[2];
    R1[a] += N[a] * F[1] + gx[a] * G[3] + gy[a] * G[4] + gz[a] * G[5];
    R2[a] += N[a] * F[2] + gx[a] * G[6] + gy[a] * G[7] + gz[a] * G[8];
  }
}

}  // namespace

const KernelSet* avx2_set() {
  static const KernelSet set = {Isa::avx2,
                                "avx2",
                                dot_avx2,
                                axpy_avx2,
                                grad_transform_avx2,
                                velocity_block_avx2,
                                pressure_coupling_avx2,
                                residual_velocity_avx2};
  return &set;
}

}  // namespace igaflow::kernels

#else

namespace igaflow::kernels {
const KernelSet* avx2_set() { return nullptr; }
}  // namespace igaflow::kernels

#endif
