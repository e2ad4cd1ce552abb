#include "igaflow/kernels.hpp"

#if defined(__aarch64__)

#include <arm_neon.h>

namespace igaflow::kernels {
namespace {

double dot_neon(int n, const double* a, const double* b) {
  float64x2_t acc = vdupq_n_f64(0.0);
  int i = 0;
  for (; i + 2 <= n; i += 2)
    acc = vfmaq_f64(acc, vld1q_f64(a + i), vld1q_f64(b + i));
  double s = vgetq_lane_f64(acc, 0) + vgetq_lane_f64(acc, 1);
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_neon(int n, double alpha, const double* x, double* y) {
  const float64x2_t va = vdupq_n_f64(alpha);
  int i = 0;
  for (; i + 2 <= n; i += 2)
    vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void grad_transform_neon(int n, const double* T, const double* g1,
                         const double* g2, const double* g3, double* gx,
                         double* gy, double* gz) {
  int k = 0;
  for (; k + 2 <= n; k += 2) {
    const float64x2_t a = vld1q_f64(g1 + k);
    const float64x2_t b = vld1q_f64(g2 + k);
    const float64x2_t c = vld1q_f64(g3 + k);
    float64x2_t r = vmulq_n_f64(a, T[0]);
    r = vfmaq_n_f64(r, b, T[3]);
    r = vfmaq_n_f64(r, c, T[6]);
    vst1q_f64(gx + k, r);
    r = vmulq_n_f64(a, T[1]);
    r = vfmaq_n_f64(r, b, T[4]);
    r = vfmaq_n_f64(r, c, T[7]);
    vst1q_f64(gy + k, r);
    r = vmulq_n_f64(a, T[2]);
    r = vfmaq_n_f64(r, b, T[5]);
    r = vfmaq_n_f64(r, c, T[8]);
    vst1q_f64(gz + k, r);
  }
  for (; k < n; ++k) {
    gx[k] = T[0] * g1[k] + T[3] * g2[k] + T[6] * g3[k];
    gy[k] = T[1] * g1[k] + T[4] * g2[k] + T[7] * g3[k];
    gz[k] = T[2] * g1[k] + T[5] * g2[k] + T[8] * g3[k];
  }
}

void velocity_block_neon(int n, const double* N, const double* gx,
                         const double* gy, const double* gz, const double* conv,
                         const double* gradv, double c0, double c1, double cmu,
                         double* const* K) {
  for (int a = 0; a < n; ++a) {
    const double Na = N[a];
    const double c0Na = c0 * Na, c1Na = c1 * Na;
    const double gax = gx[a], gay = gy[a], gaz = gz[a];
    const long row = static_cast<long>(a) * n;
    int b = 0;
    for (; b + 2 <= n; b += 2) {
      const float64x2_t Nb = vld1q_f64(N + b);
      const float64x2_t gbx = vld1q_f64(gx + b);
      const float64x2_t gby = vld1q_f64(gy + b);
      const float64x2_t gbz = vld1q_f64(gz + b);
      const float64x2_t cb = vld1q_f64(conv + b);
      float64x2_t gdot = vmulq_n_f64(gbx, gax);
      gdot = vfmaq_n_f64(gdot, gby, gay);
      gdot = vfmaq_n_f64(gdot, gbz, gaz);
      float64x2_t s0 = vmulq_n_f64(Nb, c0Na);
      s0 = vfmaq_n_f64(s0, cb, c1Na);
      s0 = vfmaq_n_f64(s0, gdot, cmu);
      const float64x2_t t = vmulq_n_f64(Nb, c1Na);
#define IGAFLOW_BLK(idx, ga, gb, diag)                       \
  {                                                          \
    double* dst = K[idx] + row + b;                          \
    float64x2_t acc = vld1q_f64(dst);                        \
    acc = vfmaq_n_f64(acc, gb, cmu * ga);                    \
    acc = vfmaq_n_f64(acc, t, gradv[idx]);                   \
    if (diag) acc = vaddq_f64(acc, s0);                      \
    vst1q_f64(dst, acc);                                     \
  }
      IGAFLOW_BLK(0, gax, gbx, true)
      IGAFLOW_BLK(1, gay, gbx, false)
      IGAFLOW_BLK(2, gaz, gbx, false)
      IGAFLOW_BLK(3, gax, gby, false)
      IGAFLOW_BLK(4, gay, gby, true)
      IGAFLOW_BLK(5, gaz, gby, false)
      IGAFLOW_BLK(6, gax, gbz, false)
      IGAFLOW_BLK(7, gay, gbz, false)
      IGAFLOW_BLK(8, gaz, gbz, true)
#undef IGAFLOW_BLK
    }
    for (; b < n; ++b) {
      const double gbx = gx[b], gby = gy[b], gbz = gz[b];
      const double s0 =
          c0Na * N[b] + c1Na * conv[b] + cmu * (gax * gbx + gay * gby + gaz * gbz);
      const double t = c1Na * N[b];
      K[0][row + b] += s0 + cmu * gax * gbx + t * gradv[0];
      K[1][row + b] += cmu * gay * gbx + t * gradv[1];
      K[2][row + b] += cmu * gaz * gbx + t * gradv[2];
      K[3][row + b] += cmu * gax * gby + t * gradv[3];
      K[4][row + b] += s0 + cmu * gay * gby + t * gradv[4];
      K[5][row + b] += cmu * gaz * gby + t * gradv[5];
      K[6][row + b] += cmu * gax * gbz + t * gradv[6];
      K[7][row + b] += cmu * gay * gbz + t * gradv[7];
      K[8][row + b] += s0 + cmu * gaz * gbz + t * gradv[8];
    }
  }
}

void pressure_coupling_neon(int nv, int np, const double* gx, const double* gy,
                            const double* gz, const double* Mp, double w,
                            double* S0, double* S1, double* S2) {
  for (int a = 0; a < nv; ++a) {
    const double wx = w * gx[a], wy = w * gy[a], wz = w * gz[a];
    const long row = static_cast<long>(a) * np;
    int b = 0;
    for (; b + 2 <= np; b += 2) {
      const float64x2_t m = vld1q_f64(Mp + b);
      vst1q_f64(S0 + row + b, vfmaq_n_f64(vld1q_f64(S0 + row + b), m, wx));
      vst1q_f64(S1 + row + b, vfmaq_n_f64(vld1q_f64(S1 + row + b), m, wy));
      vst1q_f64(S2 + row + b, vfmaq_n_f64(vld1q_f64(S2 + row + b), m, wz));
    }
    for (; b < np; ++b) {
      S0[row + b] += wx * Mp[b];
      S1[row + b] += wy * Mp[b];
      S2[row + b] += wz * Mp[b];
    }
  }
}

void residual_velocity_neon(int n, const double* N, const double* gx,
                            const double* gy, const double* gz, const double* F,
                            const double* G, double* R0, double* R1,
                            double* R2) {
  int a = 0;
  for (; a + 2 <= n; a += 2) {
    const float64x2_t Na = vld1q_f64(N + a);
    const float64x2_t ax = vld1q_f64(gx + a);
    const float64x2_t ay = vld1q_f64(gy + a);
    const float64x2_t az = vld1q_f64(gz + a);
    float64x2_t r = vld1q_f64(R0 + a);
    r = vfmaq_n_f64(r, Na, F[0]);
    r = vfmaq_n_f64(r, ax, G[0]);
    r = vfmaq_n_f64(r, ay, G[1]);
    r = vfmaq_n_f64(r, az, G[2]);
    vst1q_f64(R0 + a, r);
    r = vld1q_f64(R1 + a);
    r = vfmaq_n_f64(r, Na, F[1]);
    r = vfmaq_n_f64(r, ax, G[3]);
    r = vfmaq_n_f64(r, ay, G[4]);
    r = vfmaq_n_f64(r, az, G[5]);
    vst1q_f64(R1 + a, r);
    r = vld1q_f64(R2 + a);
    r = vfmaq_n_f64(r, Na, F[2]);
    r = vfmaq_n_f64(r, ax, G[6]);
    r = vfmaq_n_f64(r, ay, G[7]);
    r = vfmaq_n_f64(r, az, G[8]);
    vst1q_f64(R2 + a, r);
  }
  for (; a < n; ++a) {
    R0[a] += N[a] * F[0] + gx[a] * G[0] + gy[a] * G[1] + gz[a] * G[2];
    R1[a] += N[a] * F[1] + gx[a] * G[3] + gy[a] * G[4] + gz[a] * G[5];
    R2[a] += N[a] * F[2] + gx[a] * G[6] + gy[a] * G[7] + gz[a] * G[8];
  }
}

}  // namespace

const KernelSet* neon_set() {
  static const KernelSet set = {Isa::neon,
                                "neon",
                                dot_neon,
                                axpy_neon,
                                grad_transform_neon,
                                velocity_block_neon,
                                pressure_coupling_neon,
                                residual_velocity_neon};
  return &set;
}

}  // namespace igaflow::kernels

#else

namespace igaflow::kernels {
const KernelSet* neon_set() { return nullptr; }
}  // namespace igaflow::kernels

#endif
