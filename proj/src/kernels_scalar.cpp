#include "igaflow/kernels.hpp"

namespace igaflow::kernels {
namespace {

double dot_scalar(int n, const double* a, const double* b) {
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_scalar(int n, double alpha, const double* x, double* y) {
  for (int i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void grad_transform_scalar(int n, const double* T, const double* g1,
                           const double* g2, const double* g3, double* gx,
                           double* gy, double* gz) {
  for (int k = 0; k < n; ++k) {
    gx[k] = T[0] * g1[k] + T[3] * g2[k] + T[6] * g3[k];
    gy[k] = T[1] * g1[k] + T[4] * g2[k] + T[7] * g3[k];
    gz[k] = T[2] * g1[k] + T[5] * g2[k] + T[8] * g3[k];
  }
}

void velocity_block_scalar(int n, const double* N, const double* gx,
                           const double* gy, const double* gz,
                           const double* conv, const double* gradv, double c0,
                           double c1, double cmu, double* const* K) {
  for (int a = 0; a < n; ++a) {
    const double Na = N[a];
    const double gax = gx[a], gay = gy[a], gaz = gz[a];
    const double c0Na = c0 * Na, c1Na = c1 * Na;
    const long row = static_cast<long>(a) * n;
    double* K00 = K[0] + row;
    double* K01 = K[1] + row;
    double* K02 = K[2] + row;
    double* K10 = K[3] + row;
    double* K11 = K[4] + row;
    double* K12 = K[5] + row;
    double* K20 = K[6] + row;
    double* K21 = K[7] + row;
    double* K22 = K[8] + row;
    for (int b = 0; b < n; ++b) {
      const double gbx = gx[b], gby = gy[b], gbz = gz[b];
      const double s0 = c0Na * N[b] + c1Na * conv[b] +
                        cmu * (gax * gbx + gay * gby + gaz * gbz);
      const double t = c1Na * N[b];
      K00[b] += s0 + cmu * gax * gbx + t * gradv[0];
      K01[b] += cmu * gay * gbx + t * gradv[1];
      K02[b] += cmu * gaz * gbx + t * gradv[2];
      K10[b] += cmu * gax * gby + t * gradv[3];
      K11[b] += s0 + cmu * gay * gby + t * gradv[4];
      K12[b] += cmu * gaz * gby + t * gradv[5];
      K20[b] += cmu * gax * gbz + t * gradv[6];
      K21[b] += cmu * gay * gbz + t * gradv[7];
      K22[b] += s0 + cmu * gaz * gbz + t * gradv[8];
    }
  }
}

void pressure_coupling_scalar(int nv, int np, const double* gx,
                              const double* gy, const double* gz,
                              const double* Mp, double w, double* S0,
                              double* S1, double* S2) {
  for (int a = 0; a < nv; ++a) {
    const double wx = w * gx[a], wy = w * gy[a], wz = w * gz[a];
    const long row = static_cast<long>(a) * np;
    for (int b = 0; b < np; ++b) {
      S0[row + b] += wx * Mp[b];
      S1[row + b] += wy * Mp[b];
      S2[row + b] += wz * Mp[b];
    }
  }
}

void residual_velocity_scalar(int n, const double* N, const double* gx,
                              const double* gy, const double* gz,
                              const double* F, const double* G, double* R0,
                              double* R1, double* R2) {
  for (int a = 0; a < n; ++a) {
    R0[a] += N[a] * F[0] + gx[a] * G[0] + gy[a] * G[1] + gz[a] * G[2];
    R1[a] += N[a] * F[1] + gx[a] * G[3] + gy[a] * G[4] + gz[a] * G[5];
    R2[a] += N[a] * F[2] + gx[a] * G[6] + gy[a] * G[7] + gz[a] * G[8];
  }
}

}  // namespace

const KernelSet& scalar_set() {
  static const KernelSet set = {Isa::scalar,
                                "scalar",
                                dot_scalar,
                                axpy_scalar,
                                grad_transform_scalar,
                                velocity_block_scalar,
                                pressure_coupling_scalar,
                                residual_velocity_scalar};
  return set;
}

}  // namespace igaflow::kernels
