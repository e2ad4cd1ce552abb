#pragma once

#include <cstddef>
#include <string>

namespace igaflow::kernels {

// Per-quadrature-point inner loops of the Galerkin assembly, written against
// contiguous (structure-of-arrays) basis tables. A scalar reference
// implementation defines the semantics; AVX2 (x86-64) and NEON (aarch64)
// variants are selected at runtime and are equivalence-tested against the
// reference in the unit suite.

/// sum_i a[i]*b[i]
using DotFn = double (*)(int n, const double* a, const double* b);

/// y[i] += alpha*x[i]
using AxpyFn = void (*)(int n, double alpha, const double* x, double* y);

/// Physical gradients from parametric ones: for each k,
///   gx[k] = T[0]*g1[k] + T[1]*g2[k] + T[2]*g3[k]  (and gy, gz with T+3, T+6)
/// where T is J^{-1} stored row-major, so T[3*d+i] = dxi_d/dx_i.
using GradTransformFn = void (*)(int n, const double* T, const double* g1,
                                 const double* g2, const double* g3, double* gx,
                                 double* gy, double* gz);

/// Velocity-velocity tangent accumulation at one quadrature point.
/// K is an array of 9 row-major na x nb blocks, K[3*i+j][a*nb+b] being the
/// coupling of test component i and trial component j:
///   K[i][j][a,b] += delta_ij*(c0*N[a]*N[b] + c1*N[a]*conv[b] + cmu*(ga.gb))
///                 + cmu*ga[j]*gb[i] + c1*N[a]*N[b]*gradv[i][j]
/// with ga = (gx[a],gy[a],gz[a]). Quadrature weight and material/scheme
/// factors are pre-folded into c0, c1, cmu; gradv is row-major dv_i/dx_j.
using VelocityBlockFn = void (*)(int n, const double* N, const double* gx,
                                 const double* gy, const double* gz,
                                 const double* conv, const double* gradv,
                                 double c0, double c1, double cmu,
                                 double* const* K);

/// Divergence/gradient coupling accumulation at one quadrature point.
/// S[i][a*np + b] += w*gi[a]*Mp[b] for the three gradient components.
using PressureCouplingFn = void (*)(int nv, int np, const double* gx,
                                    const double* gy, const double* gz,
                                    const double* Mp, double w, double* S0,
                                    double* S1, double* S2);

/// Momentum residual accumulation at one quadrature point.
/// R_i[a] += N[a]*F[i] + gx[a]*G[3i] + gy[a]*G[3i+1] + gz[a]*G[3i+2]
using ResidualVelocityFn = void (*)(int n, const double* N, const double* gx,
                                    const double* gy, const double* gz,
                                    const double* F, const double* G,
                                    double* R0, double* R1, double* R2);

enum class Isa { scalar, avx2, neon };

struct KernelSet {
  Isa isa;
  const char* name;
  DotFn dot;
  AxpyFn axpy;
  GradTransformFn grad_transform;
  VelocityBlockFn velocity_block;
  PressureCouplingFn pressure_coupling;
  ResidualVelocityFn residual_velocity;
};

/// Kernel set chosen at first use: the best ISA the CPU supports, overridable
/// with IGAFLOW_KERNELS=scalar|avx2|neon. The choice is fixed per process.
const KernelSet& active();

/// Specific set, or nullptr when unsupported on this build/CPU.
const KernelSet* get(Isa isa);

const KernelSet& scalar_set();

}  // namespace igaflow::kernels
