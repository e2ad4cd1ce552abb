#include "igaflow/assembly.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <algorithm>
#include <cstring>

#include "igaflow/kernels.hpp"
#include "igaflow/quadrature.hpp"

namespace igaflow {

namespace {

// Per-direction basis tables at all (element, gauss point) pairs.
struct DimTables {
  int nel = 0, q = 0;
  int degv = 0, degp = 0;
  std::vector<double> vN, vD, pN, pD;  // [e*q + g][deg+1]
  std::vector<double> xi;              // [e*q + g] parametric point
  std::vector<double> w;               // [e*q + g] gauss weight * span length
  std::vector<int> vfirst, pfirst;     // [e] first active function

  const double* vn(int e, int g) const { return &vN[(e * q + g) * (degv + 1)]; }
  const double* vd(int e, int g) const { return &vD[(e * q + g) * (degv + 1)]; }
  const double* pn(int e, int g) const { return &pN[(e * q + g) * (degp + 1)]; }
  const double* pd(int e, int g) const { return &pD[(e * q + g) * (degp + 1)]; }
};

struct GeoQP {
  Vec3 x;
  double T[9];  // J^{-1}, row-major: T[3d+i] = dxi_d/dx_i
  double wdetJ;
};

struct FaceQPData {
  Vec3 x;
  Vec3 n;
  double dGamma;
  std::vector<int> nodes;       // velocity nodes active at the point
  std::vector<double> values;   // matching basis values
};

struct FaceData {
  FaceId id;
  FaceType type;
  std::vector<FaceQPData> qps;
};

}  // namespace

struct Assembler::Impl {
  NurbsPatch patch;
  MixedSpace ms;
  MaterialParams mat;

  int q = 0;                      // gauss points per direction per span
  std::array<int, 3> nel{};
  std::array<DimTables, 3> dims;
  std::vector<GeoQP> geo;         // [elem][qp] flattened
  std::vector<BoundaryFace> faces_raw;
  std::vector<FaceData> faces;

  int nenv = 0, nenp = 0;         // local function counts
  long nvf = 0;                   // free velocity dof count

  // coupled-system CSR + per-element scatter slot tables (built lazily)
  Csr A;
  bool pattern_built = false;
  std::vector<std::vector<int>> vv_slots, vp_slots, pv_slots;  // per element

  // per-dim neighbor ranges (inclusive) for pattern construction
  std::array<std::vector<int>, 3> vv_lo, vv_hi, vp_lo, vp_hi, pv_lo, pv_hi;

  // mass matrices for projections (lazy)
  Csr vmass, pmass;
  SparseLu vmass_lu, pmass_lu;
  bool vmass_ready = false, pmass_ready = false;

  // scratch buffers (assembly is single-threaded)
  mutable std::vector<double> bufN, bufG1, bufG2, bufG3, bufGx, bufGy, bufGz,
      bufConv, bufNp, bufPG1, bufPG2, bufPG3, bufPGx, bufPGy, bufPGz;
  mutable std::array<std::vector<double>, 3> vl, vdl, Re;
  mutable std::vector<double> pl, Rp;
  std::array<std::vector<double>, 9> Ke;
  std::array<std::vector<double>, 3> Se;

  Impl(const NurbsPatch& patch_, const MixedSpace& ms_, MaterialParams mat_)
      : patch(patch_), ms(ms_), mat(std::move(mat_)) {
    const int degv = ms.degree_p() + 1, degp = ms.degree_p();
    q = degv + 2;
    nel = ms.nel();
    nenv = (degv + 1) * (degv + 1) * (degv + 1);
    nenp = (degp + 1) * (degp + 1) * (degp + 1);
    nvf = ms.n_vfree();
    build_dim_tables();
    build_geometry_cache();
    build_faces();
    alloc_scratch();
  }

  void build_dim_tables() {
    const QuadratureRule rule = gauss_legendre(q);
    for (int d = 0; d < 3; ++d) {
      DimTables& t = dims[d];
      const KnotVector& vkv = ms.velocity_space().space(d).knot_vector();
      const KnotVector& pkv = ms.pressure_space().space(d).knot_vector();
      t.nel = nel[d];
      t.q = q;
      t.degv = vkv.degree();
      t.degp = pkv.degree();
      const int nqp = t.nel * q;
      t.vN.resize(nqp * (t.degv + 1));
      t.vD.resize(nqp * (t.degv + 1));
      t.pN.resize(nqp * (t.degp + 1));
      t.pD.resize(nqp * (t.degp + 1));
      t.xi.resize(nqp);
      t.w.resize(nqp);
      t.vfirst.resize(t.nel);
      t.pfirst.resize(t.nel);
      for (int e = 0; e < t.nel; ++e) {
        const int vspan = vkv.span_knot_index(e);
        const int pspan = pkv.span_knot_index(e);
        t.vfirst[e] = vkv.first_active(vspan);
        t.pfirst[e] = pkv.first_active(pspan);
        const auto [a, b] = vkv.span_interval(e);
        for (int g = 0; g < q; ++g) {
          const int k = e * q + g;
          const double xi = a + (b - a) * rule.points[g];
          t.xi[k] = xi;
          t.w[k] = (b - a) * rule.weights[g];
          vkv.eval_basis(xi, vspan, {&t.vN[k * (t.degv + 1)], size_t(t.degv + 1)},
                         {&t.vD[k * (t.degv + 1)], size_t(t.degv + 1)});
          pkv.eval_basis(xi, pspan, {&t.pN[k * (t.degp + 1)], size_t(t.degp + 1)},
                         {&t.pD[k * (t.degp + 1)], size_t(t.degp + 1)});
        }
      }
    }
  }

  int n_elements() const { return nel[0] * nel[1] * nel[2]; }
  int n_qp() const { return q * q * q; }

  void build_geometry_cache() {
    geo.resize(static_cast<size_t>(n_elements()) * n_qp());
    size_t idx = 0;
    for (int e3 = 0; e3 < nel[2]; ++e3)
      for (int e2 = 0; e2 < nel[1]; ++e2)
        for (int e1 = 0; e1 < nel[0]; ++e1)
          for (int g3 = 0; g3 < q; ++g3)
            for (int g2 = 0; g2 < q; ++g2)
              for (int g1 = 0; g1 < q; ++g1, ++idx) {
                const Vec3 xi = {dims[0].xi[e1 * q + g1], dims[1].xi[e2 * q + g2],
                                 dims[2].xi[e3 * q + g3]};
                const GeometryPoint gp = patch.geometry_at(xi, true);
                GeoQP& gq = geo[idx];
                gq.x = gp.x;
                const Mat3 Jinv = inv3(gp.J, gp.detJ);
                for (int d = 0; d < 3; ++d)
                  for (int i = 0; i < 3; ++i) gq.T[3 * d + i] = Jinv[d][i];
                gq.wdetJ = gp.detJ * dims[0].w[e1 * q + g1] *
                           dims[1].w[e2 * q + g2] * dims[2].w[e3 * q + g3];
              }
  }

  void build_faces() {
    faces_raw = boundary_faces(patch, ms.face_types(), ms.breaks(), q);
    faces.resize(faces_raw.size());
    for (size_t f = 0; f < faces_raw.size(); ++f) {
      faces[f].id = faces_raw[f].id;
      faces[f].type = faces_raw[f].type;
      faces[f].qps.resize(faces_raw[f].qps.size());
      for (size_t k = 0; k < faces_raw[f].qps.size(); ++k) {
        const SurfaceQP& sq = faces_raw[f].qps[k];
        FaceQPData& d = faces[f].qps[k];
        d.x = sq.x;
        d.n = sq.normal;
        d.dGamma = sq.dGamma;
        const TensorEval te = ms.velocity_space().eval(sq.xi);
        for (int a = 0; a < te.count; ++a) {
          if (te.values[a] == 0.0) continue;
          d.nodes.push_back(te.indices[a]);
          d.values.push_back(te.values[a]);
        }
      }
    }
  }

  void alloc_scratch() {
    bufN.resize(nenv);
    bufG1.resize(nenv);
    bufG2.resize(nenv);
    bufG3.resize(nenv);
    bufGx.resize(nenv);
    bufGy.resize(nenv);
    bufGz.resize(nenv);
    bufConv.resize(nenv);
    bufNp.resize(nenp);
    bufPG1.resize(nenp);
    bufPG2.resize(nenp);
    bufPG3.resize(nenp);
    bufPGx.resize(nenp);
    bufPGy.resize(nenp);
    bufPGz.resize(nenp);
    for (int i = 0; i < 3; ++i) {
      vl[i].resize(nenv);
      vdl[i].resize(nenv);
      Re[i].resize(nenv);
    }
    pl.resize(nenp);
    Rp.resize(nenp);
    for (auto& k : Ke) k.resize(static_cast<size_t>(nenv) * nenv);
    for (auto& s : Se) s.resize(static_cast<size_t>(nenv) * nenp);
  }

  // ---- tensor expansion -------------------------------------------------

  void expand_velocity(int e1, int e2, int e3, int g1, int g2, int g3,
                       bool grads) const {
    const int d1 = dims[0].degv + 1, d2 = dims[1].degv + 1, d3 = dims[2].degv + 1;
    const double* n1 = dims[0].vn(e1, g1);
    const double* n2 = dims[1].vn(e2, g2);
    const double* n3 = dims[2].vn(e3, g3);
    const double* dd1 = dims[0].vd(e1, g1);
    const double* dd2 = dims[1].vd(e2, g2);
    const double* dd3 = dims[2].vd(e3, g3);
    int k = 0;
    for (int i3 = 0; i3 < d3; ++i3)
      for (int i2 = 0; i2 < d2; ++i2) {
        const double a = n2[i2] * n3[i3];
        const double b = grads ? dd2[i2] * n3[i3] : 0.0;
        const double c = grads ? n2[i2] * dd3[i3] : 0.0;
        for (int i1 = 0; i1 < d1; ++i1, ++k) {
          bufN[k] = n1[i1] * a;
          if (grads) {
            bufG1[k] = dd1[i1] * a;
            bufG2[k] = n1[i1] * b;
            bufG3[k] = n1[i1] * c;
          }
        }
      }
  }

  void expand_pressure(int e1, int e2, int e3, int g1, int g2, int g3,
                       bool grads) const {
    const int d1 = dims[0].degp + 1, d2 = dims[1].degp + 1, d3 = dims[2].degp + 1;
    const double* n1 = dims[0].pn(e1, g1);
    const double* n2 = dims[1].pn(e2, g2);
    const double* n3 = dims[2].pn(e3, g3);
    const double* dd1 = dims[0].pd(e1, g1);
    const double* dd2 = dims[1].pd(e2, g2);
    const double* dd3 = dims[2].pd(e3, g3);
    int k = 0;
    for (int i3 = 0; i3 < d3; ++i3)
      for (int i2 = 0; i2 < d2; ++i2) {
        const double a = n2[i2] * n3[i3];
        const double b = grads ? dd2[i2] * n3[i3] : 0.0;
        const double c = grads ? n2[i2] * dd3[i3] : 0.0;
        for (int i1 = 0; i1 < d1; ++i1, ++k) {
          bufNp[k] = n1[i1] * a;
          if (grads) {
            bufPG1[k] = dd1[i1] * a;
            bufPG2[k] = n1[i1] * b;
            bufPG3[k] = n1[i1] * c;
          }
        }
      }
  }

  // gather local coefficient blocks (component-major velocity dofs)
  void gather_velocity(const Eigen::VectorXd& c, int e1, int e2, int e3,
                       std::array<std::vector<double>, 3>& out) const {
    const auto& vdims = ms.velocity_space().dims();
    const int f1 = dims[0].vfirst[e1], f2 = dims[1].vfirst[e2],
              f3 = dims[2].vfirst[e3];
    const int d1 = dims[0].degv + 1, d2 = dims[1].degv + 1, d3 = dims[2].degv + 1;
    int k = 0;
    for (int i3 = 0; i3 < d3; ++i3)
      for (int i2 = 0; i2 < d2; ++i2) {
        const long base =
            f1 + static_cast<long>(vdims[0]) * ((f2 + i2) + static_cast<long>(vdims[1]) * (f3 + i3));
        for (int i1 = 0; i1 < d1; ++i1, ++k) {
          const long node = base + i1;
          out[0][k] = c[3 * node + 0];
          out[1][k] = c[3 * node + 1];
          out[2][k] = c[3 * node + 2];
        }
      }
  }

  void gather_pressure(const Eigen::VectorXd& c, int e1, int e2, int e3,
                       std::vector<double>& out) const {
    const auto& pdims = ms.pressure_space().dims();
    const int f1 = dims[0].pfirst[e1], f2 = dims[1].pfirst[e2],
              f3 = dims[2].pfirst[e3];
    const int d1 = dims[0].degp + 1, d2 = dims[1].degp + 1, d3 = dims[2].degp + 1;
    int k = 0;
    for (int i3 = 0; i3 < d3; ++i3)
      for (int i2 = 0; i2 < d2; ++i2) {
        const long base =
            f1 + static_cast<long>(pdims[0]) * ((f2 + i2) + static_cast<long>(pdims[1]) * (f3 + i3));
        for (int i1 = 0; i1 < d1; ++i1, ++k) out[k] = c[base + i1];
      }
  }

  int velocity_node(int e1, int e2, int e3, int loc) const {
    const auto& vdims = ms.velocity_space().dims();
    const int d1 = dims[0].degv + 1, d2 = dims[1].degv + 1;
    const int i1 = loc % d1, i2 = (loc / d1) % d2, i3 = loc / (d1 * d2);
    return (dims[0].vfirst[e1] + i1) +
           vdims[0] * ((dims[1].vfirst[e2] + i2) +
                       vdims[1] * (dims[2].vfirst[e3] + i3));
  }

  int pressure_node(int e1, int e2, int e3, int loc) const {
    const auto& pdims = ms.pressure_space().dims();
    const int d1 = dims[0].degp + 1, d2 = dims[1].degp + 1;
    const int i1 = loc % d1, i2 = (loc / d1) % d2, i3 = loc / (d1 * d2);
    return (dims[0].pfirst[e1] + i1) +
           pdims[0] * ((dims[1].pfirst[e2] + i2) +
                       pdims[1] * (dims[2].pfirst[e3] + i3));
  }

  // ---- pattern ----------------------------------------------------------

  // inclusive per-function element ranges, then neighbor index ranges
  void build_neighbor_ranges() {
    for (int d = 0; d < 3; ++d) {
      const int nv = ms.velocity_space().dims()[d];
      const int np = ms.pressure_space().dims()[d];
      const int degv = dims[d].degv, degp = dims[d].degp;
      std::vector<int> ve_lo(nv, 1 << 30), ve_hi(nv, -1);
      std::vector<int> pe_lo(np, 1 << 30), pe_hi(np, -1);
      for (int e = 0; e < nel[d]; ++e) {
        for (int r = 0; r <= degv; ++r) {
          const int i = dims[d].vfirst[e] + r;
          ve_lo[i] = std::min(ve_lo[i], e);
          ve_hi[i] = std::max(ve_hi[i], e);
        }
        for (int r = 0; r <= degp; ++r) {
          const int i = dims[d].pfirst[e] + r;
          pe_lo[i] = std::min(pe_lo[i], e);
          pe_hi[i] = std::max(pe_hi[i], e);
        }
      }
      vv_lo[d].resize(nv);
      vv_hi[d].resize(nv);
      vp_lo[d].resize(nv);
      vp_hi[d].resize(nv);
      pv_lo[d].resize(np);
      pv_hi[d].resize(np);
      for (int i = 0; i < nv; ++i) {
        vv_lo[d][i] = dims[d].vfirst[ve_lo[i]];
        vv_hi[d][i] = dims[d].vfirst[ve_hi[i]] + degv;
        vp_lo[d][i] = dims[d].pfirst[ve_lo[i]];
        vp_hi[d][i] = dims[d].pfirst[ve_hi[i]] + degp;
      }
      for (int i = 0; i < np; ++i) {
        pv_lo[d][i] = dims[d].vfirst[pe_lo[i]];
        pv_hi[d][i] = dims[d].vfirst[pe_hi[i]] + degv;
      }
    }
  }

  void build_pattern() {
    if (pattern_built) return;
    build_neighbor_ranges();
    const auto& vdims = ms.velocity_space().dims();
    const auto& pdims = ms.pressure_space().dims();
    const long n = ms.n_unknowns();
    A.n = static_cast<int>(n);
    A.row_ptr.assign(n + 1, 0);

    // row lengths
    for (int fn = 0; fn < ms.n_free_nodes(); ++fn) {
      const int node = ms.free_nodes()[fn];
      const int i1 = node % vdims[0], i2 = (node / vdims[0]) % vdims[1],
                i3 = node / (vdims[0] * vdims[1]);
      long nv_cols = 0;
      for (int j3 = vv_lo[2][i3]; j3 <= vv_hi[2][i3]; ++j3)
        for (int j2 = vv_lo[1][i2]; j2 <= vv_hi[1][i2]; ++j2)
          for (int j1 = vv_lo[0][i1]; j1 <= vv_hi[0][i1]; ++j1)
            if (!ms.node_constrained(j1 + vdims[0] * (j2 + vdims[1] * j3)))
              ++nv_cols;
      const long np_cols = static_cast<long>(vp_hi[0][i1] - vp_lo[0][i1] + 1) *
                           (vp_hi[1][i2] - vp_lo[1][i2] + 1) *
                           (vp_hi[2][i3] - vp_lo[2][i3] + 1);
      const long len = 3 * nv_cols + np_cols;
      A.row_ptr[3 * fn + 1] = static_cast<int>(len);
      A.row_ptr[3 * fn + 2] = static_cast<int>(len);
      A.row_ptr[3 * fn + 3] = static_cast<int>(len);
    }
    for (long bp = 0; bp < ms.n_pnodes(); ++bp) {
      const int i1 = bp % pdims[0], i2 = (bp / pdims[0]) % pdims[1],
                i3 = static_cast<int>(bp / (pdims[0] * pdims[1]));
      long nv_cols = 0;
      for (int j3 = pv_lo[2][i3]; j3 <= pv_hi[2][i3]; ++j3)
        for (int j2 = pv_lo[1][i2]; j2 <= pv_hi[1][i2]; ++j2)
          for (int j1 = pv_lo[0][i1]; j1 <= pv_hi[0][i1]; ++j1)
            if (!ms.node_constrained(j1 + vdims[0] * (j2 + vdims[1] * j3)))
              ++nv_cols;
      A.row_ptr[nvf + bp + 1] = static_cast<int>(3 * nv_cols);
    }
    for (long r = 0; r < n; ++r) A.row_ptr[r + 1] += A.row_ptr[r];
    const long nnz = A.row_ptr[n];
    A.col.resize(nnz);
    A.val.assign(nnz, 0.0);

    // column indices
    for (int fn = 0; fn < ms.n_free_nodes(); ++fn) {
      const int node = ms.free_nodes()[fn];
      const int i1 = node % vdims[0], i2 = (node / vdims[0]) % vdims[1],
                i3 = node / (vdims[0] * vdims[1]);
      long k = A.row_ptr[3 * fn];
      for (int j3 = vv_lo[2][i3]; j3 <= vv_hi[2][i3]; ++j3)
        for (int j2 = vv_lo[1][i2]; j2 <= vv_hi[1][i2]; ++j2)
          for (int j1 = vv_lo[0][i1]; j1 <= vv_hi[0][i1]; ++j1) {
            const int nb = j1 + vdims[0] * (j2 + vdims[1] * j3);
            const int fb = ms.free_index(nb);
            if (fb < 0) continue;
            A.col[k++] = 3 * fb;
            A.col[k++] = 3 * fb + 1;
            A.col[k++] = 3 * fb + 2;
          }
      for (int j3 = vp_lo[2][i3]; j3 <= vp_hi[2][i3]; ++j3)
        for (int j2 = vp_lo[1][i2]; j2 <= vp_hi[1][i2]; ++j2)
          for (int j1 = vp_lo[0][i1]; j1 <= vp_hi[0][i1]; ++j1)
            A.col[k++] =
                static_cast<int>(nvf) + j1 + pdims[0] * (j2 + pdims[1] * j3);
      // the three component rows share one column structure
      const long len = k - A.row_ptr[3 * fn];
      std::memcpy(&A.col[A.row_ptr[3 * fn + 1]], &A.col[A.row_ptr[3 * fn]],
                  len * sizeof(int));
      std::memcpy(&A.col[A.row_ptr[3 * fn + 2]], &A.col[A.row_ptr[3 * fn]],
                  len * sizeof(int));
    }
    for (long bp = 0; bp < ms.n_pnodes(); ++bp) {
      const int i1 = bp % pdims[0], i2 = (bp / pdims[0]) % pdims[1],
                i3 = static_cast<int>(bp / (pdims[0] * pdims[1]));
      long k = A.row_ptr[nvf + bp];
      for (int j3 = pv_lo[2][i3]; j3 <= pv_hi[2][i3]; ++j3)
        for (int j2 = pv_lo[1][i2]; j2 <= pv_hi[1][i2]; ++j2)
          for (int j1 = pv_lo[0][i1]; j1 <= pv_hi[0][i1]; ++j1) {
            const int nb = j1 + vdims[0] * (j2 + vdims[1] * j3);
            const int fb = ms.free_index(nb);
            if (fb < 0) continue;
            A.col[k++] = 3 * fb;
            A.col[k++] = 3 * fb + 1;
            A.col[k++] = 3 * fb + 2;
          }
    }
    build_scatter_tables();
    pattern_built = true;
  }

  // positions of element-local couplings inside the CSR rows; -1 marks
  // constrained rows/columns
  void build_scatter_tables() {
    const int ne = n_elements();
    vv_slots.assign(ne, {});
    vp_slots.assign(ne, {});
    pv_slots.assign(ne, {});
    int e = 0;
    for (int e3 = 0; e3 < nel[2]; ++e3)
      for (int e2 = 0; e2 < nel[1]; ++e2)
        for (int e1 = 0; e1 < nel[0]; ++e1, ++e) {
          auto& vv = vv_slots[e];
          auto& vp = vp_slots[e];
          auto& pv = pv_slots[e];
          vv.assign(static_cast<size_t>(nenv) * nenv, -1);
          vp.assign(static_cast<size_t>(nenv) * nenp, -1);
          pv.assign(static_cast<size_t>(nenp) * nenv, -1);
          for (int a = 0; a < nenv; ++a) {
            const int na = velocity_node(e1, e2, e3, a);
            const int fa = ms.free_index(na);
            if (fa < 0) continue;
            const long row = 3L * fa;
            const int* cols = &A.col[A.row_ptr[row]];
            const int rl = A.row_ptr[row + 1] - A.row_ptr[row];
            int ptr = 0;
            for (int b = 0; b < nenv; ++b) {
              const int nb = velocity_node(e1, e2, e3, b);
              const int fb = ms.free_index(nb);
              if (fb < 0) continue;
              const int want = 3 * fb;
              while (ptr < rl && cols[ptr] < want) ++ptr;
              vv[static_cast<size_t>(a) * nenv + b] = ptr;
            }
            for (int b = 0; b < nenp; ++b) {
              const int want =
                  static_cast<int>(nvf) + pressure_node(e1, e2, e3, b);
              while (ptr < rl && cols[ptr] < want) ++ptr;
              vp[static_cast<size_t>(a) * nenp + b] = ptr;
            }
          }
          for (int b = 0; b < nenp; ++b) {
            const long row = nvf + pressure_node(e1, e2, e3, b);
            const int* cols = &A.col[A.row_ptr[row]];
            const int rl = A.row_ptr[row + 1] - A.row_ptr[row];
            int ptr = 0;
            for (int a = 0; a < nenv; ++a) {
              const int fa = ms.free_index(velocity_node(e1, e2, e3, a));
              if (fa < 0) continue;
              const int want = 3 * fa;
              while (ptr < rl && cols[ptr] < want) ++ptr;
              pv[static_cast<size_t>(b) * nenv + a] = ptr;
            }
          }
        }
  }

  // ---- scalar-space mass matrices (projections) -------------------------

  void build_mass(bool velocity) {
    build_neighbor_ranges();
    const TensorBasis& sp = velocity ? ms.velocity_space() : ms.pressure_space();
    const auto& sdims = sp.dims();
    // same-space neighbor ranges (pressure-pressure derived here; the
    // velocity-velocity ones come from the pattern machinery)
    std::array<std::vector<int>, 3> plo, phi;
    if (!velocity) {
      for (int d = 0; d < 3; ++d) {
        const int np = sdims[d];
        const int degp = dims[d].degp;
        std::vector<int> pe_lo(np, 1 << 30), pe_hi(np, -1);
        for (int e = 0; e < nel[d]; ++e)
          for (int r = 0; r <= degp; ++r) {
            const int i = dims[d].pfirst[e] + r;
            pe_lo[i] = std::min(pe_lo[i], e);
            pe_hi[i] = std::max(pe_hi[i], e);
          }
        plo[d].resize(np);
        phi[d].resize(np);
        for (int i = 0; i < np; ++i) {
          plo[d][i] = dims[d].pfirst[pe_lo[i]];
          phi[d][i] = dims[d].pfirst[pe_hi[i]] + degp;
        }
      }
    }
    const auto range_lo = [&](int d, int i) {
      return velocity ? vv_lo[d][i] : plo[d][i];
    };
    const auto range_hi = [&](int d, int i) {
      return velocity ? vv_hi[d][i] : phi[d][i];
    };

    Csr& M = velocity ? vmass : pmass;
    const long n = sp.total_dim();
    M.n = static_cast<int>(n);
    M.row_ptr.assign(n + 1, 0);
    for (long g = 0; g < n; ++g) {
      const int i1 = g % sdims[0], i2 = (g / sdims[0]) % sdims[1],
                i3 = static_cast<int>(g / (sdims[0] * sdims[1]));
      M.row_ptr[g + 1] =
          static_cast<int>((range_hi(0, i1) - range_lo(0, i1) + 1) *
                           (range_hi(1, i2) - range_lo(1, i2) + 1) *
                           (range_hi(2, i3) - range_lo(2, i3) + 1));
    }
    for (long r = 0; r < n; ++r) M.row_ptr[r + 1] += M.row_ptr[r];
    M.col.resize(M.row_ptr[n]);
    M.val.assign(M.row_ptr[n], 0.0);
    for (long g = 0; g < n; ++g) {
      const int i1 = g % sdims[0], i2 = (g / sdims[0]) % sdims[1],
                i3 = static_cast<int>(g / (sdims[0] * sdims[1]));
      long k = M.row_ptr[g];
      for (int j3 = range_lo(2, i3); j3 <= range_hi(2, i3); ++j3)
        for (int j2 = range_lo(1, i2); j2 <= range_hi(1, i2); ++j2)
          for (int j1 = range_lo(0, i1); j1 <= range_hi(0, i1); ++j1)
            M.col[k++] = j1 + sdims[0] * (j2 + sdims[1] * j3);
    }

    // values: element loop with local mass + merge scatter
    const int den = velocity ? nenv : nenp;
    std::vector<double> Me(static_cast<size_t>(den) * den);
    std::vector<int> nodes(den);
    int e = 0;
    for (int e3 = 0; e3 < nel[2]; ++e3)
      for (int e2 = 0; e2 < nel[1]; ++e2)
        for (int e1 = 0; e1 < nel[0]; ++e1, ++e) {
          std::fill(Me.begin(), Me.end(), 0.0);
          for (int a = 0; a < den; ++a)
            nodes[a] = velocity ? velocity_node(e1, e2, e3, a)
                                : pressure_node(e1, e2, e3, a);
          const GeoQP* gq = &geo[static_cast<size_t>(e) * n_qp()];
          int qp = 0;
          for (int g3 = 0; g3 < q; ++g3)
            for (int g2 = 0; g2 < q; ++g2)
              for (int g1 = 0; g1 < q; ++g1, ++qp) {
                if (velocity)
                  expand_velocity(e1, e2, e3, g1, g2, g3, false);
                else
                  expand_pressure(e1, e2, e3, g1, g2, g3, false);
                const double* N = velocity ? bufN.data() : bufNp.data();
                const double w = gq[qp].wdetJ;
                for (int a = 0; a < den; ++a) {
                  const double wNa = w * N[a];
                  double* out = &Me[static_cast<size_t>(a) * den];
                  kernels::active().axpy(den, wNa, N, out);
                }
              }
          for (int a = 0; a < den; ++a) {
            const long row = nodes[a];
            const int* cols = &M.col[M.row_ptr[row]];
            double* vals = &M.val[M.row_ptr[row]];
            const int rl = M.row_ptr[row + 1] - M.row_ptr[row];
            int ptr = 0;
            for (int b = 0; b < den; ++b) {
              while (ptr < rl && cols[ptr] < nodes[b]) ++ptr;
              vals[ptr] += Me[static_cast<size_t>(a) * den + b];
            }
          }
        }
    SparseLu& lu = velocity ? vmass_lu : pmass_lu;
    lu.factorize(M);
    (velocity ? vmass_ready : pmass_ready) = true;
  }
};

Assembler::Assembler(const NurbsPatch& patch, const MixedSpace& ms,
                     MaterialParams mat)
    : impl_(std::make_unique<Impl>(patch, ms, std::move(mat))) {}

Assembler::~Assembler() = default;

const MixedSpace& Assembler::space() const { return impl_->ms; }
const MaterialParams& Assembler::material() const { return impl_->mat; }
const Csr& Assembler::matrix() const { return impl_->A; }
const std::vector<BoundaryFace>& Assembler::faces() const {
  return impl_->faces_raw;
}

double Assembler::domain_volume() const {
  double v = 0.0;
  for (const GeoQP& g : impl_->geo) v += g.wdetJ;
  return v;
}

void Assembler::residual(const StageValues& stage, const TractionFn& traction,
                         Eigen::VectorXd& R) const {
  Impl& im = *impl_;
  const auto& ks = kernels::active();
  const MixedSpace& ms = im.ms;
  if (!stage.v->allFinite() || !stage.vdot->allFinite() ||
      !stage.p->allFinite())
    fail("Assembler: non-finite stage values");
  R.setZero(ms.n_unknowns());
  const double rho = im.mat.rho, mu = im.mat.mu;
  const bool have_f = static_cast<bool>(im.mat.body_force);

  int e = 0;
  for (int e3 = 0; e3 < im.nel[2]; ++e3)
    for (int e2 = 0; e2 < im.nel[1]; ++e2)
      for (int e1 = 0; e1 < im.nel[0]; ++e1, ++e) {
        im.gather_velocity(*stage.v, e1, e2, e3, im.vl);
        im.gather_velocity(*stage.vdot, e1, e2, e3, im.vdl);
        im.gather_pressure(*stage.p, e1, e2, e3, im.pl);
        for (int i = 0; i < 3; ++i)
          std::fill(im.Re[i].begin(), im.Re[i].end(), 0.0);
        std::fill(im.Rp.begin(), im.Rp.end(), 0.0);

        const GeoQP* gq = &im.geo[static_cast<size_t>(e) * im.n_qp()];
        int qp = 0;
        for (int g3 = 0; g3 < im.q; ++g3)
          for (int g2 = 0; g2 < im.q; ++g2)
            for (int g1 = 0; g1 < im.q; ++g1, ++qp) {
              im.expand_velocity(e1, e2, e3, g1, g2, g3, true);
              im.expand_pressure(e1, e2, e3, g1, g2, g3, false);
              const GeoQP& G = gq[qp];
              ks.grad_transform(im.nenv, G.T, im.bufG1.data(), im.bufG2.data(),
                                im.bufG3.data(), im.bufGx.data(),
                                im.bufGy.data(), im.bufGz.data());
              double vv[3], vd[3], gv[3][3];
              for (int i = 0; i < 3; ++i) {
                const double* ci = im.vl[i].data();
                vv[i] = ks.dot(im.nenv, ci, im.bufN.data());
                vd[i] = ks.dot(im.nenv, im.vdl[i].data(), im.bufN.data());
                gv[i][0] = ks.dot(im.nenv, ci, im.bufGx.data());
                gv[i][1] = ks.dot(im.nenv, ci, im.bufGy.data());
                gv[i][2] = ks.dot(im.nenv, ci, im.bufGz.data());
              }
              const double p = ks.dot(im.nenp, im.pl.data(), im.bufNp.data());
              Vec3 f = {0, 0, 0};
              if (have_f) f = im.mat.body_force(G.x, stage.t);
              const double w = G.wdetJ;
              double F[3], GG[9];
              for (int i = 0; i < 3; ++i) {
                const double conv =
                    vv[0] * gv[i][0] + vv[1] * gv[i][1] + vv[2] * gv[i][2];
                F[i] = w * rho * (vd[i] + conv - f[i]);
                for (int k = 0; k < 3; ++k)
                  GG[3 * i + k] = w * (mu * (gv[i][k] + gv[k][i]) -
                                       (i == k ? p : 0.0));
              }
              ks.residual_velocity(im.nenv, im.bufN.data(), im.bufGx.data(),
                                   im.bufGy.data(), im.bufGz.data(), F, GG,
                                   im.Re[0].data(), im.Re[1].data(),
                                   im.Re[2].data());
              const double wdiv = w * (gv[0][0] + gv[1][1] + gv[2][2]);
              ks.axpy(im.nenp, wdiv, im.bufNp.data(), im.Rp.data());
            }

        // scatter
        for (int a = 0; a < im.nenv; ++a) {
          const int fa = ms.free_index(im.velocity_node(e1, e2, e3, a));
          if (fa < 0) continue;
          R[3 * fa + 0] += im.Re[0][a];
          R[3 * fa + 1] += im.Re[1][a];
          R[3 * fa + 2] += im.Re[2][a];
        }
        for (int b = 0; b < im.nenp; ++b)
          R[im.nvf + im.pressure_node(e1, e2, e3, b)] += im.Rp[b];
      }

  // Neumann traction term
  if (traction) {
    for (const FaceData& face : im.faces) {
      if (face.type != FaceType::Neumann) continue;
      for (const FaceQPData& qp : face.qps) {
        const Vec3 h = traction(qp.x, stage.t, qp.n);
        for (size_t kk = 0; kk < qp.nodes.size(); ++kk) {
          const int fa = ms.free_index(qp.nodes[kk]);
          if (fa < 0) continue;
          const double c = qp.values[kk] * qp.dGamma;
          R[3 * fa + 0] -= c * h[0];
          R[3 * fa + 1] -= c * h[1];
          R[3 * fa + 2] -= c * h[2];
        }
      }
    }
  }
}

const Csr& Assembler::tangent(const StageValues& stage, const SchemeFactors& f) {
  Impl& im = *impl_;
  const auto& ks = kernels::active();
  const MixedSpace& ms = im.ms;
  im.build_pattern();
  im.A.zero_values();
  const double rho = im.mat.rho, mu = im.mat.mu;

  int e = 0;
  for (int e3 = 0; e3 < im.nel[2]; ++e3)
    for (int e2 = 0; e2 < im.nel[1]; ++e2)
      for (int e1 = 0; e1 < im.nel[0]; ++e1, ++e) {
        im.gather_velocity(*stage.v, e1, e2, e3, im.vl);
        for (auto& k : im.Ke) std::fill(k.begin(), k.end(), 0.0);
        for (auto& s : im.Se) std::fill(s.begin(), s.end(), 0.0);
        double* Kp[9];
        for (int i = 0; i < 9; ++i) Kp[i] = im.Ke[i].data();

        const GeoQP* gq = &im.geo[static_cast<size_t>(e) * im.n_qp()];
        int qp = 0;
        for (int g3 = 0; g3 < im.q; ++g3)
          for (int g2 = 0; g2 < im.q; ++g2)
            for (int g1 = 0; g1 < im.q; ++g1, ++qp) {
              im.expand_velocity(e1, e2, e3, g1, g2, g3, true);
              im.expand_pressure(e1, e2, e3, g1, g2, g3, false);
              const GeoQP& G = gq[qp];
              ks.grad_transform(im.nenv, G.T, im.bufG1.data(), im.bufG2.data(),
                                im.bufG3.data(), im.bufGx.data(),
                                im.bufGy.data(), im.bufGz.data());
              double vv[3], gv[9];
              for (int i = 0; i < 3; ++i) {
                const double* ci = im.vl[i].data();
                vv[i] = ks.dot(im.nenv, ci, im.bufN.data());
                gv[3 * i + 0] = ks.dot(im.nenv, ci, im.bufGx.data());
                gv[3 * i + 1] = ks.dot(im.nenv, ci, im.bufGy.data());
                gv[3 * i + 2] = ks.dot(im.nenv, ci, im.bufGz.data());
              }
              // conv[b] = (v . grad) N_b
              const double* gx = im.bufGx.data();
              const double* gy = im.bufGy.data();
              const double* gz = im.bufGz.data();
              double* cv = im.bufConv.data();
              for (int b = 0; b < im.nenv; ++b)
                cv[b] = vv[0] * gx[b] + vv[1] * gy[b] + vv[2] * gz[b];
              const double w = G.wdetJ;
              ks.velocity_block(im.nenv, im.bufN.data(), gx, gy, gz, cv, gv,
                                w * rho * f.c_vdot, w * rho * f.c_v,
                                w * mu * f.c_v, Kp);
              ks.pressure_coupling(im.nenv, im.nenp, gx, gy, gz,
                                   im.bufNp.data(), w, im.Se[0].data(),
                                   im.Se[1].data(), im.Se[2].data());
            }

        // scatter with scheme signs: G = -c_p * S, D = +c_div * S^T
        const auto& vv_slot = im.vv_slots[e];
        const auto& vp_slot = im.vp_slots[e];
        const auto& pv_slot = im.pv_slots[e];
        for (int a = 0; a < im.nenv; ++a) {
          const int fa = ms.free_index(im.velocity_node(e1, e2, e3, a));
          if (fa < 0) continue;
          for (int i = 0; i < 3; ++i) {
            double* vals = &im.A.val[im.A.row_ptr[3L * fa + i]];
            for (int b = 0; b < im.nenv; ++b) {
              const int s = vv_slot[static_cast<size_t>(a) * im.nenv + b];
              if (s < 0) continue;
              vals[s + 0] += im.Ke[3 * i + 0][static_cast<size_t>(a) * im.nenv + b];
              vals[s + 1] += im.Ke[3 * i + 1][static_cast<size_t>(a) * im.nenv + b];
              vals[s + 2] += im.Ke[3 * i + 2][static_cast<size_t>(a) * im.nenv + b];
            }
            for (int b = 0; b < im.nenp; ++b) {
              const int s = vp_slot[static_cast<size_t>(a) * im.nenp + b];
              vals[s] += -f.c_p * im.Se[i][static_cast<size_t>(a) * im.nenp + b];
            }
          }
        }
        for (int b = 0; b < im.nenp; ++b) {
          const long row = im.nvf + im.pressure_node(e1, e2, e3, b);
          double* vals = &im.A.val[im.A.row_ptr[row]];
          for (int a = 0; a < im.nenv; ++a) {
            const int s = pv_slot[static_cast<size_t>(b) * im.nenv + a];
            if (s < 0) continue;
            for (int i = 0; i < 3; ++i)
              vals[s + i] +=
                  f.c_div * im.Se[i][static_cast<size_t>(a) * im.nenp + b];
          }
        }
      }
  return im.A;
}

Eigen::VectorXd Assembler::project_velocity(const VectorFn& fn, double t) const {
  Impl& im = *impl_;
  if (!im.vmass_ready) im.build_mass(true);
  const long n = im.ms.n_vnodes();
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(n, 3);
  int e = 0;
  for (int e3 = 0; e3 < im.nel[2]; ++e3)
    for (int e2 = 0; e2 < im.nel[1]; ++e2)
      for (int e1 = 0; e1 < im.nel[0]; ++e1, ++e) {
        const GeoQP* gq = &im.geo[static_cast<size_t>(e) * im.n_qp()];
        int qp = 0;
        for (int g3 = 0; g3 < im.q; ++g3)
          for (int g2 = 0; g2 < im.q; ++g2)
            for (int g1 = 0; g1 < im.q; ++g1, ++qp) {
              im.expand_velocity(e1, e2, e3, g1, g2, g3, false);
              const Vec3 f = fn(gq[qp].x, t);
              const double w = gq[qp].wdetJ;
              for (int a = 0; a < im.nenv; ++a) {
                const long node = im.velocity_node(e1, e2, e3, a);
                const double wN = w * im.bufN[a];
                rhs(node, 0) += wN * f[0];
                rhs(node, 1) += wN * f[1];
                rhs(node, 2) += wN * f[2];
              }
            }
      }
  Eigen::VectorXd out(3 * n);
  for (int i = 0; i < 3; ++i) {
    const Eigen::VectorXd ci = im.vmass_lu.solve(rhs.col(i));
    for (long a = 0; a < n; ++a) out[3 * a + i] = ci[a];
  }
  return out;
}

Eigen::VectorXd Assembler::project_pressure(const ScalarFn& fn, double t) const {
  Impl& im = *impl_;
  if (!im.pmass_ready) im.build_mass(false);
  const long n = im.ms.n_pnodes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  int e = 0;
  for (int e3 = 0; e3 < im.nel[2]; ++e3)
    for (int e2 = 0; e2 < im.nel[1]; ++e2)
      for (int e1 = 0; e1 < im.nel[0]; ++e1, ++e) {
        const GeoQP* gq = &im.geo[static_cast<size_t>(e) * im.n_qp()];
        int qp = 0;
        for (int g3 = 0; g3 < im.q; ++g3)
          for (int g2 = 0; g2 < im.q; ++g2)
            for (int g1 = 0; g1 < im.q; ++g1, ++qp) {
              im.expand_pressure(e1, e2, e3, g1, g2, g3, false);
              const double wf = gq[qp].wdetJ * fn(gq[qp].x, t);
              for (int b = 0; b < im.nenp; ++b)
                rhs[im.pressure_node(e1, e2, e3, b)] += wf * im.bufNp[b];
            }
      }
  return im.pmass_lu.solve(rhs);
}

void Assembler::apply_dirichlet(const VectorFn& g, double t,
                                Eigen::VectorXd& v) const {
  Impl& im = *impl_;
  const MixedSpace& ms = im.ms;
  if (ms.n_free_nodes() == ms.n_vnodes()) return;  // no Dirichlet faces
  if (!g) {
    for (long node = 0; node < ms.n_vnodes(); ++node)
      if (ms.node_constrained(static_cast<int>(node)))
        v[3 * node + 0] = v[3 * node + 1] = v[3 * node + 2] = 0.0;
    return;
  }
  // face-restricted L2 projection over the union of Dirichlet faces
  std::vector<int> trace;  // constrained node -> trace index
  std::vector<int> tmap(ms.n_vnodes(), -1);
  for (long node = 0; node < ms.n_vnodes(); ++node)
    if (ms.node_constrained(static_cast<int>(node))) {
      tmap[node] = static_cast<int>(trace.size());
      trace.push_back(static_cast<int>(node));
    }
  const int nt = static_cast<int>(trace.size());
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(nt, nt);
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(nt, 3);
  for (const FaceData& face : im.faces) {
    if (face.type != FaceType::Dirichlet) continue;
    for (const FaceQPData& qp : face.qps) {
      const Vec3 gv = g(qp.x, t);
      for (size_t ka = 0; ka < qp.nodes.size(); ++ka) {
        const int ta = tmap[qp.nodes[ka]];
        if (ta < 0) continue;
        const double wa = qp.values[ka] * qp.dGamma;
        for (int i = 0; i < 3; ++i) rhs(ta, i) += wa * gv[i];
        for (size_t kb = 0; kb < qp.nodes.size(); ++kb) {
          const int tb = tmap[qp.nodes[kb]];
          if (tb < 0) continue;
          M(ta, tb) += wa * qp.values[kb];
        }
      }
    }
  }
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(M);
  require(ldlt.info() == Eigen::Success,
          "apply_dirichlet: singular trace mass matrix");
  const Eigen::MatrixXd coef = ldlt.solve(rhs);
  for (int a = 0; a < nt; ++a)
    for (int i = 0; i < 3; ++i) v[3L * trace[a] + i] = coef(a, i);
}

ErrorIntegrals Assembler::velocity_error(const Eigen::VectorXd& coeffs,
                                         const VectorFn* exact,
                                         const MatrixFn* grad, double t) const {
  Impl& im = *impl_;
  const auto& ks = kernels::active();
  ErrorIntegrals out;
  int e = 0;
  for (int e3 = 0; e3 < im.nel[2]; ++e3)
    for (int e2 = 0; e2 < im.nel[1]; ++e2)
      for (int e1 = 0; e1 < im.nel[0]; ++e1, ++e) {
        im.gather_velocity(coeffs, e1, e2, e3, im.vl);
        const GeoQP* gq = &im.geo[static_cast<size_t>(e) * im.n_qp()];
        int qp = 0;
        for (int g3 = 0; g3 < im.q; ++g3)
          for (int g2 = 0; g2 < im.q; ++g2)
            for (int g1 = 0; g1 < im.q; ++g1, ++qp) {
              im.expand_velocity(e1, e2, e3, g1, g2, g3, true);
              const GeoQP& G = gq[qp];
              ks.grad_transform(im.nenv, G.T, im.bufG1.data(), im.bufG2.data(),
                                im.bufG3.data(), im.bufGx.data(),
                                im.bufGy.data(), im.bufGz.data());
              Vec3 ve = {0, 0, 0};
              Mat3 ge{};
              if (exact) ve = (*exact)(G.x, t);
              if (grad) ge = (*grad)(G.x, t);
              for (int i = 0; i < 3; ++i) {
                const double* ci = im.vl[i].data();
                const double dv = ks.dot(im.nenv, ci, im.bufN.data()) - ve[i];
                out.value_sq += G.wdetJ * dv * dv;
                const double dgx =
                    ks.dot(im.nenv, ci, im.bufGx.data()) - ge[i][0];
                const double dgy =
                    ks.dot(im.nenv, ci, im.bufGy.data()) - ge[i][1];
                const double dgz =
                    ks.dot(im.nenv, ci, im.bufGz.data()) - ge[i][2];
                out.grad_sq += G.wdetJ * (dgx * dgx + dgy * dgy + dgz * dgz);
              }
            }
      }
  return out;
}

ErrorIntegrals Assembler::pressure_error(const Eigen::VectorXd& coeffs,
                                         const ScalarFn* exact,
                                         const VectorFn* grad, double t) const {
  Impl& im = *impl_;
  const auto& ks = kernels::active();
  ErrorIntegrals out;
  int e = 0;
  for (int e3 = 0; e3 < im.nel[2]; ++e3)
    for (int e2 = 0; e2 < im.nel[1]; ++e2)
      for (int e1 = 0; e1 < im.nel[0]; ++e1, ++e) {
        im.gather_pressure(coeffs, e1, e2, e3, im.pl);
        const GeoQP* gq = &im.geo[static_cast<size_t>(e) * im.n_qp()];
        int qp = 0;
        for (int g3 = 0; g3 < im.q; ++g3)
          for (int g2 = 0; g2 < im.q; ++g2)
            for (int g1 = 0; g1 < im.q; ++g1, ++qp) {
              im.expand_pressure(e1, e2, e3, g1, g2, g3, true);
              const GeoQP& G = gq[qp];
              ks.grad_transform(im.nenp, G.T, im.bufPG1.data(),
                                im.bufPG2.data(), im.bufPG3.data(),
                                im.bufPGx.data(), im.bufPGy.data(),
                                im.bufPGz.data());
              double pe = 0.0;
              Vec3 ge = {0, 0, 0};
              if (exact) pe = (*exact)(G.x, t);
              if (grad) ge = (*grad)(G.x, t);
              const double* ci = im.pl.data();
              const double dp = ks.dot(im.nenp, ci, im.bufNp.data()) - pe;
              out.value_sq += G.wdetJ * dp * dp;
              const double dgx = ks.dot(im.nenp, ci, im.bufPGx.data()) - ge[0];
              const double dgy = ks.dot(im.nenp, ci, im.bufPGy.data()) - ge[1];
              const double dgz = ks.dot(im.nenp, ci, im.bufPGz.data()) - ge[2];
              out.grad_sq += G.wdetJ * (dgx * dgx + dgy * dgy + dgz * dgz);
            }
      }
  return out;
}

ErrorIntegrals Assembler::exact_vector_norms(const VectorFn& f,
                                             const MatrixFn& g, double t) const {
  ErrorIntegrals out;
  for (const GeoQP& G : impl_->geo) {
    const Vec3 v = f(G.x, t);
    const Mat3 m = g(G.x, t);
    out.value_sq += G.wdetJ * dot(v, v);
    for (int i = 0; i < 3; ++i)
      out.grad_sq += G.wdetJ *
                     (m[i][0] * m[i][0] + m[i][1] * m[i][1] + m[i][2] * m[i][2]);
  }
  return out;
}

ErrorIntegrals Assembler::exact_scalar_norms(const ScalarFn& f,
                                             const VectorFn& g, double t) const {
  ErrorIntegrals out;
  for (const GeoQP& G : impl_->geo) {
    const double v = f(G.x, t);
    const Vec3 m = g(G.x, t);
    out.value_sq += G.wdetJ * v * v;
    out.grad_sq += G.wdetJ * dot(m, m);
  }
  return out;
}

}  // namespace igaflow
