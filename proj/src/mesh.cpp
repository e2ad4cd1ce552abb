#include "igaflow/mesh.hpp"

#include <cmath>

namespace igaflow {

NurbsPatch::NurbsPatch(TensorBasis basis, std::vector<Vec3> control_points,
                       std::vector<double> weights)
    : basis_(std::move(basis)),
      points_(std::move(control_points)),
      weights_(std::move(weights)) {
  require(static_cast<long>(points_.size()) == basis_.total_dim(),
          "NurbsPatch: control point count must match basis dimension");
  require(weights_.size() == points_.size(),
          "NurbsPatch: weight count must match control point count");
  unit_weights_ = true;
  for (double w : weights_) {
    require(w > 0.0, "NurbsPatch: weights must be positive");
    if (w != 1.0) unit_weights_ = false;
  }
  for (int d = 0; d < 3; ++d)
    require(basis_.space(d).unit_weights(),
            "NurbsPatch: rational weights live on the patch, the tensor basis "
            "must be plain B-spline");
}

GeometryPoint NurbsPatch::geometry_at(const Vec3& xi, bool require_positive) const {
  const TensorEval te = basis_.eval(xi);
  // homogeneous sums: Sw = sum w N, Sx = sum w N P, and their xi-gradients
  double Sw = 0.0;
  Vec3 Swd{0, 0, 0};
  Vec3 Sx{0, 0, 0};
  Mat3 Sxd{};
  for (int k = 0; k < te.count; ++k) {
    const int g = te.indices[k];
    const double w = weights_[g];
    const double wN = w * te.values[k];
    const Vec3& P = points_[g];
    Sw += wN;
    for (int i = 0; i < 3; ++i) Sx[i] += wN * P[i];
    for (int d = 0; d < 3; ++d) {
      const double wdN = w * te.grads[3 * k + d];
      Swd[d] += wdN;
      for (int i = 0; i < 3; ++i) Sxd[i][d] += wdN * P[i];
    }
  }
  GeometryPoint gp;
  const double inv = 1.0 / Sw;
  for (int i = 0; i < 3; ++i) gp.x[i] = Sx[i] * inv;
  for (int i = 0; i < 3; ++i)
    for (int d = 0; d < 3; ++d)
      gp.J[i][d] = (Sxd[i][d] - gp.x[i] * Swd[d]) * inv;
  gp.detJ = det3(gp.J);
  if (require_positive && !(gp.detJ > 0.0))
    fail("NurbsPatch: nonpositive Jacobian determinant at quadrature point");
  return gp;
}

NurbsPatch make_cube_patch(const Vec3& lo, const Vec3& hi, int nel_per_dim) {
  for (int d = 0; d < 3; ++d)
    require(hi[d] > lo[d], "make_cube_patch: degenerate box");
  require(nel_per_dim >= 1, "make_cube_patch: nel must be >= 1");
  const KnotVector kv = KnotVector::open_uniform(nel_per_dim, 1, 0);
  const int n = kv.dim();  // nel + 1, Greville points are the uniform grid
  TensorBasis basis({SplineSpace1D(kv), SplineSpace1D(kv), SplineSpace1D(kv)});
  std::vector<Vec3> pts(static_cast<size_t>(n) * n * n);
  for (int i3 = 0; i3 < n; ++i3)
    for (int i2 = 0; i2 < n; ++i2)
      for (int i1 = 0; i1 < n; ++i1) {
        const Vec3 f = {double(i1) / (n - 1), double(i2) / (n - 1),
                        double(i3) / (n - 1)};
        pts[basis.global_index(i1, i2, i3)] = {lo[0] + f[0] * (hi[0] - lo[0]),
                                               lo[1] + f[1] * (hi[1] - lo[1]),
                                               lo[2] + f[2] * (hi[2] - lo[2])};
      }
  std::vector<double> w(pts.size(), 1.0);
  return NurbsPatch(std::move(basis), std::move(pts), std::move(w));
}

NurbsPatch make_pipe_patch(double R, double L) {
  require(R > 0.0 && L > 0.0, "make_pipe_patch: R and L must be positive");
  const KnotVector kq(2, {0, 0, 0, 1, 1, 1});
  const KnotVector kl(1, {0, 0, 1, 1});
  TensorBasis basis({SplineSpace1D(kq), SplineSpace1D(kq), SplineSpace1D(kl)});
  // Single-patch disk: corners on the circle at (+-R/sqrt2, +-R/sqrt2) with
  // weight 1, edge midpoints at distance c = sqrt(2)*R (tangent intersections)
  // with weight sqrt(2)/2, center at the origin with weight 1.
  const double s = R / std::sqrt(2.0);
  const double c = std::sqrt(2.0) * R;
  const double ws = std::sqrt(2.0) / 2.0;
  const std::array<std::array<double, 2>, 9> xy = {{{-s, -s},
                                                    {0, -c},
                                                    {s, -s},
                                                    {-c, 0},
                                                    {0, 0},
                                                    {c, 0},
                                                    {-s, s},
                                                    {0, c},
                                                    {s, s}}};
  const std::array<double, 9> wq = {1, ws, 1, ws, 1, ws, 1, ws, 1};
  std::vector<Vec3> pts(18);
  std::vector<double> w(18);
  for (int layer = 0; layer < 2; ++layer)
    for (int k = 0; k < 9; ++k) {
      const int g = basis.global_index(k % 3, k / 3, layer);
      pts[g] = {xy[k][0], xy[k][1], layer * L};
      w[g] = wq[k];
    }
  return NurbsPatch(std::move(basis), std::move(pts), std::move(w));
}

std::vector<double> breaks_of(const KnotVector& kv) {
  return kv.unique_knots().first;
}

std::vector<BoundaryFace> boundary_faces(
    const NurbsPatch& patch, const std::array<FaceType, 6>& face_types,
    const std::array<std::vector<double>, 3>& breaks, int q) {
  const QuadratureRule rule = gauss_legendre(q);
  std::vector<BoundaryFace> faces;
  faces.reserve(6);
  for (int dir = 0; dir < 3; ++dir) {
    for (int side = 0; side < 2; ++side) {
      BoundaryFace face;
      face.id = {dir, side};
      face.type = face_types[face.id.index()];
      const int a = (dir + 1) % 3, b = (dir + 2) % 3;
      const auto& ba = breaks[a];
      const auto& bb = breaks[b];
      const double xid = side ? 1.0 : 0.0;
      for (size_t ea = 0; ea + 1 < ba.size(); ++ea)
        for (size_t eb = 0; eb + 1 < bb.size(); ++eb)
          for (int ga = 0; ga < rule.size(); ++ga)
            for (int gb = 0; gb < rule.size(); ++gb) {
              SurfaceQP qp;
              qp.xi[dir] = xid;
              const double ha = ba[ea + 1] - ba[ea], hb = bb[eb + 1] - bb[eb];
              qp.xi[a] = ba[ea] + ha * rule.points[ga];
              qp.xi[b] = bb[eb] + hb * rule.points[gb];
              const GeometryPoint gp = patch.geometry_at(qp.xi, false);
              qp.x = gp.x;
              // t_a x t_b points along the +xi_dir image (right-handed map)
              const Vec3 ta = {gp.J[0][a], gp.J[1][a], gp.J[2][a]};
              const Vec3 tb = {gp.J[0][b], gp.J[1][b], gp.J[2][b]};
              Vec3 n = cross(ta, tb);
              const double mag = norm(n);
              if (!(mag > 0.0)) fail("boundary_faces: degenerate surface point");
              const double sign = side ? 1.0 : -1.0;
              for (int i = 0; i < 3; ++i) n[i] *= sign / mag;
              qp.normal = n;
              qp.dGamma = mag * ha * hb * rule.weights[ga] * rule.weights[gb];
              face.qps.push_back(qp);
            }
      faces.push_back(std::move(face));
    }
  }
  return faces;
}

}  // namespace igaflow
