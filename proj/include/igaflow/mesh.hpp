#pragma once

#include <array>
#include <functional>
#include <vector>

#include "igaflow/common.hpp"
#include "igaflow/quadrature.hpp"
#include "igaflow/splines.hpp"

namespace igaflow {

struct GeometryPoint {
  Vec3 x;       // physical coordinates
  Mat3 J;       // J[i][d] = dx_i / dxi_d
  double detJ;  // > 0 on the interior
};

/// Tensor-product NURBS geometry map [0,1]^3 -> physical domain.
/// Weights are stored per control point (the pipe's disk net is not a
/// separable weight field), so evaluation goes through homogeneous sums.
class NurbsPatch {
 public:
  NurbsPatch(TensorBasis basis, std::vector<Vec3> control_points,
             std::vector<double> weights);

  const TensorBasis& basis() const { return basis_; }
  const std::vector<Vec3>& control_points() const { return points_; }
  const std::vector<double>& weights() const { return weights_; }

  /// Map, Jacobian, and Jacobian determinant. Throws if detJ <= 0 when
  /// require_positive is set (quadrature-point evaluations).
  GeometryPoint geometry_at(const Vec3& xi, bool require_positive = true) const;

  /// Physical point only.
  Vec3 map(const Vec3& xi) const { return geometry_at(xi, false).x; }

 private:
  TensorBasis basis_;
  std::vector<Vec3> points_;
  std::vector<double> weights_;
  bool unit_weights_;
};

/// Axis-aligned box [lo, hi] as a trilinear patch with nel uniform elements
/// per direction; exactly affine.
NurbsPatch make_cube_patch(const Vec3& lo, const Vec3& hi, int nel_per_dim);

/// Circular pipe of radius R and length L along z: single-patch quadratic
/// rational disk cross-section (boundary exactly on the circle), linear axis.
NurbsPatch make_pipe_patch(double R, double L);

enum class FaceType { Dirichlet, Neumann };

/// One of the six parametric faces: 2*dir + side with side 0 -> xi_dir = 0,
/// side 1 -> xi_dir = 1.
struct FaceId {
  int dir;
  int side;
  int index() const { return 2 * dir + side; }
};

struct SurfaceQP {
  Vec3 xi;        // volume parametric coordinates
  Vec3 x;         // physical point
  Vec3 normal;    // unit outward normal
  double dGamma;  // quadrature weight times surface Jacobian
};

struct BoundaryFace {
  FaceId id;
  FaceType type;
  std::vector<SurfaceQP> qps;
};

/// Surface quadrature with outward unit normals for all six faces. The face
/// grids are the tensor spans in `breaks` (typically from the analysis space)
/// with a q-point Gauss rule per span per direction.
std::vector<BoundaryFace> boundary_faces(
    const NurbsPatch& patch, const std::array<FaceType, 6>& face_types,
    const std::array<std::vector<double>, 3>& breaks, int q);

/// Span boundaries of a knot vector (unique knots), for building face grids.
std::vector<double> breaks_of(const KnotVector& kv);

}  // namespace igaflow
