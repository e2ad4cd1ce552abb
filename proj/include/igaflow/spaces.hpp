#pragma once

#include <Eigen/Core>
#include <array>
#include <functional>
#include <optional>
#include <vector>

#include "igaflow/mesh.hpp"
#include "igaflow/splines.hpp"

namespace igaflow {

using ScalarFn = std::function<double(const Vec3&, double)>;
using VectorFn = std::function<Vec3(const Vec3&, double)>;
using MatrixFn = std::function<Mat3(const Vec3&, double)>;
/// Traction h(x, t, n).
using TractionFn = std::function<Vec3(const Vec3&, double, const Vec3&)>;

/// Inf-sup stable smooth Taylor-Hood pair: velocity components of degree p+1
/// and pressure of degree p, same continuity, on the same knot spans.
/// Velocity DOFs are component-major within a node: dof = 3*node + comp.
/// Unknown ordering for the coupled system: all free velocity DOFs, then all
/// pressure DOFs.
class MixedSpace {
 public:
  MixedSpace(const NurbsPatch& patch, std::array<int, 3> nel, int p,
             int continuity, std::array<FaceType, 6> face_types);

  const TensorBasis& velocity_space() const { return vspace_; }
  const TensorBasis& pressure_space() const { return pspace_; }
  const std::array<std::vector<double>, 3>& breaks() const { return breaks_; }
  const std::array<FaceType, 6>& face_types() const { return face_types_; }
  const std::array<int, 3>& nel() const { return nel_; }
  int degree_p() const { return p_; }
  int continuity() const { return continuity_; }

  long n_vnodes() const { return vspace_.total_dim(); }
  long n_pnodes() const { return pspace_.total_dim(); }
  long n_free_nodes() const { return static_cast<long>(free_nodes_.size()); }
  long n_vfree() const { return 3 * n_free_nodes(); }
  long n_unknowns() const { return n_vfree() + n_pnodes(); }
  bool has_neumann() const;

  bool node_constrained(int node) const { return constrained_[node] != 0; }
  /// Free node number, or -1 for Dirichlet-constrained nodes.
  int free_index(int node) const { return free_index_[node]; }
  const std::vector<int>& free_nodes() const { return free_nodes_; }

  /// Scalar velocity nodes on the given parametric face.
  std::vector<int> face_nodes(FaceId id) const;

 private:
  std::array<int, 3> nel_;
  int p_, continuity_;
  TensorBasis vspace_, pspace_;
  std::array<std::vector<double>, 3> breaks_;
  std::array<FaceType, 6> face_types_;
  std::vector<uint8_t> constrained_;
  std::vector<int> free_index_;
  std::vector<int> free_nodes_;
};

/// Convenience matching the cube benchmark (same element count per direction).
MixedSpace build_mixed_space(const NurbsPatch& patch, int nel_per_dim, int p,
                             int continuity,
                             std::array<FaceType, 6> face_types = {
                                 FaceType::Neumann, FaceType::Neumann,
                                 FaceType::Neumann, FaceType::Neumann,
                                 FaceType::Neumann, FaceType::Neumann});

struct MaterialParams {
  double rho;  // g/cm^3
  double mu;   // g/(cm s)
  VectorFn body_force;  // cm/s^2; null means zero
  double nu() const { return mu / rho; }
};

/// Discrete unknowns at one time level. Velocity-type vectors are full
/// length (constrained coefficients included); pressure has no constraints.
struct State {
  Eigen::VectorXd v;     // 3*n_vnodes, cm/s
  Eigen::VectorXd vdot;  // 3*n_vnodes, cm/s^2
  Eigen::VectorXd p;     // n_pnodes, dyn/cm^2
  Eigen::VectorXd pdot;  // n_pnodes, dyn/(cm^2 s)
  double t = 0.0;

  void check_finite() const;
};

}  // namespace igaflow
