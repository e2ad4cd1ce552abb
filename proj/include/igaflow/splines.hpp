#pragma once

#include <array>
#include <span>
#include <vector>

#include "igaflow/common.hpp"

namespace igaflow {

/// Highest spline degree supported by the stack-allocated evaluation buffers.
inline constexpr int kMaxDegree = 10;

/// Open knot vector on [0,1] with full multiplicity storage.
///
/// Invariants (checked at construction): first and last knots repeat exactly
/// degree+1 times, interior multiplicities <= degree, nondecreasing,
/// knots.front() == 0 and knots.back() == 1.
class KnotVector {
 public:
  KnotVector(int degree, std::vector<double> knots);

  /// Uniform open knot vector with `nel` elements and C^continuity interior
  /// joins. Space dimension is (degree+1) + (nel-1)*(degree-continuity).
  static KnotVector open_uniform(int nel, int degree, int continuity);

  int degree() const { return degree_; }
  /// Dimension n of the spanned spline space.
  int dim() const { return static_cast<int>(knots_.size()) - degree_ - 1; }
  const std::vector<double>& knots() const { return knots_; }

  /// Unique knots and their multiplicities, derived on demand.
  std::pair<std::vector<double>, std::vector<int>> unique_knots() const;

  /// Index i with knots[i] <= xi < knots[i+1]; xi == 1 maps to the last
  /// nonempty interval (left-limit convention at the right endpoint).
  int find_span(double xi) const;

  /// Number of nonempty knot spans (= elements).
  int num_spans() const { return static_cast<int>(span_starts_.size()); }
  /// Knot index of the e-th nonempty span.
  int span_knot_index(int e) const { return span_starts_[e]; }
  /// Parametric interval of the e-th nonempty span.
  std::pair<double, double> span_interval(int e) const {
    return {knots_[span_starts_[e]], knots_[span_starts_[e] + 1]};
  }

  /// Index of the first basis function active on the given span.
  int first_active(int span) const { return span - degree_; }

  /// Values (and first derivatives if ders is nonempty) of the degree+1
  /// basis functions active on `span`, by the Cox-de Boor recursion.
  /// vals/ders must hold degree+1 entries.
  void eval_basis(double xi, int span, std::span<double> vals,
                  std::span<double> ders) const;

 private:
  int degree_;
  std::vector<double> knots_;
  std::vector<int> span_starts_;  // knot indices of nonempty spans
};

/// Result of a local (single-point) basis evaluation: the degree+1 functions
/// that do not vanish at xi, with their global index offset.
struct LocalBasis {
  int first;  // global index of the first active function
  std::array<double, kMaxDegree + 1> values;
  std::array<double, kMaxDegree + 1> derivs;
};

/// B-spline basis values and first derivatives at xi.
LocalBasis eval_bspline(const KnotVector& kv, double xi);

/// Univariate NURBS space: knot vector plus positive weights. Unit weights
/// reproduce the plain B-spline basis exactly (no rational arithmetic).
class SplineSpace1D {
 public:
  explicit SplineSpace1D(KnotVector kv);  // unit weights
  SplineSpace1D(KnotVector kv, std::vector<double> weights);

  const KnotVector& knot_vector() const { return kv_; }
  const std::vector<double>& weights() const { return weights_; }
  bool unit_weights() const { return unit_weights_; }
  int dim() const { return kv_.dim(); }
  int degree() const { return kv_.degree(); }

  /// Rational basis R_i = w_i N_i / W with quotient-rule derivatives.
  LocalBasis eval(double xi) const;
  /// Same, at a caller-chosen span (for evaluating one-sided limits at knots).
  LocalBasis eval_at_span(double xi, int span) const;

 private:
  KnotVector kv_;
  std::vector<double> weights_;
  bool unit_weights_;
};

/// All multivariate functions that do not vanish at a parametric point.
struct TensorEval {
  int count = 0;                    // product of (degree_l + 1)
  std::vector<double> values;       // [count]
  std::vector<double> grads;        // [3*count], parametric d/dxi_l
  std::vector<int> indices;         // [count] global (flattened) indices
};

/// Tensor product of three univariate spline/NURBS spaces on [0,1]^3.
/// Flattened index: g = i1 + n1*(i2 + n2*i3) (first direction fastest).
class TensorBasis {
 public:
  explicit TensorBasis(std::array<SplineSpace1D, 3> spaces);

  const SplineSpace1D& space(int dir) const { return spaces_[dir]; }
  const std::array<int, 3>& dims() const { return dims_; }
  long total_dim() const {
    return static_cast<long>(dims_[0]) * dims_[1] * dims_[2];
  }
  int global_index(int i1, int i2, int i3) const {
    return i1 + dims_[0] * (i2 + dims_[1] * i3);
  }
  std::array<int, 3> unflatten(int g) const {
    return {g % dims_[0], (g / dims_[0]) % dims_[1], g / (dims_[0] * dims_[1])};
  }

  /// Values, parametric gradients, and global indices of all nonvanishing
  /// functions at xi.
  TensorEval eval(const Vec3& xi) const;

 private:
  std::array<SplineSpace1D, 3> spaces_;
  std::array<int, 3> dims_;
};

}  // namespace igaflow
