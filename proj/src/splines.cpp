#include "igaflow/splines.hpp"

#include <algorithm>
#include <cmath>

namespace igaflow {

KnotVector::KnotVector(int degree, std::vector<double> knots)
    : degree_(degree), knots_(std::move(knots)) {
  require(degree_ >= 1, "KnotVector: degree must be >= 1");
  require(degree_ <= kMaxDegree, "KnotVector: degree exceeds supported max");
  const int m = static_cast<int>(knots_.size());
  require(m >= 2 * (degree_ + 1), "KnotVector: too few knots");
  require(knots_.front() == 0.0 && knots_.back() == 1.0,
          "KnotVector: knots must start at 0 and end at 1");
  for (int i = 1; i < m; ++i)
    require(knots_[i] >= knots_[i - 1], "KnotVector: knots must be nondecreasing");
  // open: end knots repeat exactly degree+1 times
  require(knots_[degree_] == 0.0 && knots_[degree_ + 1] > 0.0,
          "KnotVector: first knot must repeat exactly degree+1 times");
  require(knots_[m - degree_ - 1] == 1.0 && knots_[m - degree_ - 2] < 1.0,
          "KnotVector: last knot must repeat exactly degree+1 times");
  // interior multiplicities <= degree
  int run = 1;
  for (int i = degree_ + 2; i < m - degree_ - 1; ++i) {
    run = (knots_[i] == knots_[i - 1]) ? run + 1 : 1;
    require(run <= degree_, "KnotVector: interior multiplicity exceeds degree");
  }
  for (int i = 0; i + 1 < m; ++i)
    if (knots_[i + 1] > knots_[i]) span_starts_.push_back(i);
}

KnotVector KnotVector::open_uniform(int nel, int degree, int continuity) {
  require(nel >= 1, "open_uniform: nel must be >= 1");
  require(degree >= 1, "open_uniform: degree must be >= 1");
  require(continuity >= 0 && continuity <= degree - 1,
          "open_uniform: continuity must be in [0, degree-1]");
  const int mult = degree - continuity;
  std::vector<double> k(degree + 1, 0.0);
  for (int i = 1; i < nel; ++i)
    k.insert(k.end(), mult, static_cast<double>(i) / nel);
  k.insert(k.end(), degree + 1, 1.0);
  return KnotVector(degree, std::move(k));
}

std::pair<std::vector<double>, std::vector<int>> KnotVector::unique_knots() const {
  std::vector<double> z;
  std::vector<int> r;
  for (double k : knots_) {
    if (z.empty() || k != z.back()) {
      z.push_back(k);
      r.push_back(1);
    } else {
      ++r.back();
    }
  }
  return {z, r};
}

int KnotVector::find_span(double xi) const {
  require(xi >= 0.0 && xi <= 1.0, "find_span: xi outside [0,1]");
  if (xi >= 1.0) return span_starts_.back();
  // binary search over nonempty spans
  int lo = 0, hi = num_spans() - 1;
  while (lo < hi) {
    const int mid = (lo + hi + 1) / 2;
    if (knots_[span_starts_[mid]] <= xi)
      lo = mid;
    else
      hi = mid - 1;
  }
  return span_starts_[lo];
}

void KnotVector::eval_basis(double xi, int span, std::span<double> vals,
                            std::span<double> ders) const {
  const int p = degree_;
  double left[kMaxDegree + 1], right[kMaxDegree + 1];
  double lower[kMaxDegree + 1];  // degree p-1 values, for the derivative
  const double* U = knots_.data();

  vals[0] = 1.0;
  if (p == 1) lower[0] = 1.0;
  for (int j = 1; j <= p; ++j) {
    left[j] = xi - U[span + 1 - j];
    right[j] = U[span + j] - xi;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      const double temp = vals[r] / (right[r + 1] + left[j - r]);
      vals[r] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    vals[j] = saved;
    if (j == p - 1)
      for (int r = 0; r < p; ++r) lower[r] = vals[r];
  }

  if (ders.empty()) return;
  // N'_i = p * ( N_i^{p-1}/(U[i+p]-U[i]) - N_{i+1}^{p-1}/(U[i+p+1]-U[i+1]) ),
  // where lower[k] holds N^{p-1} of function span-p+1+k.
  for (int r = 0; r <= p; ++r) {
    const int i = span - p + r;
    double d = 0.0;
    if (r >= 1) {
      const double den = U[i + p] - U[i];
      if (den > 0.0) d += lower[r - 1] / den;
    }
    if (r <= p - 1) {
      const double den = U[i + p + 1] - U[i + 1];
      if (den > 0.0) d -= lower[r] / den;
    }
    ders[r] = p * d;
  }
}

LocalBasis eval_bspline(const KnotVector& kv, double xi) {
  LocalBasis out;
  const int span = kv.find_span(xi);
  out.first = kv.first_active(span);
  kv.eval_basis(xi, span, std::span(out.values.data(), kv.degree() + 1),
                std::span(out.derivs.data(), kv.degree() + 1));
  return out;
}

SplineSpace1D::SplineSpace1D(KnotVector kv)
    : kv_(std::move(kv)), weights_(kv_.dim(), 1.0), unit_weights_(true) {}

SplineSpace1D::SplineSpace1D(KnotVector kv, std::vector<double> weights)
    : kv_(std::move(kv)), weights_(std::move(weights)) {
  require(static_cast<int>(weights_.size()) == kv_.dim(),
          "SplineSpace1D: weight count must equal space dimension");
  unit_weights_ = true;
  for (double w : weights_) {
    require(w > 0.0, "SplineSpace1D: weights must be strictly positive");
    if (w != 1.0) unit_weights_ = false;
  }
}

LocalBasis SplineSpace1D::eval(double xi) const {
  return eval_at_span(xi, kv_.find_span(xi));
}

LocalBasis SplineSpace1D::eval_at_span(double xi, int span) const {
  LocalBasis out;
  const int p = kv_.degree();
  out.first = kv_.first_active(span);
  kv_.eval_basis(xi, span, std::span(out.values.data(), p + 1),
                 std::span(out.derivs.data(), p + 1));
  if (unit_weights_) return out;

  double W = 0.0, dW = 0.0;
  for (int r = 0; r <= p; ++r) {
    const double w = weights_[out.first + r];
    W += w * out.values[r];
    dW += w * out.derivs[r];
  }
  if (!(W > 0.0)) fail("SplineSpace1D: weight function not positive");
  for (int r = 0; r <= p; ++r) {
    const double w = weights_[out.first + r];
    const double N = out.values[r];
    const double dN = out.derivs[r];
    out.values[r] = w * N / W;
    out.derivs[r] = w * (dN * W - N * dW) / (W * W);
  }
  return out;
}

TensorBasis::TensorBasis(std::array<SplineSpace1D, 3> spaces)
    : spaces_(std::move(spaces)),
      dims_{spaces_[0].dim(), spaces_[1].dim(), spaces_[2].dim()} {}

TensorEval TensorBasis::eval(const Vec3& xi) const {
  std::array<LocalBasis, 3> lb;
  std::array<int, 3> np1;
  for (int d = 0; d < 3; ++d) {
    lb[d] = spaces_[d].eval(xi[d]);
    np1[d] = spaces_[d].degree() + 1;
  }
  TensorEval out;
  out.count = np1[0] * np1[1] * np1[2];
  out.values.resize(out.count);
  out.grads.resize(3 * out.count);
  out.indices.resize(out.count);
  int k = 0;
  for (int i3 = 0; i3 < np1[2]; ++i3)
    for (int i2 = 0; i2 < np1[1]; ++i2)
      for (int i1 = 0; i1 < np1[0]; ++i1, ++k) {
        const double v1 = lb[0].values[i1], v2 = lb[1].values[i2],
                     v3 = lb[2].values[i3];
        out.values[k] = v1 * v2 * v3;
        out.grads[3 * k + 0] = lb[0].derivs[i1] * v2 * v3;
        out.grads[3 * k + 1] = v1 * lb[1].derivs[i2] * v3;
        out.grads[3 * k + 2] = v1 * v2 * lb[2].derivs[i3];
        out.indices[k] =
            global_index(lb[0].first + i1, lb[1].first + i2, lb[2].first + i3);
      }
  return out;
}

}  // namespace igaflow
