#include "igaflow/spaces.hpp"

#include <cmath>

namespace igaflow {

namespace {

TensorBasis make_space(std::array<int, 3> nel, int degree, int continuity) {
  return TensorBasis({SplineSpace1D(KnotVector::open_uniform(nel[0], degree, continuity)),
                      SplineSpace1D(KnotVector::open_uniform(nel[1], degree, continuity)),
                      SplineSpace1D(KnotVector::open_uniform(nel[2], degree, continuity))});
}

}  // namespace

MixedSpace::MixedSpace(const NurbsPatch& patch, std::array<int, 3> nel, int p,
                       int continuity, std::array<FaceType, 6> face_types)
    : nel_(nel),
      p_(p),
      continuity_(continuity),
      vspace_(make_space(nel, p + 1, continuity)),
      pspace_(make_space(nel, p, continuity)),
      face_types_(face_types) {
  require(p >= 1, "MixedSpace: pressure degree must be >= 1");
  require(continuity >= 0 && continuity <= p - 1,
          "MixedSpace: continuity must be in [0, p-1]");
  (void)patch;
  for (int d = 0; d < 3; ++d) {
    breaks_[d] = breaks_of(vspace_.space(d).knot_vector());
    require(static_cast<int>(breaks_[d].size()) == nel[d] + 1,
            "MixedSpace: unexpected span count");
  }

  const long nv = n_vnodes();
  constrained_.assign(nv, 0);
  const auto& dims = vspace_.dims();
  for (int face = 0; face < 6; ++face) {
    if (face_types_[face] != FaceType::Dirichlet) continue;
    const int dir = face / 2, side = face % 2;
    const int fixed = side ? dims[dir] - 1 : 0;
    for (int i3 = 0; i3 < dims[2]; ++i3)
      for (int i2 = 0; i2 < dims[1]; ++i2)
        for (int i1 = 0; i1 < dims[0]; ++i1) {
          const std::array<int, 3> idx = {i1, i2, i3};
          if (idx[dir] == fixed)
            constrained_[vspace_.global_index(i1, i2, i3)] = 1;
        }
  }
  free_index_.assign(nv, -1);
  for (long g = 0; g < nv; ++g)
    if (!constrained_[g]) {
      free_index_[g] = static_cast<int>(free_nodes_.size());
      free_nodes_.push_back(static_cast<int>(g));
    }
}

bool MixedSpace::has_neumann() const {
  for (const FaceType t : face_types_)
    if (t == FaceType::Neumann) return true;
  return false;
}

std::vector<int> MixedSpace::face_nodes(FaceId id) const {
  const auto& dims = vspace_.dims();
  const int fixed = id.side ? dims[id.dir] - 1 : 0;
  std::vector<int> nodes;
  for (int i3 = 0; i3 < dims[2]; ++i3)
    for (int i2 = 0; i2 < dims[1]; ++i2)
      for (int i1 = 0; i1 < dims[0]; ++i1) {
        const std::array<int, 3> idx = {i1, i2, i3};
        if (idx[id.dir] == fixed)
          nodes.push_back(vspace_.global_index(i1, i2, i3));
      }
  return nodes;
}

MixedSpace build_mixed_space(const NurbsPatch& patch, int nel_per_dim, int p,
                             int continuity,
                             std::array<FaceType, 6> face_types) {
  return MixedSpace(patch, {nel_per_dim, nel_per_dim, nel_per_dim}, p,
                    continuity, face_types);
}

void State::check_finite() const {
  const auto chk = [](const Eigen::VectorXd& x, const char* name) {
    if (!x.allFinite()) fail(std::string("State: non-finite entries in ") + name);
  };
  chk(v, "v");
  chk(vdot, "vdot");
  chk(p, "p");
  chk(pdot, "pdot");
}

}  // namespace igaflow
