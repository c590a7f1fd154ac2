#include "fwmips/transforms.hpp"

namespace fwmips {

double hull_min_inner_product(const PointSet& set, const Vec& x, const Vec& weights,
                              const Vec& grad) {
  if (weights.size() != set.size()) throw DimensionError("one weight per hull vertex required");
  require_same_dim(x, grad);
  if (x.size() != set.dim()) throw DimensionError("x dimension does not match set");

  if ((weights.array() < -1e-12).any()) throw NotInHullError("negative hull weight");
  if (std::abs(weights.sum() - 1.0) > 1e-9) throw NotInHullError("hull weights do not sum to 1");
  const Vec combo = set.matrix().transpose() * weights;
  if ((combo - x).norm() > 1e-6) throw NotInHullError("weights do not reproduce x");

  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < set.size(); ++i)
    best = std::min(best, grad.dot(set.point(i) - x));
  return best;
}

}  // namespace fwmips
