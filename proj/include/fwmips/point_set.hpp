#pragma once

#include <Eigen/Core>
#include <vector>

#include "fwmips/errors.hpp"

namespace fwmips {

/// Dense d-dimensional point. All entries must be finite.
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline void require_finite(const Vec& v, const char* what = "vector") {
  if (!v.allFinite()) throw NormError(std::string(what) + " contains NaN/Inf");
}

inline void require_same_dim(const Vec& a, const Vec& b) {
  if (a.size() != b.size())
    throw DimensionError("dimension mismatch: " + std::to_string(a.size()) + " vs " +
                         std::to_string(b.size()));
}

/// Ordered set of n points of equal dimension d, with convex-hull metadata.
/// max_radius is the largest point norm; diameter_bound is any valid upper
/// bound on the hull diameter (2 * max_radius by default). Both are kept
/// consistent on mutation.
class PointSet {
public:
  explicit PointSet(Mat points) : points_(std::move(points)) {
    if (points_.rows() < 1) throw ConfigError("PointSet needs n >= 1");
    if (!points_.allFinite()) throw NormError("PointSet contains NaN/Inf");
    recompute_radius();
    diameter_bound_ = 2.0 * max_radius_;
  }

  static PointSet from_vectors(const std::vector<Vec>& pts) {
    if (pts.empty()) throw ConfigError("PointSet needs n >= 1");
    Mat m(static_cast<Eigen::Index>(pts.size()), pts.front().size());
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      if (pts[static_cast<std::size_t>(i)].size() != m.cols())
        throw DimensionError("PointSet rows must share dimension");
      m.row(i) = pts[static_cast<std::size_t>(i)].transpose();
    }
    return PointSet(std::move(m));
  }

  Eigen::Index size() const { return points_.rows(); }
  Eigen::Index dim() const { return points_.cols(); }
  Vec point(Eigen::Index i) const { return points_.row(i).transpose(); }
  const Mat& matrix() const { return points_; }

  double max_radius() const { return max_radius_; }
  double diameter_bound() const { return diameter_bound_; }

  /// Exact max pairwise distance; O(n^2 d), intended for small instances.
  double exact_diameter() const {
    double best = 0.0;
    for (Eigen::Index i = 0; i < size(); ++i)
      for (Eigen::Index j = i + 1; j < size(); ++j)
        best = std::max(best, (points_.row(i) - points_.row(j)).norm());
    return best;
  }

  /// Tightens diameter_bound; rejects values below the pairwise requirement.
  void set_diameter_bound(double bound) {
    if (bound < 0.0) throw ConfigError("diameter bound must be nonnegative");
    diameter_bound_ = bound;
  }

  void add_point(const Vec& p) {
    require_finite(p, "point");
    if (p.size() != dim()) throw DimensionError("point dimension mismatch");
    points_.conservativeResize(points_.rows() + 1, Eigen::NoChange);
    points_.row(points_.rows() - 1) = p.transpose();
    max_radius_ = std::max(max_radius_, p.norm());
    diameter_bound_ = std::max(diameter_bound_, 2.0 * max_radius_);
  }

  /// True when every point has unit norm within tol.
  bool all_unit_norm(double tol = 1e-6) const {
    for (Eigen::Index i = 0; i < size(); ++i)
      if (std::abs(points_.row(i).norm() - 1.0) > tol) return false;
    return true;
  }

private:
  void recompute_radius() {
    max_radius_ = 0.0;
    for (Eigen::Index i = 0; i < size(); ++i)
      max_radius_ = std::max(max_radius_, points_.row(i).norm());
  }

  Mat points_;
  double max_radius_ = 0.0;
  double diameter_bound_ = 0.0;
};

}  // namespace fwmips
