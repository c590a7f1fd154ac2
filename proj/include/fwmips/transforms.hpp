#pragma once

#include "fwmips/point_set.hpp"

namespace fwmips {

/// Radii of the unit-sphere transforms and the resulting scale constant.
/// The composed query/data transforms satisfy
///   <compose_query(g, a), compose_data(b)> = <b - a, -g> / scale()
/// for any gradient g at a, so scale() converts unit-sphere inner products
/// back to raw directional gains.
struct TransformPair {
  double query_radius = 1.0;  // upper bound on the lifted query norm
  double data_radius = 1.0;   // upper bound on the lifted data norms

  TransformPair() = default;
  TransformPair(double dx, double dy) : query_radius(dx), data_radius(dy) {
    if (!(dx > 0.0) || !(dy > 0.0)) throw ConfigError("transform radii must be positive");
  }

  double scale() const { return query_radius * data_radius; }
};

/// Query-side lift: a -> [g; <a, g>] where g is the gradient at a.
/// Together with data_lift this turns directional gains into inner products:
/// <b - a, g> = -<query_lift(g, a), data_lift(b)>.
inline Vec query_lift(const Vec& grad, const Vec& point) {
  require_same_dim(grad, point);
  require_finite(grad, "gradient");
  require_finite(point, "point");
  Vec out(grad.size() + 1);
  out.head(grad.size()) = grad;
  out(grad.size()) = point.dot(grad);
  return out;
}

/// Data-side lift: b -> [-b; 1].
inline Vec data_lift(const Vec& point) {
  require_finite(point, "point");
  Vec out(point.size() + 1);
  out.head(point.size()) = -point;
  out(point.size()) = 1.0;
  return out;
}

namespace detail {

inline double unit_pad(const Vec& v, double radius, const char* side) {
  if (!(radius > 0.0)) throw ConfigError("radius must be positive");
  const double scaled_sq = v.squaredNorm() / (radius * radius);
  if (scaled_sq > 1.0 + 1e-12)
    throw RadiusError(std::string(side) + " norm " + std::to_string(std::sqrt(scaled_sq) * radius) +
                      " exceeds radius " + std::to_string(radius));
  return std::sqrt(std::max(0.0, 1.0 - scaled_sq));
}

}  // namespace detail

/// Places a query vector with ||v|| <= radius on the unit sphere:
/// [v/radius; 0; sqrt(1 - ||v/radius||^2)].
inline Vec to_unit_sphere_query(const Vec& v, double radius) {
  require_finite(v, "query");
  const double pad = detail::unit_pad(v, radius, "query");
  Vec out(v.size() + 2);
  out.head(v.size()) = v / radius;
  out(v.size()) = 0.0;
  out(v.size() + 1) = pad;
  return out;
}

/// Data-side counterpart with the padding entries swapped:
/// [v/radius; sqrt(1 - ||v/radius||^2); 0]. The swap keeps the cross terms
/// zero, so <unit query, unit data> = <u, v> / (radius_q * radius_d).
inline Vec to_unit_sphere_data(const Vec& v, double radius) {
  require_finite(v, "data point");
  const double pad = detail::unit_pad(v, radius, "data point");
  Vec out(v.size() + 2);
  out.head(v.size()) = v / radius;
  out(v.size()) = pad;
  out(v.size() + 1) = 0.0;
  return out;
}

/// Full query transform R^d -> S^{d+2}: unit-sphere embedding of the lifted
/// gradient query. The identity
///   <compose_query(g,a), compose_data(b)> * pair.scale() = <b - a, -g>
/// holds exactly, and argmax over b is preserved.
inline Vec compose_query(const Vec& grad, const Vec& point, const TransformPair& pair) {
  return to_unit_sphere_query(query_lift(grad, point), pair.query_radius);
}

/// Full data transform R^d -> S^{d+2}.
inline Vec compose_data(const Vec& point, const TransformPair& pair) {
  return to_unit_sphere_data(data_lift(point), pair.data_radius);
}

/// Builds the data radius for a set: max lifted-point norm.
inline double lifted_data_radius(const PointSet& pts) {
  double best = 0.0;
  for (Eigen::Index i = 0; i < pts.size(); ++i) best = std::max(best, data_lift(pts.point(i)).norm());
  return best;
}

/// Test helper for the hull optimality property. Verifies that `weights`
/// certify x in the hull of `set` (nonnegative, sum 1 within 1e-9, and the
/// weighted combination reproduces x within 1e-6), then returns
/// min_s <grad, s - x>. For gradients of a convex objective at hull points
/// this is <= 0.
double hull_min_inner_product(const PointSet& set, const Vec& x, const Vec& weights,
                              const Vec& grad);

}  // namespace fwmips
