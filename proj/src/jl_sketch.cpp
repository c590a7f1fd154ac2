#include "fwmips/jl_sketch.hpp"

#include <cmath>

#include "fwmips/calibration.hpp"

namespace fwmips {

Mat JlMatrix::materialize() const {
  RngStream rng(seed);
  Mat m(rows, cols);
  const double scale = 1.0 / std::sqrt(static_cast<double>(rows));
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = rng.next_gaussian() * scale;
  return m;
}

int plan_sketch_dim(int n, double epsilon, double delta) {
  return static_cast<int>(
      std::ceil(calib::kCs / (epsilon * epsilon) * std::log(static_cast<double>(n) / delta)));
}

int plan_ensemble_size(int n, int d, double delta) {
  const double raw = (static_cast<double>(d) + std::log(1.0 / delta)) *
                     std::log(static_cast<double>(n) * static_cast<double>(d));
  return static_cast<int>(std::ceil(raw));
}

int plan_sample_count(int n, double delta) {
  return std::max(
      1, static_cast<int>(std::ceil(calib::kCl * std::log(static_cast<double>(n) / delta))));
}

SketchEnsemble build_ensemble(int n, int d, double epsilon, double delta, std::uint64_t seed,
                              std::optional<int> k_override, std::optional<int> s_override) {
  if (n < 1 || d < 1) throw ConfigError("ensemble needs n, d >= 1");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ConfigError("epsilon must be in (0,1)");
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta must be in (0,1)");
  int k = k_override ? *k_override : std::min(plan_ensemble_size(n, d, delta), calib::kEnsembleCap);
  if (k < 1) throw ConfigError("ensemble size must be >= 1");
  int s = s_override ? *s_override : plan_sketch_dim(n, epsilon, delta);
  if (s < 1) throw ConfigError("sketch dimension must be >= 1");

  SketchEnsemble ens;
  ens.sketch_dim = s;
  ens.input_dim = d;
  ens.epsilon = epsilon;
  ens.delta = delta;
  ens.master_seed = seed;
  ens.specs.reserve(static_cast<std::size_t>(k));
  ens.matrices.reserve(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) {
    JlMatrix spec{s, d, derive_seed(seed, static_cast<std::uint64_t>(i))};
    ens.matrices.push_back(spec.materialize());
    ens.specs.push_back(spec);
  }
  return ens;
}

Vec project_point(const SketchEnsemble& ens, int which, const Vec& x) {
  if (which < 0 || which >= ens.count()) throw IndexError("matrix index out of range");
  if (x.size() != ens.input_dim) throw DimensionError("sketch input dimension mismatch");
  return ens.matrices[static_cast<std::size_t>(which)] * x;
}

std::vector<PointSet> project_batch(const SketchEnsemble& ens, const PointSet& pts) {
  if (pts.dim() != ens.input_dim) throw DimensionError("sketch input dimension mismatch");
  std::vector<PointSet> out;
  out.reserve(static_cast<std::size_t>(ens.count()));
  for (int which = 0; which < ens.count(); ++which) {
    Mat sketched(pts.size(), ens.sketch_dim);
    for (Eigen::Index i = 0; i < pts.size(); ++i)
      sketched.row(i) = project_point(ens, which, pts.point(i)).transpose();
    out.emplace_back(std::move(sketched));
  }
  return out;
}

double good_fraction(const SketchEnsemble& ens, const Vec& q, const PointSet& pts,
                     double epsilon, const std::vector<PointSet>* presketched) {
  if (std::abs(q.norm() - 1.0) > 1e-6) throw NormError("good_fraction expects a unit query");
  if (presketched && static_cast<int>(presketched->size()) != ens.count())
    throw DimensionError("presketched batch does not match the ensemble");
  constexpr double kAlpha = 1e-9;
  const double lo = (1.0 - epsilon) * (1.0 - epsilon);
  const double hi = (1.0 + epsilon) * (1.0 + epsilon);
  int good = 0;
  for (int which = 0; which < ens.count(); ++which) {
    const Mat& s = ens.matrices[static_cast<std::size_t>(which)];
    const Vec sq = s * q;
    bool all_ok = true;
    for (Eigen::Index i = 0; i < pts.size() && all_ok; ++i) {
      const Vec diff = q - pts.point(i);
      const double true_sq = diff.squaredNorm();
      const Vec sp = presketched ? (*presketched)[static_cast<std::size_t>(which)].point(i)
                                 : Vec(s * pts.point(i));
      const double sketch_sq = (sq - sp).squaredNorm();
      all_ok = sketch_sq >= lo * true_sq - kAlpha && sketch_sq <= hi * true_sq + kAlpha;
    }
    if (all_ok) ++good;
  }
  return static_cast<double>(good) / static_cast<double>(ens.count());
}

std::vector<int> sample_matrices(const SketchEnsemble& ens, int l, RngStream& rng) {
  if (ens.count() < 1) throw ConfigError("empty ensemble");
  if (l < 1) throw ConfigError("sample count must be >= 1");
  std::vector<int> out(static_cast<std::size_t>(l));
  for (auto& idx : out) idx = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(ens.count())));
  return out;
}

}  // namespace fwmips
