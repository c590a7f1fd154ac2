#include "fwmips/herding.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace fwmips {

FeatureMap FeatureMap::identity(int dim) {
  if (dim < 1) throw ConfigError("identity map needs dim >= 1");
  FeatureMap m;
  m.kind_ = Kind::kIdentity;
  m.input_dim_ = dim;
  m.output_dim_ = dim;
  return m;
}

FeatureMap FeatureMap::random_fourier(int input_dim, int feature_dim, double bandwidth,
                                      std::uint64_t seed) {
  if (input_dim < 1 || feature_dim < 1) throw ConfigError("feature dims must be >= 1");
  if (!(bandwidth > 0.0)) throw ConfigError("bandwidth must be positive");
  FeatureMap m;
  m.kind_ = Kind::kRandomFourier;
  m.input_dim_ = input_dim;
  m.output_dim_ = feature_dim;
  m.bandwidth_ = bandwidth;
  m.seed_ = seed;
  RngStream rng(derive_seed(seed, 0x4ff));
  m.fourier_weights_.resize(feature_dim, input_dim);
  for (int i = 0; i < feature_dim; ++i)
    for (int j = 0; j < input_dim; ++j)
      m.fourier_weights_(i, j) = rng.next_gaussian() / bandwidth;
  m.fourier_offsets_.resize(feature_dim);
  for (int i = 0; i < feature_dim; ++i)
    m.fourier_offsets_(i) = 2.0 * std::numbers::pi * rng.next_uniform();
  return m;
}

FeatureMap FeatureMap::degree2_tensor(int input_dim) {
  if (input_dim < 1) throw ConfigError("tensor map needs dim >= 1");
  FeatureMap m;
  m.kind_ = Kind::kDegree2Tensor;
  m.input_dim_ = input_dim;
  m.output_dim_ = input_dim * input_dim;
  return m;
}

Vec FeatureMap::apply(const Vec& x) const {
  if (x.size() != input_dim_) throw DimensionError("feature map input dimension mismatch");
  switch (kind_) {
    case Kind::kIdentity:
      return x;
    case Kind::kRandomFourier: {
      const Vec phase = fourier_weights_ * x + fourier_offsets_;
      return std::sqrt(2.0 / static_cast<double>(output_dim_)) * phase.array().cos().matrix();
    }
    case Kind::kDegree2Tensor: {
      Vec out(output_dim_);
      for (int i = 0; i < input_dim_; ++i)
        for (int j = 0; j < input_dim_; ++j) out(i * input_dim_ + j) = x(i) * x(j);
      return out;
    }
  }
  throw ConfigError("unknown feature map kind");
}

PointSet FeatureMap::apply(const PointSet& pts) const {
  Mat mapped(pts.size(), output_dim_);
  for (Eigen::Index i = 0; i < pts.size(); ++i) mapped.row(i) = apply(pts.point(i)).transpose();
  return PointSet(std::move(mapped));
}

double median_pairwise_distance(const PointSet& pts, std::uint64_t seed, int max_samples) {
  std::vector<double> dists;
  const Eigen::Index n = pts.size();
  if (n < 2) return 1.0;
  const std::uint64_t total = static_cast<std::uint64_t>(n) * static_cast<std::uint64_t>(n - 1) / 2;
  if (total <= static_cast<std::uint64_t>(max_samples)) {
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = i + 1; j < n; ++j)
        dists.push_back((pts.point(i) - pts.point(j)).norm());
  } else {
    RngStream rng(derive_seed(seed, 0xbad9e));
    for (int k = 0; k < max_samples; ++k) {
      const auto i = static_cast<Eigen::Index>(rng.next_below(static_cast<std::uint64_t>(n)));
      auto j = static_cast<Eigen::Index>(rng.next_below(static_cast<std::uint64_t>(n)));
      if (i == j) j = (j + 1) % n;
      dists.push_back((pts.point(i) - pts.point(j)).norm());
    }
  }
  const auto mid = dists.begin() + static_cast<std::ptrdiff_t>(dists.size() / 2);
  std::nth_element(dists.begin(), mid, dists.end());
  return std::max(*mid, 1e-12);
}

HerdingInstance HerdingInstance::make(PointSet raw, const FeatureMap& map,
                                      std::optional<Vec> probabilities) {
  PointSet mapped = map.apply(raw);
  const Eigen::Index n = raw.size();
  Vec probs;
  if (probabilities) {
    if (probabilities->size() != n) throw DimensionError("P needs one entry per point");
    if ((probabilities->array() < 0.0).any()) throw ConfigError("P must be nonnegative");
    if (std::abs(probabilities->sum() - 1.0) > 1e-9) throw ConfigError("P must sum to 1");
    probs = *probabilities;
  } else {
    probs = Vec::Constant(n, 1.0 / static_cast<double>(n));
  }
  Vec mu = mapped.matrix().transpose() * probs;
  return HerdingInstance{std::move(raw), std::move(mapped), std::move(probs), std::move(mu)};
}

HerdingInstance HerdingInstance::with_target(PointSet raw, const FeatureMap& map, Vec mu) {
  HerdingInstance inst = make(std::move(raw), map);
  if (mu.size() != inst.mapped_set.dim()) throw DimensionError("target mean dimension mismatch");
  inst.mu = std::move(mu);
  return inst;
}

std::pair<double, Vec> herding_objective(const Vec& w, const Vec& mu) {
  require_same_dim(w, mu);
  const Vec diff = w - mu;
  return {0.5 * diff.squaredNorm(), diff};
}

Objective make_herding_objective(const Vec& mu) {
  Objective obj;
  obj.value = [mu](const Vec& w) { return herding_objective(w, mu).first; };
  obj.gradient = [mu](const Vec& w) { return herding_objective(w, mu).second; };
  return obj;
}

HerdingClassicResult herding_classic(const HerdingInstance& inst, int steps,
                                     std::optional<Vec> w0) {
  if (steps < 1) throw ConfigError("herding needs at least one step");
  const Mat& features = inst.mapped_set.matrix();
  Vec w = w0.value_or(Vec::Zero(inst.mapped_set.dim()));
  if (w.size() != inst.mapped_set.dim()) throw DimensionError("w0 dimension mismatch");

  HerdingClassicResult result;
  result.selected.reserve(static_cast<std::size_t>(steps));
  result.mean_errors.reserve(static_cast<std::size_t>(steps));
  Vec running_sum = Vec::Zero(inst.mapped_set.dim());

  for (int t = 0; t < steps; ++t) {
    // argmin <-w, Phi(x)> = argmax <w, Phi(x)>, ties -> smallest index.
    Eigen::Index best = 0;
    double best_ip = features.row(0).dot(w);
    for (Eigen::Index i = 1; i < features.rows(); ++i) {
      const double ip = features.row(i).dot(w);
      if (ip > best_ip) {
        best_ip = ip;
        best = i;
      }
    }
    result.selected.push_back(best);
    running_sum += features.row(best).transpose();
    result.mean_errors.push_back(
        (running_sum / static_cast<double>(t + 1) - inst.mu).norm());
    w += inst.mu - features.row(best).transpose();
  }
  result.final_state = std::move(w);
  return result;
}

FwResult herding_accelerated(const HerdingInstance& inst, FwConfig cfg) {
  if (cfg.oracle == OracleKind::kExact)
    throw ConfigError("accelerated herding needs an approximate oracle");
  cfg.beta = 1.0;  // 0.5||w - mu||^2 has smoothness exactly 1
  return fw_accelerated(make_herding_objective(inst.mu), inst.mapped_set, cfg);
}

}  // namespace fwmips
