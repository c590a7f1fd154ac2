#include "fwmips/lsh_jl_index.hpp"

#include <cmath>

#include "fwmips/calibration.hpp"
#include "fwmips/transforms.hpp"

namespace fwmips {

int RobustMaxipParams::plan_kappa(int n, int s, double lambda, double delta) {
  const double raw =
      s * std::log(static_cast<double>(n) * static_cast<double>(s) / (lambda * delta));
  return static_cast<int>(std::ceil(raw));
}

RobustMaxipParams RobustMaxipParams::defaults(int n, int d, double c, double tau) {
  RobustMaxipParams p;
  p.c = c;
  p.tau = tau;
  const int s = plan_sketch_dim(n, p.epsilon, p.delta);
  p.kappa = std::min(plan_kappa(n, s, p.lambda, p.delta), calib::kKappaCap);
  p.samples = plan_sample_count(n, p.delta);
  p.k_jl = std::min(plan_ensemble_size(n, d, p.delta), calib::kEnsembleCap);
  p.lsh_bits = std::max(1, static_cast<int>(std::ceil(std::log2(static_cast<double>(n)))));
  return p;
}

RobustMaxipParams RobustMaxipParams::fw_profile(int n, double c, double tau) {
  RobustMaxipParams p;
  p.epsilon = calib::kFwProfileEpsilon;
  p.delta = 0.05;
  p.c = c;
  p.tau = tau;
  p.lambda = calib::kFwProfileLambda;
  p.kappa = calib::kFwProfileKappa;
  p.samples = calib::kFwProfileSamples;
  p.k_jl = calib::kFwProfileKjl;
  p.lsh_tables = calib::kFwProfileTables;
  p.lsh_bits = std::max(1, static_cast<int>(std::ceil(std::log2(static_cast<double>(n)))));
  return p;
}

double RobustMaxipParams::lambda_tilde() const {
  return calib::kLambdaTildeConst * std::sqrt((1.0 - c * tau) / (1.0 - tau)) * (lambda + alpha);
}

Vec quantize_query(const Vec& q, double lambda) {
  if (!(lambda > 0.0)) throw ConfigError("quantization granularity must be positive");
  const double cell = lambda / std::sqrt(static_cast<double>(q.size()));
  Vec out(q.size());
  for (Eigen::Index i = 0; i < q.size(); ++i) out(i) = std::round(q(i) / cell) * cell;
  return out;
}

LshJlIndex::LshJlIndex(PointSet unit_points, RobustMaxipParams params, std::uint64_t seed)
    : points_(std::move(unit_points)), params_(params), seed_(seed) {
  if (!points_.all_unit_norm(1e-6)) throw NormError("LSH-JL stores unit-norm points only");
  if (params_.kappa < 1 || params_.samples < 1) throw ConfigError("kappa and samples must be >= 1");

  const int n = static_cast<int>(points_.size());
  const int d = static_cast<int>(points_.dim());
  ensemble_ = build_ensemble(n, d, params_.epsilon, params_.delta, derive_seed(seed, 0x5ce7c4),
                             params_.k_jl);

  const std::vector<PointSet> sketches = project_batch(ensemble_, points_);
  data_radii_.reserve(sketches.size());
  query_radii_.reserve(sketches.size());
  sub_indexes_.reserve(sketches.size() * static_cast<std::size_t>(params_.kappa));

  LshParams lsh_params = LshParams::defaults(n, params_.c, params_.tau, 0);
  lsh_params.tables = params_.lsh_tables;
  if (params_.lsh_bits) lsh_params.hash_bits = *params_.lsh_bits;
  lsh_params.probe_budget =
      params_.probe_budget.value_or(static_cast<int>(
          calib::kProbeBudgetFactor * lsh_params.tables *
          std::max(1.0, static_cast<double>(n) / std::pow(2.0, lsh_params.hash_bits))));

  for (int i = 0; i < ensemble_.count(); ++i) {
    const PointSet& sketch = sketches[static_cast<std::size_t>(i)];
    const double radius = std::max(sketch.max_radius(), 1e-12);
    data_radii_.push_back(radius);
    // Unit queries sketch to norms concentrated near 1; headroom rarely
    // needed because query_max falls back to the live norm when exceeded.
    query_radii_.push_back(1.0 + params_.epsilon);

    Mat unitized(sketch.size(), sketch.dim() + 2);
    for (Eigen::Index row = 0; row < sketch.size(); ++row)
      unitized.row(row) = to_unit_sphere_data(sketch.point(row), radius).transpose();

    for (int j = 0; j < params_.kappa; ++j) {
      LshParams sub = lsh_params;
      sub.seed = sub_index_seed(i, j);
      sub_indexes_.emplace_back(PointSet(unitized), sub);
    }
  }
}

const LshIndex& LshJlIndex::sub_index(int sketch, int copy) const {
  const std::size_t idx =
      static_cast<std::size_t>(sketch) * static_cast<std::size_t>(params_.kappa) +
      static_cast<std::size_t>(copy);
  if (sketch < 0 || copy < 0 || idx >= sub_indexes_.size())
    throw IndexError("sub-index out of range");
  return sub_indexes_[idx];
}

std::uint64_t LshJlIndex::sub_index_seed(int sketch, int copy) const {
  return derive_seed(seed_, 0x15a1ULL + static_cast<std::uint64_t>(sketch) *
                                             static_cast<std::uint64_t>(params_.kappa) +
                         static_cast<std::uint64_t>(copy));
}

std::optional<RobustAnswer> LshJlIndex::query_max(const Vec& q, RngStream& rng,
                                                  std::optional<double> tau_override,
                                                  std::optional<double> accept_threshold,
                                                  RobustQueryDiag* diag) const {
  if (q.size() != points_.dim()) throw DimensionError("query dimension mismatch");
  if (std::abs(q.norm() - 1.0) > 1e-6) throw NormError("LSH-JL query must be unit-norm");

  const double tau = tau_override.value_or(params_.tau);
  const double threshold = accept_threshold.value_or(
      (1.0 - params_.epsilon) * params_.c * tau - params_.lambda_tilde());

  const std::vector<int> picks = sample_matrices(ensemble_, params_.samples, rng);
  for (int pick : picks) {
    if (diag) ++diag->sketches_sampled;
    Vec sketched = project_point(ensemble_, pick, q);
    if (diag)
      diag->sketch_scalar_ops += static_cast<std::uint64_t>(ensemble_.sketch_dim) *
                                 static_cast<std::uint64_t>(points_.dim());
    sketched = quantize_query(sketched, params_.lambda);
    const double radius =
        std::max(query_radii_[static_cast<std::size_t>(pick)], sketched.norm() + 1e-12);
    const Vec unit_query = to_unit_sphere_query(sketched, radius);

    for (int j = 0; j < params_.kappa; ++j) {
      const LshIndex& sub = sub_index(pick, j);
      if (diag) {
        ++diag->sub_indexes_probed;
        diag->hash_evals += static_cast<std::uint64_t>(sub.params().tables) *
                            static_cast<std::uint64_t>(sub.params().hash_bits);
      }
      for (Eigen::Index candidate : sub.probe_candidates(unit_query)) {
        if (diag) {
          ++diag->candidates_verified;
          diag->verify_scalar_ops += static_cast<std::uint64_t>(points_.dim());
        }
        const double exact = points_.point(candidate).dot(q);
        if (exact >= threshold) {
          if (diag) diag->success = true;
          return RobustAnswer{candidate, exact};
        }
      }
    }
  }
  return std::nullopt;
}

std::size_t LshJlIndex::bucket_entries() const {
  std::size_t total = 0;
  for (const auto& sub : sub_indexes_) total += sub.bucket_entries();
  return total;
}

}  // namespace fwmips
