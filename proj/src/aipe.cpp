#include "fwmips/aipe.hpp"

#include <algorithm>
#include <cmath>

#include "fwmips/calibration.hpp"

namespace fwmips {

namespace {

int force_odd(int k) { return (k % 2 == 0) ? k + 1 : k; }

}  // namespace

AipeIndex::AipeIndex(PointSet unit_points, AipeParams params, std::uint64_t seed)
    : params_(params), points_(std::move(unit_points)) {
  const double eps_cap = params_.relaxed_range ? 0.5 : 0.1;
  if (!(params_.epsilon > 0.0 && params_.epsilon <= eps_cap))
    throw ConfigError("AIPE epsilon out of range");
  if (!(params_.delta > 0.0 && params_.delta <= 0.1)) throw ConfigError("AIPE delta out of range");
  if (params_.query_budget < 1) throw ConfigError("query budget must be >= 1");
  if (!points_.all_unit_norm(1e-6)) throw NormError("AIPE stores unit-norm points only");

  const double n = static_cast<double>(points_.size());
  const double budget = static_cast<double>(params_.query_budget);
  const int k_ade = std::max(
      3, force_odd(static_cast<int>(std::ceil(calib::kCk * std::log((n + budget) / params_.delta)))));
  const int s = plan_sketch_dim(static_cast<int>(points_.size()), params_.epsilon, params_.delta);

  ensemble_ = build_ensemble(static_cast<int>(points_.size()), static_cast<int>(points_.dim()),
                             params_.epsilon, params_.delta, derive_seed(seed, 0xade), k_ade, s);

  const int wanted =
      static_cast<int>(std::ceil(calib::kCq * std::log(n * budget / params_.delta)));
  subset_size_ = std::min(k_ade, std::max(3, force_odd(wanted)));
  if (subset_size_ % 2 == 0) --subset_size_;

  sketched_.reserve(static_cast<std::size_t>(k_ade));
  for (const PointSet& sk : project_batch(ensemble_, points_)) sketched_.push_back(sk.matrix());
  live_.assign(static_cast<std::size_t>(points_.size()), true);
  live_count_ = points_.size();
}

bool AipeIndex::is_live(Eigen::Index i) const {
  return i >= 0 && i < total_ids() && live_[static_cast<std::size_t>(i)];
}

void AipeIndex::require_unit(const Vec& v) const {
  if (v.size() != points_.dim()) throw DimensionError("dimension mismatch");
  if (std::abs(v.norm() - 1.0) > 1e-6) throw NormError("AIPE expects unit-norm vectors");
}

Eigen::Index AipeIndex::insert(const Vec& z) {
  require_unit(z);
  points_.add_point(z);
  for (int j = 0; j < ensemble_.count(); ++j) {
    Mat& table = sketched_[static_cast<std::size_t>(j)];
    table.conservativeResize(table.rows() + 1, Eigen::NoChange);
    table.row(table.rows() - 1) = project_point(ensemble_, j, z).transpose();
  }
  live_.push_back(true);
  ++live_count_;
  return total_ids() - 1;
}

void AipeIndex::remove(Eigen::Index i) {
  if (i < 0 || i >= total_ids()) throw IndexError("unknown point id");
  if (!live_[static_cast<std::size_t>(i)]) throw IndexError("point id already deleted");
  live_[static_cast<std::size_t>(i)] = false;
  --live_count_;
}

std::vector<int> AipeIndex::fresh_subset(RngStream& rng) const {
  // Fisher-Yates prefix over the matrix indices.
  std::vector<int> pool(static_cast<std::size_t>(ensemble_.count()));
  for (std::size_t j = 0; j < pool.size(); ++j) pool[j] = static_cast<int>(j);
  for (int j = 0; j < subset_size_; ++j) {
    const auto pick = j + static_cast<int>(rng.next_below(
                              static_cast<std::uint64_t>(ensemble_.count() - j)));
    std::swap(pool[static_cast<std::size_t>(j)], pool[static_cast<std::size_t>(pick)]);
  }
  pool.resize(static_cast<std::size_t>(subset_size_));
  return pool;
}

std::vector<AipeEstimate> AipeIndex::query(const Vec& q, RngStream& rng,
                                           AipeQueryDiag* diag) const {
  require_unit(q);
  const std::vector<int> subset = fresh_subset(rng);
  if (diag) diag->matrices_used = static_cast<int>(subset.size());

  Mat query_sketches(static_cast<Eigen::Index>(subset.size()), ensemble_.sketch_dim);
  for (std::size_t j = 0; j < subset.size(); ++j) {
    query_sketches.row(static_cast<Eigen::Index>(j)) =
        project_point(ensemble_, subset[j], q).transpose();
    if (diag)
      diag->sketch_scalar_ops += static_cast<std::uint64_t>(ensemble_.sketch_dim) *
                                 static_cast<std::uint64_t>(points_.dim());
  }

  std::vector<AipeEstimate> out;
  out.reserve(static_cast<std::size_t>(live_count_));
  std::vector<double> samples(subset.size());
  for (Eigen::Index i = 0; i < total_ids(); ++i) {
    if (!live_[static_cast<std::size_t>(i)]) continue;
    for (std::size_t j = 0; j < subset.size(); ++j) {
      const Mat& table = sketched_[static_cast<std::size_t>(subset[j])];
      samples[j] =
          (table.row(i) - query_sketches.row(static_cast<Eigen::Index>(j))).squaredNorm();
    }
    if (diag)
      diag->estimate_scalar_ops +=
          static_cast<std::uint64_t>(subset.size()) * static_cast<std::uint64_t>(ensemble_.sketch_dim);
    const auto mid = samples.begin() + static_cast<std::ptrdiff_t>(samples.size() / 2);
    std::nth_element(samples.begin(), mid, samples.end());
    const double med_sq = *mid;
    AipeEstimate est;
    est.index = i;
    est.distance = std::sqrt(std::max(0.0, med_sq));
    est.weight = 1.0 - 0.5 * med_sq;
    out.push_back(est);
  }
  return out;
}

AipeEstimate AipeIndex::query_max(const Vec& q, RngStream& rng, AipeQueryDiag* diag) const {
  if (live_count_ == 0) throw EmptyIndexError("query_max on an empty index");
  const std::vector<AipeEstimate> ests = query(q, rng, diag);
  const AipeEstimate* best = &ests.front();
  for (const AipeEstimate& e : ests)
    if (e.distance < best->distance) best = &e;  // ties keep the smaller id
  return *best;
}

}  // namespace fwmips
