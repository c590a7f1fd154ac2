#pragma once

#include <cstdint>
#include <vector>

#include "fwmips/jl_sketch.hpp"

namespace fwmips {

struct AipeParams {
  double epsilon = 0.1;    // estimate accuracy, in (0, 0.1] per the contract
  double delta = 0.01;     // per-query failure probability
  int query_budget = 1024; // expected adaptive query count, sizes the ensemble

  /// Relaxed range used by the solver profile, where only candidate ordering
  /// matters (answers are exactly re-verified downstream).
  bool relaxed_range = false;
};

struct AipeEstimate {
  Eigen::Index index = -1;
  double distance = 0.0;  // d_i, estimated ||x_i - q||
  double weight = 0.0;    // w_i = 1 - d_i^2 / 2
};

struct AipeQueryDiag {
  int matrices_used = 0;
  std::uint64_t sketch_scalar_ops = 0;    // sketching q
  std::uint64_t estimate_scalar_ops = 0;  // sketch-space distance evaluations
};

/// Inner-product estimation over unit-norm points, robust to adaptive
/// queries at desk scale. The distance-estimation substrate is an ensemble
/// of Gaussian sketches: each query draws a fresh random subset of matrices
/// and takes per-point medians of sketched squared distances, so answers
/// leak no fixed matrix to the adversary. Single-writer / multi-reader:
/// queries are const, insert/remove need exclusive access.
class AipeIndex {
public:
  AipeIndex(PointSet unit_points, AipeParams params, std::uint64_t seed);

  const AipeParams& params() const { return params_; }
  int ensemble_size() const { return ensemble_.count(); }
  int subset_size() const { return subset_size_; }
  Eigen::Index total_ids() const { return static_cast<Eigen::Index>(live_.size()); }
  Eigen::Index live_count() const { return live_count_; }
  bool is_live(Eigen::Index i) const;
  Vec point(Eigen::Index i) const { return points_.point(i); }

  /// Appends a unit-norm point under every matrix; ids are append-only.
  Eigen::Index insert(const Vec& z);

  /// Removes id i from all subsequent outputs. Unknown or dead id throws.
  void remove(Eigen::Index i);

  /// Estimates for every live point: d_i = sqrt(median over a fresh matrix
  /// subset of ||S_j x_i - S_j q||^2), w_i = 1 - d_i^2/2. With probability
  /// >= 1 - delta each w_i lies in [(1+eps)<x_i,q> - eps, (1-eps)<x_i,q> + eps].
  std::vector<AipeEstimate> query(const Vec& q, RngStream& rng,
                                  AipeQueryDiag* diag = nullptr) const;

  /// Live point minimizing the estimated distance (ties -> smallest id).
  AipeEstimate query_max(const Vec& q, RngStream& rng, AipeQueryDiag* diag = nullptr) const;

private:
  void require_unit(const Vec& v) const;
  std::vector<int> fresh_subset(RngStream& rng) const;

  AipeParams params_;
  PointSet points_;
  SketchEnsemble ensemble_;
  std::vector<Mat> sketched_;  // per matrix: one row per id
  std::vector<bool> live_;
  Eigen::Index live_count_ = 0;
  int subset_size_ = 3;
};

}  // namespace fwmips
