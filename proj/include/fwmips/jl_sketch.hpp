#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "fwmips/point_set.hpp"
#include "fwmips/rng.hpp"

namespace fwmips {

/// Gaussian JL matrix, entries i.i.d. N(0, 1/s). Never stored on disk:
/// (seed, rows, cols) regenerate it bit-exactly (row-major draw order).
struct JlMatrix {
  int rows = 0;  // sketch dimension s
  int cols = 0;  // input dimension d
  std::uint64_t seed = 0;

  Mat materialize() const;

  /// Frobenius norm above the robustness hypothesis ||S||_F <= d is legal
  /// but worth surfacing.
  static bool frobenius_flagged(const Mat& m) { return m.norm() > static_cast<double>(m.cols()); }
};

/// k_JL independent JL matrices sharing (s, d), with distinct derived seeds.
struct SketchEnsemble {
  std::vector<JlMatrix> specs;
  std::vector<Mat> matrices;  // materialized, same order as specs
  int sketch_dim = 0;
  int input_dim = 0;
  double epsilon = 0.0;
  double delta = 0.0;
  std::uint64_t master_seed = 0;

  int count() const { return static_cast<int>(matrices.size()); }
};

/// Planner formula for the sketch dimension.
int plan_sketch_dim(int n, double epsilon, double delta);

/// Planner formula for the ensemble size before capping.
int plan_ensemble_size(int n, int d, double delta);

/// Planner formula for the query-time sample count.
int plan_sample_count(int n, double delta);

/// Builds a deterministic ensemble. k_override pins the ensemble size;
/// otherwise min(plan_ensemble_size, cap) is used.
SketchEnsemble build_ensemble(int n, int d, double epsilon, double delta, std::uint64_t seed,
                              std::optional<int> k_override = std::nullopt,
                              std::optional<int> s_override = std::nullopt);

/// Applies matrix `which` of the ensemble to one point.
Vec project_point(const SketchEnsemble& ens, int which, const Vec& x);

/// Projects every point under every matrix; result i is the sketch of the
/// whole set under matrix i, bit-identical to project_point in a loop.
std::vector<PointSet> project_batch(const SketchEnsemble& ens, const PointSet& pts);

/// Fraction of matrices that preserve every distance q <-> pts within
/// relative error epsilon on the norm (squared-norm window
/// [(1-eps)^2, (1+eps)^2], plus additive slack alpha = 1e-9 so exact
/// duplicates always pass). One matrix is "good" only if all n pairs pass.
/// `presketched` may carry project_batch(ens, pts) to amortize the data
/// projections across queries.
double good_fraction(const SketchEnsemble& ens, const Vec& q, const PointSet& pts,
                     double epsilon, const std::vector<PointSet>* presketched = nullptr);

/// l matrix indices drawn uniformly with replacement; deterministic under
/// the caller-owned stream.
std::vector<int> sample_matrices(const SketchEnsemble& ens, int l, RngStream& rng);

}  // namespace fwmips
