#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "fwmips/jl_sketch.hpp"
#include "fwmips/lsh_index.hpp"

namespace fwmips {

/// Parameters of the adaptive-robust MaxIP structure. Defaults realize the
/// planner formulas with desk-scale caps; `fw_profile` pins the smaller
/// calibrated configuration the solver uses.
struct RobustMaxipParams {
  double epsilon = 0.2;  // JL accuracy
  double delta = 0.05;   // failure probability
  double c = 0.9;        // MaxIP approximation ratio
  double tau = 0.9;      // MaxIP promise threshold
  double lambda = 0.01;  // quantization granularity
  double alpha = 1e-9;   // additive net slack
  int kappa = 1;         // LSH copies per sketch
  int samples = 1;       // l, sketches sampled per query
  std::optional<int> k_jl;  // ensemble size override; planner cap otherwise
  int lsh_tables = 32;
  std::optional<int> lsh_bits;          // default ceil(log2 n)
  std::optional<int> probe_budget;      // default 4 * L * max(1, n / 2^K)

  /// kappa planner formula before its cap.
  static int plan_kappa(int n, int s, double lambda, double delta);

  /// Formula defaults (kappa capped at 16, k_JL capped at 256).
  static RobustMaxipParams defaults(int n, int d, double c, double tau);

  /// Calibrated desk-scale profile for the accelerated solver.
  static RobustMaxipParams fw_profile(int n, double c, double tau);

  /// Additive slack tolerated by the relaxed-MaxIP guarantee:
  /// lambda_tilde = C * sqrt((1 - c tau)/(1 - tau)) * (lambda + alpha).
  double lambda_tilde() const;
};

struct RobustQueryDiag {
  int sketches_sampled = 0;
  int sub_indexes_probed = 0;
  int candidates_verified = 0;
  bool success = false;
  std::uint64_t sketch_scalar_ops = 0;  // scalar multiplies in S*q
  std::uint64_t verify_scalar_ops = 0;  // scalar multiplies in exact rechecks
  std::uint64_t hash_evals = 0;         // hyperplane sign evaluations
};

struct RobustAnswer {
  Eigen::Index index = -1;
  double inner_product = 0.0;  // exact, original-space, verified
};

/// Rounds each coordinate to the nearest multiple of lambda/sqrt(dim), so
/// ||q_hat - q||_2 <= lambda/2. Realizes the net argument: adaptive queries
/// inside the same cell become one net vertex.
Vec quantize_query(const Vec& q, double lambda);

/// Composed structure of the robust-MaxIP construction: k_JL sketches, each
/// re-unitized and indexed by kappa independent LSH copies. Immutable after
/// construction; queries are read-only.
class LshJlIndex {
public:
  LshJlIndex(PointSet unit_points, RobustMaxipParams params, std::uint64_t seed);

  const RobustMaxipParams& params() const { return params_; }
  const SketchEnsemble& ensemble() const { return ensemble_; }
  const PointSet& points() const { return points_; }
  int sub_index_count() const { return static_cast<int>(sub_indexes_.size()); }
  const LshIndex& sub_index(int sketch, int copy) const;
  double data_radius(int sketch) const { return data_radii_[static_cast<std::size_t>(sketch)]; }

  /// Seed of sub-index (sketch, copy); exposed so degenerate configurations
  /// can be reproduced against a standalone LshIndex.
  std::uint64_t sub_index_seed(int sketch, int copy) const;

  /// Samples `samples` sketches with replacement, quantizes the sketched
  /// query, probes the kappa LSH copies of each in order, and returns the
  /// first candidate whose exact original-space inner product reaches the
  /// acceptance bar. The default bar is (1 - epsilon) * c * tau -
  /// lambda_tilde; callers running the search loop pass their own bar
  /// (c * r for the current guess r) via accept_threshold. nullopt signals
  /// Fail. tau_override substitutes the params' tau.
  std::optional<RobustAnswer> query_max(const Vec& q, RngStream& rng,
                                        std::optional<double> tau_override = std::nullopt,
                                        std::optional<double> accept_threshold = std::nullopt,
                                        RobustQueryDiag* diag = nullptr) const;

  /// Approximate table footprint (bucket entries across all sub-indexes).
  std::size_t bucket_entries() const;

private:
  PointSet points_;  // original unit-norm data (psi-transformed upstream)
  RobustMaxipParams params_;
  std::uint64_t seed_ = 0;
  SketchEnsemble ensemble_;
  std::vector<double> data_radii_;   // per-sketch re-unitization radius
  std::vector<double> query_radii_;  // per-sketch query radius
  std::vector<LshIndex> sub_indexes_;  // sketch-major: (i * kappa + j)
};

}  // namespace fwmips
