#pragma once

#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

#include "fwmips/point_set.hpp"
#include "fwmips/rng.hpp"

namespace fwmips {

/// Query-exponent regimes of the two theoretical LSH families. These are
/// planner diagnostics only; the concrete hyperplane family below makes no
/// claim of achieving them.
enum class RhoRegime {
  kFastPreprocess,  // rho = 2/c^2 - 1/c^4, near-linear preprocessing
  kFastQuery,       // rho = 1/(2c^2 - 1), more preprocessing, better rho
};

/// rho exponent for approximation ratio c_bar > 1, o(1) dropped.
double plan_rho(double c_bar, RhoRegime regime);

struct AnnParams {
  double c_bar = 0.0;
  double r = 0.0;
};

/// Converts a (c, tau)-MaxIP instance on the unit sphere into the
/// equivalent (c_bar, r)-ANN instance via ||a-b||^2 = 2 - 2<a,b>:
/// r = sqrt(2 - 2 tau), c_bar = sqrt((1 - c tau) / (1 - tau)).
AnnParams maxip_to_ann(double c, double tau);

struct LshParams {
  int hash_bits = 8;       // K, concatenated sign bits per table
  int tables = 32;         // L
  double c_bar = 1.5;      // ANN approximation ratio (verification bound)
  double r = 0.5;          // ANN radius
  std::uint64_t seed = 0;
  int probe_budget = 128;  // max candidates examined per query

  static LshParams defaults(int n, double c, double tau, std::uint64_t seed);
};

struct LshQueryDiag {
  int tables_probed = 0;
  int candidates_examined = 0;
};

/// Hyperplane-sign LSH over unit-sphere points. Every stored point lands in
/// exactly one bucket per table; all returned answers are re-checked with an
/// exact dot product, so false positives are impossible and only recall is
/// probabilistic.
class LshIndex {
public:
  LshIndex(PointSet points, LshParams params);

  const LshParams& params() const { return params_; }
  const PointSet& points() const { return points_; }

  /// Ordered candidate stream for q: buckets of table 0, then table 1, ...
  /// with duplicates skipped. Shared by both query paths and by tests.
  std::vector<Eigen::Index> probe_candidates(const Vec& q, LshQueryDiag* diag = nullptr) const;

  /// (c_bar, r)-ANN: first candidate with ||y - q|| <= c_bar * r, or nullopt.
  /// nullopt means "fail" to callers, never an error.
  std::optional<Eigen::Index> query_ann(const Vec& q, double r,
                                        LshQueryDiag* diag = nullptr) const;

  /// (c, tau)-MaxIP: first candidate whose exact inner product with q is
  /// >= c * tau, or nullopt.
  std::optional<Eigen::Index> query_maxip(const Vec& q, double c, double tau,
                                          LshQueryDiag* diag = nullptr) const;

  std::uint64_t hash_key(const Vec& x, int table) const;

  /// Approximate bucket storage footprint, for accounting tests.
  std::size_t bucket_entries() const;

private:
  void require_unit(const Vec& q) const;

  PointSet points_;
  LshParams params_;
  std::vector<Mat> hyperplanes_;  // per table: hash_bits x dim
  std::vector<std::unordered_map<std::uint64_t, std::vector<Eigen::Index>>> tables_;
};

/// Smallest L in `table_grid` reaching `target_recall` on a self-planted
/// probe set at (c, tau); throws CalibrationError listing the best achieved
/// value when none qualifies.
int calibrate_tables(const PointSet& points, double c, double tau, std::uint64_t seed,
                     double target_recall, const std::vector<int>& table_grid);

}  // namespace fwmips
