#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fwmips/aipe.hpp"
#include "fwmips/calibration.hpp"
#include "fwmips/counters.hpp"
#include "fwmips/lsh_jl_index.hpp"
#include "fwmips/transforms.hpp"

namespace fwmips {

enum class OracleKind { kExact, kLshJl, kAipe };

enum class StepSchedule {
  kConditional,  // eta_t = 2 / (c (t + 2)), clamped to [0, 1]
  kAveraging,    // eta_t = 1 / (t + 1), running-average iterates
};

/// Objective callbacks; must be pure. Gradient dimension must match the
/// vertex set.
struct Objective {
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> gradient;
};

struct FwConfig {
  double epsilon = 1e-3;  // target gap
  double c = 1.0;         // oracle approximation ratio, (0, 1]
  double beta = 1.0;      // smoothness bound
  double d_max = 0.0;     // hull diameter bound; 0 -> from the point set
  int max_iters = 0;      // 0 -> planner budget only
  OracleKind oracle = OracleKind::kExact;
  std::optional<RobustMaxipParams> lshjl_params;  // LshJl oracle configuration
  std::optional<AipeParams> aipe_params;          // Aipe oracle configuration
  int aipe_top_verify = calib::kFwAipeTopVerify;  // estimated-best candidates re-checked exactly
  double r_init = 1.0;      // initial transformed-inner-product guess
  int max_r_halvings = 64;  // consecutive halvings before StallError
  std::uint64_t seed = 0;
  StepSchedule schedule = StepSchedule::kConditional;
  bool fallback_exact = false;  // debug only: exact scan instead of halving
  std::optional<double> grad_norm_bound;  // query-radius estimate input

  /// Planner iteration budget ceil(C_T * beta * D^2 / (c^2 eps)), optionally
  /// capped by max_iters.
  int iteration_budget(double diameter) const;
};

/// Feasible iterate: nonnegative weights summing to 1 plus the cached
/// combination.
struct HullPoint {
  Vec weights;
  Vec value;

  static HullPoint uniform(const PointSet& pts);
  static HullPoint vertex(const PointSet& pts, Eigen::Index i);

  /// w <- w + eta (s - w) for vertex s; eta must be in [0, 1].
  void step_towards(const PointSet& pts, Eigen::Index vertex, double eta);

  /// || sum_i w_i x_i - value ||, test hook for cache consistency.
  double consistency_error(const PointSet& pts) const;
};

enum class IterOutcome { kExact, kHit, kFail };

struct FwRecord {
  int t = 0;
  double eta = 0.0;
  double r = 0.0;
  IterOutcome outcome = IterOutcome::kExact;
  Eigen::Index selected = -1;
  double gap_surrogate = 0.0;  // <grad, w - s>, raw space
  double objective = 0.0;
};

enum class StopReason { kIterationBudget, kGapThreshold, kZeroGradient };

std::string to_string(StopReason reason);
std::string to_string(IterOutcome outcome);

struct FwTrace {
  std::vector<FwRecord> records;
  StopReason reason = StopReason::kIterationBudget;
  int iterations = 0;  // steps taken (Fail records do not advance t)
  double wall_seconds = 0.0;
  double preprocess_seconds = 0.0;  // transform + oracle build
  OpCounters counters;
  TransformPair final_pair;
};

struct FwResult {
  HullPoint point;
  FwTrace trace;
};

/// Step size eta_t = 2 / (c (t + 2)).
double step_size(double c, int t);

/// Duality-gap surrogate <grad, w - s_star>; nonnegative whenever s_star is
/// the exact maximizer of <-grad, .> over the vertex set and w is in the hull.
double duality_gap(const Vec& grad, const Vec& w, const Vec& s_star);

/// Exact-oracle Frank-Wolfe: argmax by full scan over the transformed
/// vertex set, eta_t at c = 1.
FwResult fw_exact(const Objective& objective, const PointSet& pts, const FwConfig& cfg);

/// Accelerated Frank-Wolfe with an approximate direction oracle. Each
/// iteration transforms the gradient query, asks the oracle, and either
/// steps (verified transformed inner product >= c * r) or halves the
/// r-guess without advancing t. Declares convergence once a failure occurs
/// at r <= eps / C where C is the live transform scale.
FwResult fw_accelerated(const Objective& objective, const PointSet& pts, const FwConfig& cfg);

}  // namespace fwmips
