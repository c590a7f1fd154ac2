#include "fwmips/fw_solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "fwmips/calibration.hpp"

namespace fwmips {

int FwConfig::iteration_budget(double diameter) const {
  const double planned =
      std::ceil(calib::kCt * beta * diameter * diameter / (c * c * epsilon));
  const double capped = planned < 1.0 ? 1.0 : planned;
  int budget = capped > 1e9 ? 1000000000 : static_cast<int>(capped);
  if (max_iters > 0) budget = std::min(budget, max_iters);
  return budget;
}

HullPoint HullPoint::uniform(const PointSet& pts) {
  HullPoint h;
  h.weights = Vec::Constant(pts.size(), 1.0 / static_cast<double>(pts.size()));
  h.value = pts.matrix().transpose() * h.weights;
  return h;
}

HullPoint HullPoint::vertex(const PointSet& pts, Eigen::Index i) {
  HullPoint h;
  h.weights = Vec::Zero(pts.size());
  h.weights(i) = 1.0;
  h.value = pts.point(i);
  return h;
}

void HullPoint::step_towards(const PointSet& pts, Eigen::Index vertex, double eta) {
  if (vertex < 0 || vertex >= pts.size()) throw IndexError("step vertex out of range");
  if (!(eta >= 0.0 && eta <= 1.0)) throw ConfigError("step size must lie in [0,1]");
  weights *= (1.0 - eta);
  weights(vertex) += eta;
  value = (1.0 - eta) * value + eta * pts.point(vertex);
}

double HullPoint::consistency_error(const PointSet& pts) const {
  return (pts.matrix().transpose() * weights - value).norm();
}

double step_size(double c, int t) {
  if (!(c > 0.0 && c <= 1.0)) throw ConfigError("step size needs c in (0,1]");
  if (t < 0) throw ConfigError("step size needs t >= 0");
  return 2.0 / (c * (t + 2));
}

double duality_gap(const Vec& grad, const Vec& w, const Vec& s_star) {
  require_same_dim(grad, w);
  require_same_dim(grad, s_star);
  return grad.dot(w - s_star);
}

std::string to_string(StopReason reason) {
  switch (reason) {
    case StopReason::kIterationBudget: return "iteration_budget";
    case StopReason::kGapThreshold: return "gap_threshold";
    case StopReason::kZeroGradient: return "zero_gradient";
  }
  return "unknown";
}

std::string to_string(IterOutcome outcome) {
  switch (outcome) {
    case IterOutcome::kExact: return "exact";
    case IterOutcome::kHit: return "hit";
    case IterOutcome::kFail: return "fail";
  }
  return "unknown";
}

namespace {

double clamped_eta(const FwConfig& cfg, double c_for_step, int t) {
  switch (cfg.schedule) {
    case StepSchedule::kConditional: return std::min(1.0, step_size(c_for_step, t));
    case StepSchedule::kAveraging: return 1.0 / static_cast<double>(t + 1);
  }
  return 1.0;
}

struct SolveState {
  Mat transformed;  // psi(S), n x (d+3) unit rows
  TransformPair pair;
  double diameter = 0.0;
};

SolveState prepare(const PointSet& pts, const FwConfig& cfg) {
  SolveState state;
  state.diameter = cfg.d_max > 0.0 ? cfg.d_max : pts.diameter_bound();
  const double data_radius = lifted_data_radius(pts);
  // Query radius estimate (1 + ||w|| bound) * gradient-norm bound; doubled on
  // the fly whenever a live query exceeds it.
  const double grad_bound =
      cfg.grad_norm_bound.value_or(std::max(1.0, cfg.beta * state.diameter));
  const double w_bound = pts.max_radius();
  state.pair = TransformPair(std::max(1e-12, (1.0 + w_bound) * grad_bound), data_radius);

  state.transformed.resize(pts.size(), pts.dim() + 3);
  for (Eigen::Index i = 0; i < pts.size(); ++i)
    state.transformed.row(i) = compose_data(pts.point(i), state.pair).transpose();
  return state;
}

/// Grows the query radius until the lifted query fits, rescaling the
/// transformed-space threshold r so the raw threshold r * C is unchanged.
void fit_query_radius(const Vec& lifted, SolveState& state, double& r) {
  while (lifted.norm() > state.pair.query_radius) {
    const double old_scale = state.pair.scale();
    state.pair.query_radius *= 2.0;
    r *= old_scale / state.pair.scale();
  }
}

Eigen::Index argmax_row_dot(const Mat& rows, const Vec& q) {
  Eigen::Index best = 0;
  double best_ip = rows.row(0).dot(q);
  for (Eigen::Index i = 1; i < rows.rows(); ++i) {
    const double ip = rows.row(i).dot(q);
    if (ip > best_ip) {
      best_ip = ip;
      best = i;
    }
  }
  return best;
}

}  // namespace

FwResult fw_exact(const Objective& objective, const PointSet& pts, const FwConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  SolveState state = prepare(pts, cfg);
  HullPoint w = HullPoint::uniform(pts);

  FwTrace trace;
  trace.preprocess_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const int budget = cfg.iteration_budget(state.diameter);
  double r_unused = 0.0;

  for (int t = 0; t < budget; ++t) {
    const Vec grad = objective.gradient(w.value);
    if (grad.size() != pts.dim()) throw DimensionError("gradient dimension mismatch");
    if (grad.isZero(0.0)) {
      trace.reason = StopReason::kZeroGradient;
      break;
    }

    const Vec lifted = query_lift(grad, w.value);
    fit_query_radius(lifted, state, r_unused);
    const Vec q = to_unit_sphere_query(lifted, state.pair.query_radius);

    const Eigen::Index s_idx = argmax_row_dot(state.transformed, q);
    trace.counters.dot_ops +=
        static_cast<std::uint64_t>(pts.size()) * static_cast<std::uint64_t>(q.size());
    trace.counters.oracle_queries += 1;
    trace.counters.oracle_hits += 1;  // the exact scan always answers

    const double eta = clamped_eta(cfg, 1.0, t);
    FwRecord rec;
    rec.t = t;
    rec.eta = eta;
    rec.r = 0.0;
    rec.outcome = IterOutcome::kExact;
    rec.selected = s_idx;
    rec.gap_surrogate = duality_gap(grad, w.value, pts.point(s_idx));
    rec.objective = objective.value(w.value);
    trace.records.push_back(rec);

    w.step_towards(pts, s_idx, eta);
    trace.iterations = t + 1;
  }

  trace.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  trace.final_pair = state.pair;
  return FwResult{std::move(w), std::move(trace)};
}

namespace {

struct OracleAnswer {
  Eigen::Index index = -1;
  double transformed_ip = 0.0;  // exact <q, psi(s)>, verified
};

class DirectionOracle {
public:
  DirectionOracle(const PointSet& pts, const SolveState& state, const FwConfig& cfg,
                  std::uint64_t seed)
      : state_(state), cfg_(cfg) {
    PointSet unit_data(state.transformed);
    switch (cfg.oracle) {
      case OracleKind::kLshJl: {
        RobustMaxipParams params = cfg.lshjl_params.value_or(
            RobustMaxipParams::fw_profile(static_cast<int>(pts.size()), cfg.c, 0.9));
        lshjl_.emplace(std::move(unit_data), params, derive_seed(seed, 0x07ac1e));
        break;
      }
      case OracleKind::kAipe: {
        AipeParams params;
        if (cfg.aipe_params) {
          params = *cfg.aipe_params;
        } else {
          params.epsilon = calib::kFwAipeEpsilon;
          params.delta = 0.05;
          params.relaxed_range = true;
        }
        params.query_budget = std::max(params.query_budget, cfg.iteration_budget(state.diameter));
        aipe_.emplace(std::move(unit_data), params, derive_seed(seed, 0x07ac1e));
        break;
      }
      case OracleKind::kExact:
        throw ConfigError("fw_accelerated needs an approximate oracle (LshJl or Aipe)");
    }
  }

  std::optional<OracleAnswer> query(const Vec& q, double r, RngStream& rng,
                                    OpCounters& counters) const {
    counters.oracle_queries += 1;
    if (lshjl_) {
      RobustQueryDiag diag;
      // The acceptance bar is the solver's own hit condition c * r, so the
      // probe scan keeps going past weak candidates instead of surfacing
      // them just to be rejected.
      const auto ans = lshjl_->query_max(q, rng, std::min(r, 1.0), cfg_.c * r, &diag);
      counters.sketch_ops += diag.sketch_scalar_ops;
      counters.dot_ops += diag.verify_scalar_ops;
      counters.hash_evals += diag.hash_evals;
      counters.candidates_verified += static_cast<std::uint64_t>(diag.candidates_verified);
      if (!ans) return std::nullopt;
      return OracleAnswer{ans->index, ans->inner_product};
    }

    // AIPE path: rank by estimated inner product, then re-check the best few
    // exactly so the returned answer is verified, not estimated.
    AipeQueryDiag diag;
    std::vector<AipeEstimate> ests = aipe_->query(q, rng, &diag);
    counters.sketch_ops += diag.sketch_scalar_ops;
    counters.dot_ops += diag.estimate_scalar_ops;
    const int keep = std::min<int>(cfg_.aipe_top_verify, static_cast<int>(ests.size()));
    std::partial_sort(ests.begin(), ests.begin() + keep, ests.end(),
                      [](const AipeEstimate& a, const AipeEstimate& b) {
                        if (a.weight != b.weight) return a.weight > b.weight;
                        return a.index < b.index;
                      });
    std::optional<OracleAnswer> best;
    for (int i = 0; i < keep; ++i) {
      const double exact = state_.transformed.row(ests[static_cast<std::size_t>(i)].index).dot(q);
      counters.dot_ops += static_cast<std::uint64_t>(q.size());
      counters.candidates_verified += 1;
      if (!best || exact > best->transformed_ip)
        best = OracleAnswer{ests[static_cast<std::size_t>(i)].index, exact};
    }
    return best;
  }

private:
  const SolveState& state_;
  const FwConfig& cfg_;
  std::optional<LshJlIndex> lshjl_;
  std::optional<AipeIndex> aipe_;
};

}  // namespace

FwResult fw_accelerated(const Objective& objective, const PointSet& pts, const FwConfig& cfg) {
  if (!(cfg.epsilon > 0.0)) throw ConfigError("epsilon must be positive");
  if (!(cfg.c > 0.0 && cfg.c <= 1.0)) throw ConfigError("c must be in (0,1]");
  if (!(cfg.beta > 0.0)) throw ConfigError("beta must be positive");

  const auto start = std::chrono::steady_clock::now();
  SolveState state = prepare(pts, cfg);
  DirectionOracle oracle(pts, state, cfg, cfg.seed);
  RngStream rng(derive_seed(cfg.seed, 0xf11));

  HullPoint w = HullPoint::uniform(pts);
  FwTrace trace;
  trace.preprocess_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const int budget = cfg.iteration_budget(state.diameter);
  double r = cfg.r_init;
  int consecutive_halvings = 0;

  int t = 0;
  while (t < budget) {
    const Vec grad = objective.gradient(w.value);
    if (grad.size() != pts.dim()) throw DimensionError("gradient dimension mismatch");
    if (grad.isZero(0.0)) {
      trace.reason = StopReason::kZeroGradient;
      trace.wall_seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      trace.final_pair = state.pair;
      return FwResult{std::move(w), std::move(trace)};
    }

    const Vec lifted = query_lift(grad, w.value);
    fit_query_radius(lifted, state, r);
    const Vec q = to_unit_sphere_query(lifted, state.pair.query_radius);

    const auto answer = oracle.query(q, r, rng, trace.counters);
    const bool hit = answer && answer->transformed_ip >= cfg.c * r;

    if (hit) {
      trace.counters.oracle_hits += 1;
      consecutive_halvings = 0;
      const double eta = clamped_eta(cfg, cfg.c, t);
      FwRecord rec;
      rec.t = t;
      rec.eta = eta;
      rec.r = r;
      rec.outcome = IterOutcome::kHit;
      rec.selected = answer->index;
      rec.gap_surrogate = duality_gap(grad, w.value, pts.point(answer->index));
      rec.objective = objective.value(w.value);
      trace.records.push_back(rec);
      w.step_towards(pts, answer->index, eta);
      ++t;
      trace.iterations = t;
      continue;
    }

    trace.counters.oracle_fails += 1;
    if (cfg.fallback_exact) {
      // Debug escape hatch: replace the failed query by an exact scan.
      const Eigen::Index s_idx = argmax_row_dot(state.transformed, q);
      trace.counters.dot_ops +=
          static_cast<std::uint64_t>(pts.size()) * static_cast<std::uint64_t>(q.size());
      const double eta = clamped_eta(cfg, cfg.c, t);
      FwRecord rec;
      rec.t = t;
      rec.eta = eta;
      rec.r = r;
      rec.outcome = IterOutcome::kExact;
      rec.selected = s_idx;
      rec.gap_surrogate = duality_gap(grad, w.value, pts.point(s_idx));
      rec.objective = objective.value(w.value);
      trace.records.push_back(rec);
      w.step_towards(pts, s_idx, eta);
      ++t;
      trace.iterations = t;
      continue;
    }

    FwRecord rec;
    rec.t = t;
    rec.eta = 0.0;
    rec.r = r;
    rec.outcome = IterOutcome::kFail;
    rec.selected = -1;
    rec.gap_surrogate = 0.0;
    rec.objective = objective.value(w.value);
    trace.records.push_back(rec);

    // Case 1: a failure at r <= eps / C certifies the gap is at most eps.
    if (r <= cfg.epsilon / state.pair.scale()) {
      trace.reason = StopReason::kGapThreshold;
      break;
    }
    ++consecutive_halvings;
    trace.counters.r_halvings += 1;
    if (consecutive_halvings > cfg.max_r_halvings)
      throw StallError("direction oracle failed " + std::to_string(consecutive_halvings) +
                       " consecutive times (r = " + std::to_string(r) + ")");
    r *= 0.5;
  }

  trace.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  trace.final_pair = state.pair;
  return FwResult{std::move(w), std::move(trace)};
}

}  // namespace fwmips
