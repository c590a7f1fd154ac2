#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "fwmips/fw_solver.hpp"

namespace fwmips {

/// Linearized kernel feature map.
class FeatureMap {
public:
  enum class Kind { kIdentity, kRandomFourier, kDegree2Tensor };

  static FeatureMap identity(int dim);

  /// Random Fourier features for the Gaussian kernel
  /// exp(-||x-y||^2 / (2 bandwidth^2)): z(x) = sqrt(2/k) cos(Wx + b) with
  /// W rows ~ N(0, bandwidth^-2 I), b ~ U[0, 2pi).
  static FeatureMap random_fourier(int input_dim, int feature_dim, double bandwidth,
                                   std::uint64_t seed);

  /// Flattened outer product x -> vec(x x^T), dimension d^2.
  static FeatureMap degree2_tensor(int input_dim);

  Kind kind() const { return kind_; }
  int input_dim() const { return input_dim_; }
  int output_dim() const { return output_dim_; }
  double bandwidth() const { return bandwidth_; }
  std::uint64_t seed() const { return seed_; }

  Vec apply(const Vec& x) const;
  PointSet apply(const PointSet& pts) const;

private:
  FeatureMap() = default;

  Kind kind_ = Kind::kIdentity;
  int input_dim_ = 0;
  int output_dim_ = 0;
  double bandwidth_ = 1.0;
  std::uint64_t seed_ = 0;
  Mat fourier_weights_;  // feature_dim x input_dim
  Vec fourier_offsets_;
};

/// Median pairwise distance (capped sample), the default RFF bandwidth.
double median_pairwise_distance(const PointSet& pts, std::uint64_t seed = 0,
                                int max_samples = 2000);

/// Herding problem data: raw points, mapped features, the weighting
/// distribution P and the target mean mu = sum_i P_i Phi(x_i).
struct HerdingInstance {
  PointSet raw_data;
  PointSet mapped_set;
  Vec probabilities;
  Vec mu;

  static HerdingInstance make(PointSet raw, const FeatureMap& map,
                              std::optional<Vec> probabilities = std::nullopt);

  /// Instance with an explicit target mean (possibly outside the hull).
  static HerdingInstance with_target(PointSet raw, const FeatureMap& map, Vec mu);
};

/// value = 0.5 ||w - mu||^2, gradient = w - mu. Convex with smoothness 1.
std::pair<double, Vec> herding_objective(const Vec& w, const Vec& mu);

/// Objective wrapper around herding_objective for the FW solvers.
Objective make_herding_objective(const Vec& mu);

struct HerdingClassicResult {
  std::vector<Eigen::Index> selected;  // x_1 .. x_T
  std::vector<double> mean_errors;     // ||(1/t) sum Phi(x_i) - mu|| after step t
  Vec final_state;                     // w_T of the recursion
};

/// Classical herding: x_{t+1} = argmin_x <-w_t, Phi(x)> by exact scan,
/// w_{t+1} = w_t + mu - Phi(x_{t+1}). Starts from w_0 = 0 (equivalent to
/// conditional-gradient averaging from the mean; ties -> smallest index).
HerdingClassicResult herding_classic(const HerdingInstance& inst, int steps,
                                     std::optional<Vec> w0 = std::nullopt);

/// Accelerated herding: fw_accelerated on 0.5||w - mu||^2 with beta = 1.
FwResult herding_accelerated(const HerdingInstance& inst, FwConfig cfg);

}  // namespace fwmips
