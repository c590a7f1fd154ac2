#include "fwmips/lsh_index.hpp"

#include <cmath>
#include <unordered_set>

#include "fwmips/calibration.hpp"

namespace fwmips {

double plan_rho(double c_bar, RhoRegime regime) {
  if (!(c_bar > 1.0)) throw ConfigError("rho planner needs c_bar > 1");
  const double c2 = c_bar * c_bar;
  switch (regime) {
    case RhoRegime::kFastPreprocess:
      return 2.0 / c2 - 1.0 / (c2 * c2);
    case RhoRegime::kFastQuery:
      return 1.0 / (2.0 * c2 - 1.0);
  }
  throw ConfigError("unknown rho regime");
}

AnnParams maxip_to_ann(double c, double tau) {
  if (!(c > 0.0 && c < 1.0)) throw ConfigError("maxip ratio c must be in (0,1)");
  if (!(tau > 0.0 && tau < 1.0)) throw ConfigError("maxip threshold tau must be in (0,1)");
  AnnParams out;
  out.r = std::sqrt(2.0 - 2.0 * tau);
  out.c_bar = std::sqrt((1.0 - c * tau) / (1.0 - tau));
  return out;
}

LshParams LshParams::defaults(int n, double c, double tau, std::uint64_t seed) {
  const AnnParams ann = maxip_to_ann(c, tau);
  LshParams p;
  p.hash_bits = std::max(1, static_cast<int>(std::ceil(std::log2(static_cast<double>(n)))));
  p.tables = calib::kLshTablesDefault;
  p.c_bar = ann.c_bar;
  p.r = ann.r;
  p.seed = seed;
  const double load = static_cast<double>(n) / std::pow(2.0, p.hash_bits);
  p.probe_budget = static_cast<int>(calib::kProbeBudgetFactor * p.tables *
                                    std::max(1.0, load));
  return p;
}

LshIndex::LshIndex(PointSet points, LshParams params)
    : points_(std::move(points)), params_(params) {
  if (params_.hash_bits < 1 || params_.hash_bits > 63) throw ConfigError("hash_bits in [1,63]");
  if (params_.tables < 1) throw ConfigError("tables >= 1");
  if (params_.probe_budget < 0) throw ConfigError("probe_budget >= 0");
  if (!points_.all_unit_norm(1e-6)) throw NormError("LSH stores unit-norm points only");

  // Table t draws its hyperplanes from a seed derived from (seed, t), so a
  // rebuild with more tables reuses the existing ones as a prefix.
  hyperplanes_.reserve(static_cast<std::size_t>(params_.tables));
  for (int t = 0; t < params_.tables; ++t) {
    RngStream rng(derive_seed(params_.seed, static_cast<std::uint64_t>(t)));
    Mat planes(params_.hash_bits, points_.dim());
    for (int k = 0; k < params_.hash_bits; ++k)
      for (Eigen::Index j = 0; j < points_.dim(); ++j) planes(k, j) = rng.next_gaussian();
    hyperplanes_.push_back(std::move(planes));
  }

  tables_.resize(static_cast<std::size_t>(params_.tables));
  for (int t = 0; t < params_.tables; ++t)
    for (Eigen::Index i = 0; i < points_.size(); ++i)
      tables_[static_cast<std::size_t>(t)][hash_key(points_.point(i), t)].push_back(i);
}

std::uint64_t LshIndex::hash_key(const Vec& x, int table) const {
  const Vec dots = hyperplanes_[static_cast<std::size_t>(table)] * x;
  std::uint64_t key = 0;
  for (int k = 0; k < params_.hash_bits; ++k)
    if (dots(k) >= 0.0) key |= (1ULL << k);
  return key;
}

void LshIndex::require_unit(const Vec& q) const {
  if (q.size() != points_.dim()) throw DimensionError("query dimension mismatch");
  if (std::abs(q.norm() - 1.0) > 1e-6) throw NormError("LSH query must be unit-norm");
}

std::vector<Eigen::Index> LshIndex::probe_candidates(const Vec& q, LshQueryDiag* diag) const {
  require_unit(q);
  std::vector<Eigen::Index> out;
  std::unordered_set<Eigen::Index> seen;
  for (int t = 0; t < params_.tables; ++t) {
    if (diag) ++diag->tables_probed;
    const auto& table = tables_[static_cast<std::size_t>(t)];
    const auto it = table.find(hash_key(q, t));
    if (it == table.end()) continue;
    for (Eigen::Index idx : it->second) {
      if (static_cast<int>(out.size()) >= params_.probe_budget) return out;
      if (seen.insert(idx).second) out.push_back(idx);
    }
  }
  return out;
}

std::optional<Eigen::Index> LshIndex::query_ann(const Vec& q, double r,
                                                LshQueryDiag* diag) const {
  if (!(r > 0.0)) throw ConfigError("ANN radius must be positive");
  for (Eigen::Index idx : probe_candidates(q, diag)) {
    if (diag) ++diag->candidates_examined;
    if ((points_.point(idx) - q).norm() <= params_.c_bar * r) return idx;
  }
  return std::nullopt;
}

std::optional<Eigen::Index> LshIndex::query_maxip(const Vec& q, double c, double tau,
                                                  LshQueryDiag* diag) const {
  if (!(c > 0.0 && c < 1.0) || !(tau > 0.0 && tau < 1.0))
    throw ConfigError("query_maxip needs c, tau in (0,1)");
  for (Eigen::Index idx : probe_candidates(q, diag)) {
    if (diag) ++diag->candidates_examined;
    if (points_.point(idx).dot(q) >= c * tau) return idx;
  }
  return std::nullopt;
}

std::size_t LshIndex::bucket_entries() const {
  std::size_t total = 0;
  for (const auto& table : tables_)
    for (const auto& [key, bucket] : table) total += bucket.size();
  return total;
}

int calibrate_tables(const PointSet& points, double c, double tau, std::uint64_t seed,
                     double target_recall, const std::vector<int>& table_grid) {
  if (table_grid.empty()) throw ConfigError("empty table grid");
  const int n = static_cast<int>(points.size());
  const int num_probes = 100;

  // Self-planted probes: rotate a stored point toward a random direction so
  // the planted inner product is exactly tau.
  RngStream rng(derive_seed(seed, 0xca11b7a7eULL));
  std::vector<Vec> probes;
  probes.reserve(num_probes);
  for (int i = 0; i < num_probes; ++i) {
    const Eigen::Index target = static_cast<Eigen::Index>(rng.next_below(static_cast<std::uint64_t>(n)));
    const Vec x = points.point(target);
    Vec noise(points.dim());
    for (Eigen::Index j = 0; j < noise.size(); ++j) noise(j) = rng.next_gaussian();
    noise -= noise.dot(x) * x;
    if (noise.norm() < 1e-12) continue;
    noise.normalize();
    probes.push_back(tau * x + std::sqrt(1.0 - tau * tau) * noise);
  }

  double best_recall = 0.0;
  for (int tables : table_grid) {
    LshParams params = LshParams::defaults(n, c, tau, seed);
    params.tables = tables;
    params.probe_budget =
        static_cast<int>(calib::kProbeBudgetFactor * tables *
                         std::max(1.0, static_cast<double>(n) / std::pow(2.0, params.hash_bits)));
    LshIndex index(points, params);
    int hits = 0;
    for (std::size_t i = 0; i < probes.size(); ++i)
      if (index.query_maxip(probes[i], c, tau).has_value()) ++hits;
    const double recall = static_cast<double>(hits) / static_cast<double>(probes.size());
    best_recall = std::max(best_recall, recall);
    if (recall >= target_recall) return tables;
  }
  throw CalibrationError("no table count reached recall " + std::to_string(target_recall) +
                         "; best achieved " + std::to_string(best_recall));
}

}  // namespace fwmips
