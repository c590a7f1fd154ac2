#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fwmips/fw_solver.hpp"

namespace fwmips {

/// One experiment: scenario + instance shape + oracle settings + seeds.
struct ExperimentSpec {
  std::string scenario = "fw_quadratic";  // fw_quadratic | herding | planted_maxip
  int n = 200;
  int d = 50;
  int k = 64;  // herding feature dimension
  double epsilon = 1e-3;
  double c = 0.9;
  double tau = 0.9;
  std::string oracle = "exact";  // exact | lshjl | aipe
  std::string mu_mode = "in_hull";  // in_hull | outside
  int max_iters = 0;  // 0 -> planner budget
  std::optional<int> probe_budget;  // LshJl probe budget override (testing knob)
  std::vector<std::uint64_t> seeds = {1};
  std::string output_dir = "out";
  bool fallback_exact = false;

  static ExperimentSpec from_json_file(const std::filesystem::path& path);
  void validate() const;
};

struct SeedReport {
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  double preprocess_seconds = 0.0;
  double mean_iteration_seconds = 0.0;
  int iterations = 0;
  double final_objective = 0.0;
  double final_gap = 0.0;
  double oracle_hit_rate = 0.0;
  std::string stop_reason;
  OpCounters counters;
};

struct RunReport {
  ExperimentSpec spec;
  std::vector<SeedReport> seeds;
};

/// Writes the instance files (point set + JSON manifest) for a spec.
/// Deterministic under spec.seeds.front().
int cmd_generate(const ExperimentSpec& spec);

/// Executes all seeds, writing per-seed trace CSVs and an aggregate JSON.
/// Returns 0 when any seed succeeded, 1 when all failed.
int cmd_run(const ExperimentSpec& spec);

/// Pilot sweeps realizing the constants the analysis leaves in big-O;
/// writes calibration JSON into out_dir and returns its path.
std::filesystem::path cmd_calibrate(const std::filesystem::path& out_dir);

/// Aggregates run directories into a markdown comparison table plus
/// convergence-curve CSVs.
int cmd_report(const std::vector<std::filesystem::path>& run_dirs,
               const std::filesystem::path& out_dir);

/// Unit-sphere quadratic instance generator (shared with tests).
PointSet generate_vertices(int n, int d, std::uint64_t seed);

/// Target mean for the quadratic scenario; in_hull draws random hull
/// weights (optimum value 0), outside pushes the centroid past the hull.
Vec generate_target(const PointSet& pts, const std::string& mu_mode, std::uint64_t seed);

/// Log-log slope of `values` against iteration number over [t_lo, t_hi],
/// by least squares; values must be positive (zeros are skipped).
double log_log_slope(const std::vector<double>& values, int t_lo, int t_hi);

}  // namespace fwmips
