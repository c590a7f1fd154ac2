#pragma once

#include <filesystem>
#include <string>

#include "fwmips/aipe.hpp"
#include "fwmips/fw_solver.hpp"
#include "fwmips/jl_sketch.hpp"

namespace fwmips {

// Point-set container format: little-endian "FWPS", u32 n, u32 d, then
// n*d float64 row-major.

void save_point_set(const PointSet& pts, const std::filesystem::path& path);
PointSet load_point_set(const std::filesystem::path& path);

/// CSV fallback for small instances: one point per line, comma-separated.
PointSet load_point_set_csv(const std::filesystem::path& path);

/// Ensemble metadata as JSON (seeds, s, d, epsilon, delta); matrices are
/// regenerated from the seeds, never serialized.
void save_ensemble_meta(const SketchEnsemble& ens, const std::filesystem::path& path);
SketchEnsemble load_ensemble_meta(const std::filesystem::path& path);

/// Per-iteration trace: t, eta, r, outcome, selected, gap_surrogate, objective.
void save_trace_csv(const FwTrace& trace, const std::filesystem::path& path);

/// Run summary: stop reason, iterations, wall time, operation counters.
void save_trace_summary_json(const FwTrace& trace, const std::filesystem::path& path);

/// AIPE diagnostic dump: index, d_i, w_i.
void save_estimates_csv(const std::vector<AipeEstimate>& estimates,
                        const std::filesystem::path& path);

}  // namespace fwmips
