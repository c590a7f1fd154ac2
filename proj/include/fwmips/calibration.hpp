#pragma once

#include <cstdint>

namespace fwmips::calib {

// Constants fixed by the pilot calibration sweeps (`fwmips calibrate`).
// The committed copy of the sweep output lives in data/calibration.json;
// tests cross-check that file against these values.

/// Sketch dimension: s = ceil(C_S * eps^-2 * ln(n / delta)).
inline constexpr double kCs = 0.9;

/// Query-time sketch samples: l = max(1, ceil(C_L * ln(n / delta))).
inline constexpr double kCl = 0.25;

/// Ensemble size cap for k_JL = ceil((d + ln(1/delta)) * ln(n*d)).
inline constexpr int kEnsembleCap = 256;

/// Sub-index copies per sketch: kappa = ceil(s * ln(n*s/(lambda*delta))),
/// capped here.
inline constexpr int kKappaCap = 16;

/// ADE ensemble size: k = max(3, odd(ceil(C_K * ln((n + query_budget)/delta)))).
inline constexpr double kCk = 2.0;

/// ADE per-query subset: odd(min(k, ceil(C_Q * ln(n * query_budget / delta)))).
inline constexpr double kCq = 1.0;

/// FW iteration budget: T = ceil(C_T * beta * D_max^2 / (c^2 * eps)).
inline constexpr double kCt = 4.0;

/// Constant in the relaxed-MaxIP additive slack
/// lambda_tilde = C * sqrt((1 - c*tau)/(1 - tau)) * (lambda + alpha).
inline constexpr double kLambdaTildeConst = 4.0;

/// LSH defaults: K = ceil(log2 n) bits, L tables calibrated for >= 0.95
/// planted recall at (c, tau) = (0.9, 0.9).
inline constexpr int kLshTablesDefault = 32;

/// Probe budget factor: budget = 4 * L * max(1, n / 2^K).
inline constexpr int kProbeBudgetFactor = 4;

/// Desk-scale LSH-JL profile used by the accelerated solver. The verbatim
/// ensemble formulas (k_JL up to 256, kappa up to 16) are exposed as the
/// generic defaults but their product is far too large to build at bench
/// scale, so the solver profile pins calibrated small values.
inline constexpr int kFwProfileKjl = 8;
inline constexpr int kFwProfileKappa = 2;
inline constexpr int kFwProfileSamples = 6;
inline constexpr int kFwProfileTables = 32;
inline constexpr double kFwProfileEpsilon = 0.5;
inline constexpr double kFwProfileLambda = 0.01;

/// AIPE profile for the accelerated solver: coarse estimates plus exact
/// verification of the top candidates.
inline constexpr double kFwAipeEpsilon = 0.2;
inline constexpr int kFwAipeTopVerify = 48;

}  // namespace fwmips::calib
