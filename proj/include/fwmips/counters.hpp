#pragma once

#include <cstdint>

namespace fwmips {

/// Exact operation counters, incremented at call sites. These are the
/// primary cost metric; wall times are advisory.
struct OpCounters {
  std::uint64_t dot_ops = 0;      // scalar multiplies in exact scans / verification / estimates
  std::uint64_t sketch_ops = 0;   // scalar multiplies in JL projections
  std::uint64_t hash_evals = 0;   // hyperplane sign evaluations
  std::uint64_t candidates_verified = 0;
  std::uint64_t oracle_queries = 0;
  std::uint64_t oracle_hits = 0;
  std::uint64_t oracle_fails = 0;
  std::uint64_t r_halvings = 0;

  OpCounters& operator+=(const OpCounters& o) {
    dot_ops += o.dot_ops;
    sketch_ops += o.sketch_ops;
    hash_evals += o.hash_evals;
    candidates_verified += o.candidates_verified;
    oracle_queries += o.oracle_queries;
    oracle_hits += o.oracle_hits;
    oracle_fails += o.oracle_fails;
    r_halvings += o.r_halvings;
    return *this;
  }
};

}  // namespace fwmips
