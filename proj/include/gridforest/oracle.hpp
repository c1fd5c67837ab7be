#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "gridforest/network.hpp"
#include "gridforest/power_eval.hpp"
#include "gridforest/radial.hpp"

namespace gridforest {

inline constexpr int kOracleMaxEdges = 20;
inline constexpr int64_t kOracleMaxEvaluations = 100000;

struct OracleResult {
    RadialConfiguration best;
    std::vector<int> best_set;  // problem 2: the optimal active roots
    double best_loss_kw = 0.0;
    int64_t forests_enumerated = 0;
    int64_t forests_feasible = 0;
    int64_t subsets_enumerated = 0;  // problem 2 only
};

/// Stream every spanning forest of the network rooted exactly at `roots`
/// (one root per component, every line choice per selected edge), in
/// lexicographic (edge-subset, line-choice) order. Returns the number
/// yielded; the callback may return false to stop early.
int64_t enumerate_forests(const DistributionNetwork& net, const std::vector<int>& roots,
                          const std::function<bool(const RadialConfiguration&)>& yield);

/// Exhaustive Problem 1: evaluate every forest with the sweep and the
/// feasibility checks, return the feasible minimum by exact loss.
OracleResult oracle_problem1(const DistributionNetwork& net, const std::vector<int>& roots);

/// Exhaustive Problem 2: oracle_problem1 over every kappa-subset of the
/// generator pool. Guarded by kOracleMaxEvaluations total sweeps.
OracleResult oracle_problem2(const DistributionNetwork& net, int kappa);

}  // namespace gridforest
