#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "gridforest/forward_solver.hpp"
#include "gridforest/network.hpp"
#include "gridforest/report.hpp"
#include "gridforest/rng.hpp"

namespace gridforest {

struct SearchOptions {
    int kappa = 1;
    double target_p = 0.95;
    std::optional<int64_t> max_iters;
    double epsilon_rel = 0.01;
    bool epsilon_schedule = false;  // geometric 0.05 -> 0.001 over the budget
    double epsilon_start = 0.05;
    double epsilon_end = 0.001;
    int64_t stall_limit = 0;  // 0 disables early stopping
    uint64_t seed = 0;
    int parallel = 1;  // neighbor evaluations per speculative batch
    std::optional<std::vector<int>> warm_start;  // initial set instead of greedy_init

    SolverOptions forward;  // oracle options; sub-seeded per candidate set
};

/// Rank generators by total demand over (1 + electrical distance) and take
/// the top kappa (ties by bus id).
std::vector<int> greedy_init(const DistributionNetwork& net, int kappa);

/// One uniformly random swap: an element of `set` out, an element of
/// pool minus set in. Throws NoSwapAvailable when the pool is exhausted.
std::vector<int> neighbor(const std::vector<int>& set, const std::vector<int>& pool, Rng& rng);

/// Iteration budget from the mixing-time bound:
/// max(1, ceil(target_p * kappa * n_g * (2 + ln n_g))).
int64_t t_max(int kappa, int n_g, double target_p);

/// Swap-walk over kappa-subsets of the generator pool with forward_solve as
/// the evaluation oracle; returns the strict incumbent over all feasible
/// evaluations.
SolverReport permutation_search(const DistributionNetwork& net, const SearchOptions& options);

}  // namespace gridforest
