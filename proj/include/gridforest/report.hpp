#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gridforest/network.hpp"
#include "gridforest/power_eval.hpp"
#include "gridforest/radial.hpp"

namespace gridforest {

inline constexpr const char* kToolName = "gridforest";
inline constexpr const char* kToolVersion = "0.1.0";

struct TraceStep {
    std::vector<int> active_set;  // bus idxs, sorted
    double loss_kw = 0.0;         // +inf encoded as "infeasible": true
    bool feasible = true;
    bool accepted = false;
    double incumbent_kw = 0.0;
};

/// Everything a solve or search run reports; serializes to the JSON emitted
/// by the CLI. Two runs with identical inputs and seeds serialize
/// byte-identically except for the "timings" object.
struct SolverReport {
    std::string network_name;
    std::string network_path;
    int problem = 1;  // 1 = fixed roots, 2 = generator selection
    std::string mode = "greedy";
    uint64_t seed = 0;
    std::optional<int> kappa;

    std::vector<int> active_set;  // bus idxs
    RadialConfiguration configuration;
    double exact_loss_kw = 0.0;
    double approx_loss_kw = 0.0;
    double loss_fraction = 0.0;
    double total_supplied_kw = 0.0;
    FeasibilityReport feasibility;

    std::vector<TraceStep> trace;          // problem 2 only
    int64_t evaluations = 0;               // logical oracle evaluations (1 + t)
    int64_t forward_runs = 0;              // actual forward_solve executions
    int fallback_selections = 0;           // growth steps that bypassed the capacity filter
    int rewire_swaps = 0;

    std::map<std::string, double> timings_s;

    std::string to_json(const DistributionNetwork& net) const;
};

/// Warm-start variable assignment for an external MINLP solver: every line's
/// gamma, every pool generator's beta, and the solved flows and voltages of
/// the reported configuration.
struct WarmStart {
    static std::string to_json(const SolverReport& report, const DistributionNetwork& net,
                               const PowerFlowSolution& solution);

    /// Reconstruct the configuration encoded by a warm-start file's
    /// gamma/beta assignment.
    static RadialConfiguration configuration_from_json(const std::string& text,
                                                       const DistributionNetwork& net);
};

}  // namespace gridforest
