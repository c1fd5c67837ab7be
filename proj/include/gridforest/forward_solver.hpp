#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "gridforest/network.hpp"
#include "gridforest/power_eval.hpp"
#include "gridforest/radial.hpp"
#include "gridforest/report.hpp"
#include "gridforest/rng.hpp"

namespace gridforest {

enum class SolveMode { Greedy, Stochastic };

struct SolverOptions {
    SolveMode mode = SolveMode::Greedy;
    uint64_t seed = 0;
    int rewire_max_iters = 100;
    std::optional<double> loss_margin;  // defaults to the network's value
    bool phase_expansion = true;        // per-phase ledgers in debug logging
};

/// Graph reduction: surviving line indices per edge plus the bridge lines
/// that any spanning forest must contain.
struct PreProcessResult {
    std::vector<std::vector<int>> usable_k;  // edge idx -> surviving k values, sorted
    std::map<int, int> forced;               // edge idx -> forced line k

    bool edge_usable(int e) const { return !usable_k[e].empty(); }
};

struct Partition {
    int root = -1;
    std::vector<int> buses;    // sorted, includes the root
    double capacity_scalar = 0.0;  // alpha-adjusted, minus the root's own demand
    double demand_scalar = 0.0;    // inflated line-served demand admitted so far

    std::vector<LineRef> selection;  // S^ell, in selection order
    int attached_count = 1;
    PerPhase<double> attached_p{};  // per-phase demand served through lines
    PerPhase<double> attached_q{};
    PerPhase<double> residual_p{};  // demand still unattached (p^ell)
    PerPhase<double> residual_q{};
};

struct PartitionState {
    std::vector<Partition> partitions;
    std::vector<int> partition_of;  // bus idx -> partition index
    std::vector<char> attached;     // bus idx -> attached to its partition tree
    std::vector<int> parent;        // growing-tree parent link, -1 otherwise
    std::vector<LineRef> parent_line;
    std::map<LineRef, PerPhase<double>> flow_p;  // lossless accumulated line flows
    std::map<LineRef, PerPhase<double>> flow_q;
};

struct FrontierCandidate {
    int attached_bus = -1;    // t
    int new_bus = -1;         // n
    LineRef line;
    double weight = 0.0;
    bool line_covers_demand = true;  // net_concad's per-line capacity screen
};

/// Drop dominated and zero-capacity lines, find the bridge edges separating
/// demand from the active generators, and force their lowest-loss lines.
/// Throws Disconnected when a demand-carrying bus cannot reach any active
/// generator.
PreProcessResult pre_process(const DistributionNetwork& net, const std::vector<int>& active_set);

/// Capacity-aware multi-source region growing: buses join the electrically
/// nearest active generator whose remaining capacity covers their
/// loss-inflated demand; leftover buses are reassigned across partition
/// frontiers.
PartitionState islander(const DistributionNetwork& net, const PreProcessResult& reduced,
                        const std::vector<int>& active_set, double loss_margin);

/// Frontier candidates of one partition: every usable edge between an
/// attached and an unattached bus, each carrying the lowest-R^3/Z^2 line
/// whose capacity covers the new bus's demand.
std::vector<FrontierCandidate> net_concad(const DistributionNetwork& net, const PreProcessResult& reduced,
                                          const PartitionState& state, int partition);

/// Filter candidates that would break line capacities or the partition's
/// generation budget, weight the rest by demand over path loss potential,
/// and pop one (max weight in greedy mode, weight-proportional in
/// stochastic). The chosen candidate is attached and the partition state
/// updated. Throws AllCandidatesInfeasible when the filter empties the set.
FrontierCandidate ac_sampler(const std::vector<FrontierCandidate>& candidates,
                             const DistributionNetwork& net, PartitionState& state, int partition,
                             const SolverOptions& options, Rng& rng);

/// Weight of one candidate under the current partition state (exposed for
/// tests; ac_sampler applies it to every candidate).
double sampler_weight(const FrontierCandidate& cand, const DistributionNetwork& net,
                      const PartitionState& state);

/// Branch-exchange feasibility repair: greedily apply the swap (add one
/// inactive line, remove one line of the induced cycle or root path) that
/// most reduces total constraint violation; stop at feasibility. Throws
/// RepairFailed when no strictly improving swap exists or the iteration
/// budget runs out.
RadialConfiguration rewire(const DistributionNetwork& net, const RadialConfiguration& config,
                           const FeasibilityReport& report, const SolverOptions& options,
                           int* swap_count = nullptr);

/// The full pipeline for a fixed active-generator set: pre-process,
/// islander, per-partition growth via net_concad + ac_sampler, then rewire
/// if the built configuration violates constraints.
SolverReport forward_solve(const DistributionNetwork& net, const std::vector<int>& active_set,
                           const SolverOptions& options);

/// Shortest-path electrical distance (sum of mean R/Z per edge) from each
/// source bus; unreachable buses get +inf.
std::vector<double> electrical_distances(const DistributionNetwork& net, int source,
                                         const PreProcessResult* reduced = nullptr);

/// Canonical line ordering used for tie-breaks: (from id, to id, k).
bool line_ref_less_by_ids(const DistributionNetwork& net, LineRef a, LineRef b);

}  // namespace gridforest
