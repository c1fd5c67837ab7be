#pragma once

#include <cstdint>

#include "gridforest/network.hpp"

namespace gridforest {

struct WsParams {
    int n_nodes = 120;
    int mean_degree = 10;  // even; ring-lattice neighbors per side = degree/2
    double rewire_prob = 0.1;
    int n_sources = 5;
    double demand_total_kw = 65726.0;
    double generation_ratio = 4.44;  // total generation / total demand
    uint64_t seed = 0;
    bool hub_sources = false;  // place generators on the highest-degree buses
};

/// Seeded Watts-Strogatz synthetic network: ring lattice plus rewiring,
/// log-uniform per-phase demands rescaled to the target total, generation
/// rescaled to generation_ratio, impedances uniform in [0.005, 0.05] p.u.,
/// line capacities 3x the mean lossless flow of a breadth-first baseline
/// tree. Regenerates until connected. Identical params give byte-identical
/// serializations.
DistributionNetwork generate_ws(const WsParams& params);

}  // namespace gridforest
