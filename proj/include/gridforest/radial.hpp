#pragma once

#include <string>
#include <vector>

#include "gridforest/network.hpp"

namespace gridforest {

/// A spanning-forest candidate: the selected (edge, line) pairs plus the
/// active-generator roots. Kept sorted for canonical serialization.
struct RadialConfiguration {
    std::vector<LineRef> selected;
    std::vector<int> roots;  // bus idxs, sorted

    void canonicalize();
    bool operator==(const RadialConfiguration&) const = default;
};

/// Parent/child orientation of a radial configuration. parent[b] == -1 marks
/// a root; every parent chain terminates at the component's root.
struct OrientedForest {
    std::vector<int> parent;            // bus idx -> parent bus idx, -1 at roots
    std::vector<LineRef> parent_line;   // line carrying the parent link
    std::vector<std::vector<int>> children;
    std::vector<int> component_root;    // bus idx -> root bus idx
    std::vector<int> depth;
    std::vector<int> roots;

    int n_components() const { return static_cast<int>(roots.size()); }
    bool is_root(int bus) const { return parent[bus] < 0; }
};

/// True iff the selected lines form a spanning forest of the network with
/// exactly one root in every component (parallel lines on one edge count as
/// a cycle). Throws UnknownEdge when the configuration references an edge or
/// line the network does not have.
bool is_radial(const RadialConfiguration& config, const DistributionNetwork& net);

/// Orient a radial configuration so parent links point toward each
/// component's root. Throws NotRadial when is_radial fails.
OrientedForest orient(const RadialConfiguration& config, const DistributionNetwork& net);

/// Bus set strictly below a selected line (the subtree hanging at its child
/// endpoint), sorted by bus idx.
std::vector<int> downstream_set(const OrientedForest& forest, const DistributionNetwork& net, LineRef line);

/// Root-to-bus line sequence; empty for roots.
std::vector<LineRef> upstream_path(const OrientedForest& forest, const DistributionNetwork& net, int bus);

/// JSON form used inside reports and warm-start files:
/// { "roots": [ids], "selected": [{"from","to","k"}] }
std::string configuration_to_json(const RadialConfiguration& config, const DistributionNetwork& net);
RadialConfiguration configuration_from_json(const std::string& text, const DistributionNetwork& net);

}  // namespace gridforest
