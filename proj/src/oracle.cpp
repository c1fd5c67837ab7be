#include "gridforest/oracle.hpp"

#include <algorithm>
#include <numeric>

namespace gridforest {

namespace {

/// Lexicographic k-combinations of {0..n-1}; returns false when exhausted.
bool next_combination(std::vector<int>& idx, int n) {
    const int k = static_cast<int>(idx.size());
    for (int i = k - 1; i >= 0; --i) {
        if (idx[i] < n - k + i) {
            ++idx[i];
            for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
            return true;
        }
    }
    return false;
}

bool valid_forest_edges(const DistributionNetwork& net, const std::vector<int>& edge_subset,
                        const std::vector<int>& roots) {
    std::vector<int> dsu(net.buses.size());
    std::iota(dsu.begin(), dsu.end(), 0);
    auto find = [&](int x) {
        while (dsu[x] != x) x = dsu[x] = dsu[dsu[x]];
        return x;
    };
    for (int e : edge_subset) {
        int a = find(net.edges[e].from_idx), b = find(net.edges[e].to_idx);
        if (a == b) return false;  // cycle
        dsu[b] = a;
    }
    std::vector<int> root_count(net.buses.size(), 0);
    for (int r : roots) root_count[find(r)] += 1;
    for (int b = 0; b < net.n_buses(); ++b)
        if (root_count[find(b)] != 1) return false;
    return true;
}

struct ForestEvaluation {
    bool feasible = false;
    double loss_kw = 0.0;
};

ForestEvaluation evaluate_forest(const DistributionNetwork& net, const RadialConfiguration& config) {
    OrientedForest forest = orient(config, net);
    PowerFlowSolution sol = sweep_power_flow(net, forest, config.roots);
    if (!sol.converged) return {false, 0.0};
    FeasibilityReport rep = check_feasibility(net, config, forest, sol);
    if (!rep.feasible) return {false, 0.0};
    return {true, exact_loss_kw(sol, net)};
}

}  // namespace

int64_t enumerate_forests(const DistributionNetwork& net, const std::vector<int>& roots,
                          const std::function<bool(const RadialConfiguration&)>& yield) {
    if (net.n_edges() > kOracleMaxEdges)
        raise(ErrorKind::TooLarge, "enumeration guard: network has more than " +
                                       std::to_string(kOracleMaxEdges) + " edges");
    for (int r : roots)
        if (r < 0 || r >= net.n_buses()) raise(ErrorKind::UnknownBus, "root index out of range");

    const int m = net.n_edges();
    const int target = net.n_buses() - static_cast<int>(roots.size());
    if (target < 0 || target > m) return 0;

    std::vector<int> sorted_roots = roots;
    std::sort(sorted_roots.begin(), sorted_roots.end());

    int64_t count = 0;
    std::vector<int> subset(target);
    std::iota(subset.begin(), subset.end(), 0);
    bool more = true;
    if (target == 0) {
        // the empty forest: valid iff every bus is a root
        RadialConfiguration config;
        config.roots = sorted_roots;
        if (valid_forest_edges(net, {}, sorted_roots)) {
            ++count;
            yield(config);
        }
        return count;
    }
    while (more) {
        if (valid_forest_edges(net, subset, sorted_roots)) {
            // expand every per-edge line choice, k-major on the last edge
            std::vector<int> choice(subset.size(), 0);
            bool done = false;
            while (!done) {
                RadialConfiguration config;
                config.roots = sorted_roots;
                for (size_t i = 0; i < subset.size(); ++i)
                    config.selected.push_back({subset[i], net.edges[subset[i]].lines[choice[i]].k});
                config.canonicalize();
                ++count;
                if (!yield(config)) return count;
                int pos = static_cast<int>(choice.size()) - 1;
                while (pos >= 0) {
                    if (choice[pos] + 1 < static_cast<int>(net.edges[subset[pos]].lines.size())) {
                        ++choice[pos];
                        for (size_t j = pos + 1; j < choice.size(); ++j) choice[j] = 0;
                        break;
                    }
                    --pos;
                }
                done = pos < 0;
            }
        }
        more = next_combination(subset, m);
    }
    return count;
}

OracleResult oracle_problem1(const DistributionNetwork& net, const std::vector<int>& roots) {
    OracleResult result;
    result.best_loss_kw = 0.0;
    bool found = false;
    enumerate_forests(net, roots, [&](const RadialConfiguration& config) {
        ++result.forests_enumerated;
        ForestEvaluation eval = evaluate_forest(net, config);
        if (eval.feasible) {
            ++result.forests_feasible;
            if (!found || eval.loss_kw < result.best_loss_kw) {
                found = true;
                result.best_loss_kw = eval.loss_kw;
                result.best = config;
            }
        }
        return true;
    });
    if (!found) raise(ErrorKind::NoFeasibleForest, "no feasible spanning forest exists for the root set");
    result.best_set = result.best.roots;
    return result;
}

OracleResult oracle_problem2(const DistributionNetwork& net, int kappa) {
    const auto& pool = net.generator_pool;
    const int n_g = static_cast<int>(pool.size());
    if (kappa < 1 || kappa > n_g) raise(ErrorKind::KappaTooLarge, "kappa outside [1, n_g]");

    OracleResult result;
    bool found = false;
    int64_t evaluations = 0;

    std::vector<int> idx(kappa);
    std::iota(idx.begin(), idx.end(), 0);
    bool more = true;
    while (more) {
        std::vector<int> subset;
        for (int i : idx) subset.push_back(pool[i]);
        ++result.subsets_enumerated;

        enumerate_forests(net, subset, [&](const RadialConfiguration& config) {
            ++result.forests_enumerated;
            if (++evaluations > kOracleMaxEvaluations)
                raise(ErrorKind::TooLarge, "enumeration guard: more than " +
                                               std::to_string(kOracleMaxEvaluations) + " evaluations");
            ForestEvaluation eval = evaluate_forest(net, config);
            if (eval.feasible) {
                ++result.forests_feasible;
                if (!found || eval.loss_kw < result.best_loss_kw) {
                    found = true;
                    result.best_loss_kw = eval.loss_kw;
                    result.best = config;
                    result.best_set = subset;
                }
            }
            return true;
        });
        more = next_combination(idx, n_g);
    }
    if (!found) raise(ErrorKind::NoFeasibleSolution, "no kappa-subset admits a feasible forest");
    return result;
}

}  // namespace gridforest
