#include "gridforest/forward_solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <queue>
#include <tuple>

#include "gridforest/log.hpp"

namespace gridforest {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kCapacityEps = 1e-12;

double edge_weight(const DistributionNetwork& net, int e, const PreProcessResult* reduced) {
    const Edge& edge = net.edges[e];
    double best = kInf;
    for (const Line& l : edge.lines) {
        if (reduced && !std::binary_search(reduced->usable_k[e].begin(), reduced->usable_k[e].end(), l.k))
            continue;
        best = std::min(best, l.rz_mean());
    }
    return best;
}

/// a dominates b: no worse on every listed attribute, better on at least one
/// (equal lines keep the smaller k).
bool dominates(const Line& a, const Line& b) {
    if (!a.phases.contains_all(b.phases)) return false;
    bool strict = a.phases.count() > b.phases.count();
    for (Phase p : kAllPhases) {
        if (!b.phases.contains(p)) continue;
        if (a.r_pu[p] > b.r_pu[p] || a.x_pu[p] > b.x_pu[p]) return false;
        if (a.r_pu[p] < b.r_pu[p] || a.x_pu[p] < b.x_pu[p]) strict = true;
    }
    if (a.p_max_pu < b.p_max_pu || a.q_max_pu < b.q_max_pu) return false;
    if (a.p_max_pu > b.p_max_pu || a.q_max_pu > b.q_max_pu) strict = true;
    return strict || a.k < b.k;
}

bool line_covers_bus_demand(const DistributionNetwork& net, const Line& line, int bus) {
    const Bus& b = net.buses[bus];
    for (Phase p : kAllPhases) {
        if (!line.phases.contains(p)) continue;
        if (b.demand_p_pu[p] > line.p_max_pu + kCapacityEps) return false;
        if (b.demand_q_pu[p] > line.q_max_pu + kCapacityEps) return false;
    }
    return true;
}

/// Pick the lowest-loss usable line of an edge, preferring lines whose
/// capacity covers the new bus's demand.
std::pair<int, bool> choose_line(const DistributionNetwork& net, const PreProcessResult& reduced, int e,
                                 int new_bus) {
    int best_k = -1, best_any_k = -1;
    double best = kInf, best_any = kInf;
    for (int k : reduced.usable_k[e]) {
        const Line& l = *net.edges[e].find_line(k);
        double coeff = l.loss_coeff_sum();
        if (coeff < best_any) {
            best_any = coeff;
            best_any_k = k;
        }
        if (line_covers_bus_demand(net, l, new_bus) && coeff < best) {
            best = coeff;
            best_k = k;
        }
    }
    if (best_k >= 0) return {best_k, true};
    return {best_any_k, false};
}

struct Stopwatch {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double lap() {
        auto t1 = std::chrono::steady_clock::now();
        double s = std::chrono::duration<double>(t1 - t0).count();
        t0 = t1;
        return s;
    }
};

void attach_candidate(const DistributionNetwork& net, PartitionState& state, int pi,
                      const FrontierCandidate& cand) {
    Partition& part = state.partitions[pi];
    const int n = cand.new_bus;
    const Bus& bus = net.buses[n];

    state.attached[n] = 1;
    state.parent[n] = cand.attached_bus;
    state.parent_line[n] = cand.line;
    part.selection.push_back(cand.line);
    part.attached_count += 1;

    for (Phase p : kAllPhases) {
        part.attached_p[p] += bus.demand_p_pu[p];
        part.attached_q[p] += bus.demand_q_pu[p];
        part.residual_p[p] -= bus.demand_p_pu[p];
        part.residual_q[p] -= bus.demand_q_pu[p];
    }

    // the new bus's demand loads every line on its supply path
    const Line& nl = net.line(cand.line);
    for (Phase p : kAllPhases) {
        if (!nl.phases.contains(p)) continue;
        state.flow_p[cand.line][p] += bus.demand_p_pu[p];
        state.flow_q[cand.line][p] += bus.demand_q_pu[p];
    }
    for (int cur = cand.attached_bus; state.parent[cur] >= 0; cur = state.parent[cur]) {
        const LineRef pl = state.parent_line[cur];
        const Line& pline = net.line(pl);
        for (Phase p : kAllPhases) {
            if (!pline.phases.contains(p)) continue;
            state.flow_p[pl][p] += bus.demand_p_pu[p];
            state.flow_q[pl][p] += bus.demand_q_pu[p];
        }
    }

    if (log::level() >= log::Level::Debug) {
        log::debug("attach %s -> %s via %s-%s[k=%d] w=%.6g", net.buses[cand.attached_bus].id.c_str(),
                   bus.id.c_str(), net.edges[cand.line.edge].from.c_str(),
                   net.edges[cand.line.edge].to.c_str(), cand.line.k, cand.weight);
    }
}

/// Deep feasibility screen: line capacities along the whole supply path and
/// the partition's alpha-adjusted generation budget.
bool inclusion_feasible(const DistributionNetwork& net, const PartitionState& state, int pi,
                        const FrontierCandidate& cand) {
    if (!cand.line_covers_demand) return false;
    const Bus& nb = net.buses[cand.new_bus];

    for (int cur = cand.attached_bus; state.parent[cur] >= 0; cur = state.parent[cur]) {
        const LineRef pl = state.parent_line[cur];
        const Line& pline = net.line(pl);
        auto fp = state.flow_p.find(pl);
        auto fq = state.flow_q.find(pl);
        for (Phase p : kAllPhases) {
            if (!pline.phases.contains(p)) continue;
            double flow_p = (fp != state.flow_p.end() ? fp->second[p] : 0.0) + nb.demand_p_pu[p];
            double flow_q = (fq != state.flow_q.end() ? fq->second[p] : 0.0) + nb.demand_q_pu[p];
            if (flow_p > pline.p_max_pu + kCapacityEps) return false;
            if (flow_q > pline.q_max_pu + kCapacityEps) return false;
        }
    }

    const Partition& part = state.partitions[pi];
    const Bus& root = net.buses[part.root];
    for (Phase p : kAllPhases) {
        if (!root.phases.contains(p)) continue;
        double inj_p = root.demand_p_pu[p] + part.attached_p[p] + nb.demand_p_pu[p];
        double inj_q = root.demand_q_pu[p] + part.attached_q[p] + nb.demand_q_pu[p];
        if (inj_p > net.alpha * root.gen_p_max_pu[p] + kCapacityEps) return false;
        if (inj_q > net.alpha * root.gen_q_max_pu[p] + kCapacityEps) return false;
    }
    return true;
}

bool candidate_order(const DistributionNetwork& net, const FrontierCandidate& a, const FrontierCandidate& b) {
    if (a.line != b.line) return line_ref_less_by_ids(net, a.line, b.line);
    return net.buses[a.new_bus].id < net.buses[b.new_bus].id;
}

}  // namespace

bool line_ref_less_by_ids(const DistributionNetwork& net, LineRef a, LineRef b) {
    const Edge& ea = net.edges[a.edge];
    const Edge& eb = net.edges[b.edge];
    return std::tie(ea.from, ea.to, a.k) < std::tie(eb.from, eb.to, b.k);
}

std::vector<double> electrical_distances(const DistributionNetwork& net, int source,
                                         const PreProcessResult* reduced) {
    std::vector<double> dist(net.buses.size(), kInf);
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    dist[source] = 0.0;
    pq.push({0.0, source});
    while (!pq.empty()) {
        auto [d, u] = pq.top();
        pq.pop();
        if (d > dist[u]) continue;
        for (int e : net.adjacency[u]) {
            if (reduced && !reduced->edge_usable(e)) continue;
            double w = edge_weight(net, e, reduced);
            if (!(w < kInf)) continue;
            int v = net.edges[e].other(u);
            if (d + w < dist[v]) {
                dist[v] = d + w;
                pq.push({dist[v], v});
            }
        }
    }
    return dist;
}

PreProcessResult pre_process(const DistributionNetwork& net, const std::vector<int>& active_set) {
    if (active_set.empty()) raise(ErrorKind::Validation, "active generator set is empty");
    for (int g : active_set)
        if (!net.buses[g].is_generator())
            raise(ErrorKind::Validation, "active bus " + net.buses[g].id + " is not a generator");

    PreProcessResult out;
    out.usable_k.resize(net.edges.size());

    for (int e = 0; e < net.n_edges(); ++e) {
        const auto& lines = net.edges[e].lines;
        std::vector<char> dropped(lines.size(), 0);
        for (size_t i = 0; i < lines.size(); ++i)
            if (!(lines[i].p_max_pu > 0.0) || !(lines[i].q_max_pu > 0.0)) dropped[i] = 1;
        for (size_t i = 0; i < lines.size(); ++i) {
            if (dropped[i]) continue;
            for (size_t j = 0; j < lines.size(); ++j) {
                if (i == j || dropped[j] || dropped[i]) continue;
                if (dominates(lines[i], lines[j])) dropped[j] = 1;
            }
        }
        for (size_t i = 0; i < lines.size(); ++i)
            if (!dropped[i]) out.usable_k[e].push_back(lines[i].k);
        std::sort(out.usable_k[e].begin(), out.usable_k[e].end());
    }

    const int n = net.n_buses();
    std::vector<char> active(n, 0);
    for (int g : active_set) active[g] = 1;

    // components of the reduced graph, and reachability of demand from the
    // active generators
    std::vector<int> comp(n, -1);
    std::vector<int> comp_demand, comp_gens;
    for (int s = 0; s < n; ++s) {
        if (comp[s] >= 0) continue;
        int c = static_cast<int>(comp_demand.size());
        comp_demand.push_back(0);
        comp_gens.push_back(0);
        std::vector<int> stack{s};
        comp[s] = c;
        while (!stack.empty()) {
            int u = stack.back();
            stack.pop_back();
            if (net.scalar_demand_pu(u) > 0.0) comp_demand[c] += 1;
            if (active[u]) comp_gens[c] += 1;
            for (int e : net.adjacency[u]) {
                if (!out.edge_usable(e)) continue;
                int v = net.edges[e].other(u);
                if (comp[v] < 0) {
                    comp[v] = c;
                    stack.push_back(v);
                }
            }
        }
    }
    for (int b = 0; b < n; ++b)
        if (net.scalar_demand_pu(b) > 0.0 && comp_gens[comp[b]] == 0)
            raise(ErrorKind::Disconnected,
                  "demand bus " + net.buses[b].id + " cannot reach any active generator");

    // iterative Tarjan bridge search with per-subtree demand/generator counts
    std::vector<int> tin(n, -1), low(n, 0), sub_demand(n, 0), sub_gens(n, 0);
    int timer = 0;
    struct Frame {
        int bus;
        int via_edge;
        size_t next;
    };
    for (int s = 0; s < n; ++s) {
        if (tin[s] >= 0) continue;
        std::vector<Frame> stack{{s, -1, 0}};
        tin[s] = low[s] = timer++;
        sub_demand[s] = net.scalar_demand_pu(s) > 0.0 ? 1 : 0;
        sub_gens[s] = active[s] ? 1 : 0;
        while (!stack.empty()) {
            Frame& f = stack.back();
            if (f.next < net.adjacency[f.bus].size()) {
                int e = net.adjacency[f.bus][f.next++];
                if (!out.edge_usable(e) || e == f.via_edge) continue;
                int v = net.edges[e].other(f.bus);
                if (tin[v] >= 0) {
                    low[f.bus] = std::min(low[f.bus], tin[v]);
                } else {
                    tin[v] = low[v] = timer++;
                    sub_demand[v] = net.scalar_demand_pu(v) > 0.0 ? 1 : 0;
                    sub_gens[v] = active[v] ? 1 : 0;
                    stack.push_back({v, e, 0});
                }
            } else {
                int v = f.bus;
                int e = f.via_edge;
                stack.pop_back();
                if (stack.empty()) break;
                int u = stack.back().bus;
                low[u] = std::min(low[u], low[v]);
                sub_demand[u] += sub_demand[v];
                sub_gens[u] += sub_gens[v];
                if (low[v] > tin[u]) {
                    // bridge u-v; forced when either side would strand demand
                    int c = comp[u];
                    bool sub_strands = sub_demand[v] > 0 && sub_gens[v] == 0;
                    bool rest_strands =
                        (comp_demand[c] - sub_demand[v]) > 0 && (comp_gens[c] - sub_gens[v]) == 0;
                    if (sub_strands || rest_strands) {
                        int best_k = -1;
                        double best = kInf;
                        for (int k : out.usable_k[e]) {
                            double coeff = net.edges[e].find_line(k)->loss_coeff_sum();
                            if (coeff < best) {
                                best = coeff;
                                best_k = k;
                            }
                        }
                        if (best_k >= 0) out.forced[e] = best_k;
                    }
                }
            }
        }
    }
    return out;
}

PartitionState islander(const DistributionNetwork& net, const PreProcessResult& reduced,
                        const std::vector<int>& active_set, double loss_margin) {
    const int n = net.n_buses();
    std::vector<int> roots = active_set;
    std::sort(roots.begin(), roots.end(),
              [&](int a, int b) { return net.buses[a].id < net.buses[b].id; });

    PartitionState state;
    state.partition_of.assign(n, -1);
    state.attached.assign(n, 0);
    state.parent.assign(n, -1);
    state.parent_line.assign(n, LineRef{});

    std::vector<double> remaining;
    for (size_t pi = 0; pi < roots.size(); ++pi) {
        int g = roots[pi];
        Partition part;
        part.root = g;
        part.buses = {g};
        part.capacity_scalar = net.scalar_capacity_pu(g) - net.scalar_demand_pu(g);
        if (part.capacity_scalar < -kCapacityEps)
            raise(ErrorKind::InsufficientGeneration,
                  "generator " + net.buses[g].id + " cannot cover its own demand");
        state.partitions.push_back(std::move(part));
        state.partition_of[g] = static_cast<int>(pi);
        state.attached[g] = 1;
        remaining.push_back(state.partitions.back().capacity_scalar);
    }

    const double inflate = 1.0 + loss_margin;
    using Item = std::tuple<double, int, int>;  // (distance, partition, bus)
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;

    auto push_frontier = [&](int from_bus, int pi, double base) {
        for (int e : net.adjacency[from_bus]) {
            if (!reduced.edge_usable(e)) continue;
            int v = net.edges[e].other(from_bus);
            if (state.partition_of[v] >= 0) continue;
            pq.push({base + edge_weight(net, e, &reduced), pi, v});
        }
    };

    std::vector<double> dist_at(n, kInf);
    for (size_t pi = 0; pi < roots.size(); ++pi) push_frontier(roots[pi], static_cast<int>(pi), 0.0);

    while (!pq.empty()) {
        auto [d, pi, b] = pq.top();
        pq.pop();
        if (state.partition_of[b] >= 0) continue;
        const double need = inflate * net.scalar_demand_pu(b);
        if (remaining[pi] + kCapacityEps < need) continue;  // overloaded: leave b to another wave
        state.partition_of[b] = pi;
        remaining[pi] -= need;
        state.partitions[pi].demand_scalar += need;
        state.partitions[pi].buses.push_back(b);
        dist_at[b] = d;
        push_frontier(b, pi, d);
    }

    // frontier reassignment for buses every capacity-constrained wave skipped
    std::vector<int> unassigned;
    for (int b = 0; b < n; ++b)
        if (state.partition_of[b] < 0) unassigned.push_back(b);
    bool progress = true;
    while (!unassigned.empty() && progress) {
        progress = false;
        std::vector<int> still;
        for (int b : unassigned) {
            const double need = inflate * net.scalar_demand_pu(b);
            int best_pi = -1;
            for (int e : net.adjacency[b]) {
                if (!reduced.edge_usable(e)) continue;
                int v = net.edges[e].other(b);
                int pi = state.partition_of[v];
                if (pi < 0 || remaining[pi] + kCapacityEps < need) continue;
                if (best_pi < 0 || remaining[pi] > remaining[best_pi]) best_pi = pi;
            }
            if (best_pi >= 0) {
                state.partition_of[b] = best_pi;
                remaining[best_pi] -= need;
                state.partitions[best_pi].demand_scalar += need;
                state.partitions[best_pi].buses.push_back(b);
                progress = true;
            } else {
                still.push_back(b);
            }
        }
        unassigned = std::move(still);
    }
    if (!unassigned.empty()) {
        int b = unassigned.front();
        bool reachable = false;
        for (int e : net.adjacency[b])
            if (reduced.edge_usable(e)) reachable = true;
        if (!reachable)
            raise(ErrorKind::UnreachableBus, "bus " + net.buses[b].id + " has no usable incident edge");
        raise(ErrorKind::InsufficientGeneration,
              "no generator has remaining capacity for bus " + net.buses[b].id);
    }

    for (auto& part : state.partitions) {
        std::sort(part.buses.begin(), part.buses.end());
        for (int b : part.buses) {
            if (b == part.root) continue;
            for (Phase p : kAllPhases) {
                part.residual_p[p] += net.buses[b].demand_p_pu[p];
                part.residual_q[p] += net.buses[b].demand_q_pu[p];
            }
        }
    }
    return state;
}

std::vector<FrontierCandidate> net_concad(const DistributionNetwork& net, const PreProcessResult& reduced,
                                          const PartitionState& state, int partition) {
    std::vector<FrontierCandidate> out;
    const Partition& part = state.partitions[partition];
    for (int t : part.buses) {
        if (!state.attached[t]) continue;
        for (int e : net.adjacency[t]) {
            if (!reduced.edge_usable(e)) continue;
            int nb = net.edges[e].other(t);
            if (state.attached[nb] || state.partition_of[nb] != partition) continue;
            FrontierCandidate cand;
            cand.attached_bus = t;
            cand.new_bus = nb;
            // a forced bridge line is the minimum-R^3/Z^2 usable line, which
            // is exactly what choose_line returns when capacity permits; the
            // capacity screen may still upgrade to a line that can carry the
            // new bus
            auto [k, covers] = choose_line(net, reduced, e, nb);
            cand.line = {e, k};
            cand.line_covers_demand = covers;
            out.push_back(cand);
        }
    }
    std::sort(out.begin(), out.end(),
              [&](const FrontierCandidate& a, const FrontierCandidate& b) { return candidate_order(net, a, b); });
    return out;
}

double sampler_weight(const FrontierCandidate& cand, const DistributionNetwork& net,
                      const PartitionState& state) {
    const Bus& nb = net.buses[cand.new_bus];
    const Line& nl = net.line(cand.line);

    double numer = 0.0;
    for (Phase p : kAllPhases)
        if (nl.phases.contains(p)) numer += nb.demand_p_pu[p] + nb.demand_q_pu[p];

    // loss potential of the whole supply path with the candidate attached
    double denom = nl.rz_mean() * numer;
    for (int cur = cand.attached_bus; state.parent[cur] >= 0; cur = state.parent[cur]) {
        const LineRef pl = state.parent_line[cur];
        const Line& pline = net.line(pl);
        auto fp = state.flow_p.find(pl);
        auto fq = state.flow_q.find(pl);
        double d = 0.0;
        for (Phase p : kAllPhases) {
            if (!pline.phases.contains(p)) continue;
            d += (fp != state.flow_p.end() ? fp->second[p] : 0.0);
            d += (fq != state.flow_q.end() ? fq->second[p] : 0.0);
            d += nb.demand_p_pu[p] + nb.demand_q_pu[p];
        }
        denom += pline.rz_mean() * d;
    }

    if (denom < 1e-15) return numer > 0.0 ? numer / 1e-15 : 0.0;
    return numer / denom;
}

FrontierCandidate ac_sampler(const std::vector<FrontierCandidate>& candidates,
                             const DistributionNetwork& net, PartitionState& state, int partition,
                             const SolverOptions& options, Rng& rng) {
    std::vector<FrontierCandidate> eligible;
    for (const auto& cand : candidates) {
        if (!inclusion_feasible(net, state, partition, cand)) continue;
        FrontierCandidate c = cand;
        c.weight = sampler_weight(c, net, state);
        eligible.push_back(c);
    }
    if (eligible.empty())
        raise(ErrorKind::AllCandidatesInfeasible, "every frontier candidate violates a constraint");

    size_t pick = 0;
    if (options.mode == SolveMode::Greedy) {
        for (size_t i = 1; i < eligible.size(); ++i)
            if (eligible[i].weight > eligible[pick].weight) pick = i;
    } else {
        std::vector<double> weights;
        weights.reserve(eligible.size());
        for (const auto& c : eligible) weights.push_back(c.weight);
        pick = rng.weighted_index(weights);
    }
    attach_candidate(net, state, partition, eligible[pick]);
    return eligible[pick];
}

RadialConfiguration rewire(const DistributionNetwork& net, const RadialConfiguration& config,
                           const FeasibilityReport& report, const SolverOptions& options,
                           int* swap_count) {
    if (report.feasible) return config;

    RadialConfiguration cur = config;
    cur.canonicalize();

    auto evaluate = [&](const RadialConfiguration& c, FeasibilityReport* out_report) {
        OrientedForest forest = orient(c, net);
        PowerFlowSolution sol = sweep_power_flow(net, forest, c.roots);
        FeasibilityReport rep = check_feasibility(net, c, forest, sol);
        if (out_report) *out_report = rep;
        double v = rep.total_violation;
        if (!sol.converged) v += 1e6 + sol.max_mismatch_pu;
        return v;
    };

    FeasibilityReport cur_report = report;
    double cur_violation = cur_report.total_violation;

    for (int iter = 0; iter < options.rewire_max_iters; ++iter) {
        if (cur_report.feasible) return cur;
        OrientedForest forest = orient(cur, net);
        PowerFlowSolution sol = sweep_power_flow(net, forest, cur.roots);

        // offending buses: subtrees below overloaded lines, whole components
        // for voltage/injection trouble
        std::vector<char> hot(net.buses.size(), 0);
        auto mark_component = [&](int root) {
            for (int b = 0; b < net.n_buses(); ++b)
                if (forest.component_root[b] == root) hot[b] = 1;
        };
        if (!sol.converged)
            for (int r : cur.roots) mark_component(r);
        for (const auto& f : sol.flows) {
            const Line& line = net.line(f.line);
            bool overloaded = false;
            for (Phase p : kAllPhases) {
                if (!line.phases.contains(p)) continue;
                const Edge& e = net.edges[f.line.edge];
                double ang = std::arg(sol.voltage[e.from_idx][p] * std::conj(sol.voltage[e.to_idx][p]));
                if (f.flow_send[p].real() > line.p_max_pu + kFeasibilityTolerance ||
                    f.flow_send[p].imag() > line.q_max_pu + kFeasibilityTolerance ||
                    ang > line.theta_max_rad + kFeasibilityTolerance ||
                    ang < line.theta_min_rad - kFeasibilityTolerance)
                    overloaded = true;
            }
            if (overloaded)
                for (int b : downstream_set(forest, net, f.line)) hot[b] = 1;
        }
        for (int b = 0; b < net.n_buses(); ++b) {
            const Bus& bus = net.buses[b];
            for (Phase p : kAllPhases) {
                if (!bus.phases.contains(p)) continue;
                double v = std::abs(sol.voltage[b][p]);
                if (v < bus.v_min_pu - kFeasibilityTolerance || v > bus.v_max_pu + kFeasibilityTolerance) {
                    mark_component(forest.component_root[b]);
                    break;
                }
            }
        }
        for (int r : forest.roots) {
            const Bus& bus = net.buses[r];
            for (Phase p : kAllPhases) {
                if (!bus.phases.contains(p)) continue;
                Complex inj = bus.demand_pu(p);
                for (int child : forest.children[r]) {
                    const LineFlow* out = sol.find_flow(forest.parent_line[child]);
                    if (out) inj += out->flow_send[p];
                }
                if (inj.real() > net.alpha * bus.gen_p_max_pu[p] + kFeasibilityTolerance ||
                    inj.real() < bus.gen_p_min_pu[p] - kFeasibilityTolerance ||
                    inj.imag() > net.alpha * bus.gen_q_max_pu[p] + kFeasibilityTolerance ||
                    inj.imag() < bus.gen_q_min_pu[p] - kFeasibilityTolerance) {
                    mark_component(r);
                    break;
                }
            }
        }
        bool any_hot = false;
        for (char h : hot) any_hot |= (h != 0);
        if (!any_hot)  // residual balance/ohm trouble only
            for (int r : cur.roots) mark_component(r);

        // inactive lines touching the offending set, canonical order
        std::vector<LineRef> adds;
        for (int e = 0; e < net.n_edges(); ++e) {
            const Edge& edge = net.edges[e];
            if (!hot[edge.from_idx] && !hot[edge.to_idx]) continue;
            for (const Line& l : edge.lines) {
                LineRef ref{e, l.k};
                if (!std::binary_search(cur.selected.begin(), cur.selected.end(), ref)) adds.push_back(ref);
            }
        }
        std::sort(adds.begin(), adds.end(),
                  [&](LineRef a, LineRef b) { return line_ref_less_by_ids(net, a, b); });

        // first strictly improving swap wins (canonical order keeps this
        // deterministic)
        bool improved = false;
        for (const LineRef& add : adds) {
            const Edge& edge = net.edges[add.edge];
            int u = edge.from_idx, v = edge.to_idx;

            std::vector<LineRef> removable;
            if (forest.component_root[u] == forest.component_root[v]) {
                // unique cycle: the tree path between u and v
                std::vector<char> on_u_path(net.buses.size(), 0);
                for (int b = u; b >= 0; b = forest.parent[b]) on_u_path[b] = 1;
                int lca = v;
                while (!on_u_path[lca]) lca = forest.parent[lca];
                for (int b = u; b != lca; b = forest.parent[b]) removable.push_back(forest.parent_line[b]);
                for (int b = v; b != lca; b = forest.parent[b]) removable.push_back(forest.parent_line[b]);
            } else {
                // merging two trees: any line on either root path re-splits
                for (int b = u; forest.parent[b] >= 0; b = forest.parent[b])
                    removable.push_back(forest.parent_line[b]);
                for (int b = v; forest.parent[b] >= 0; b = forest.parent[b])
                    removable.push_back(forest.parent_line[b]);
            }
            std::sort(removable.begin(), removable.end(),
                      [&](LineRef a, LineRef b) { return line_ref_less_by_ids(net, a, b); });

            for (const LineRef& rem : removable) {
                if (rem == add) continue;
                RadialConfiguration trial = cur;
                trial.selected.erase(std::find(trial.selected.begin(), trial.selected.end(), rem));
                trial.selected.push_back(add);
                trial.canonicalize();
                FeasibilityReport trial_report;
                double violation = evaluate(trial, &trial_report);
                if (violation < cur_violation - 1e-12) {
                    cur = trial;
                    cur_violation = violation;
                    cur_report = trial_report;
                    improved = true;
                    if (swap_count) ++*swap_count;
                    log::debug("rewire swap %d -> violation %.6g", iter + 1, cur_violation);
                    break;
                }
            }
            if (improved) break;
        }
        if (!improved)
            raise(ErrorKind::RepairFailed, "no strictly violation-reducing branch exchange exists");
    }
    if (cur_report.feasible) return cur;
    raise(ErrorKind::RepairFailed, "rewire budget exhausted with residual violations");
}

SolverReport forward_solve(const DistributionNetwork& net, const std::vector<int>& active_set,
                           const SolverOptions& options) {
    SolverReport report;
    report.network_name = net.name;
    report.problem = 1;
    report.mode = options.mode == SolveMode::Greedy ? "greedy" : "stochastic";
    report.seed = options.seed;
    report.active_set = active_set;
    std::sort(report.active_set.begin(), report.active_set.end());
    report.evaluations = 1;
    report.forward_runs = 1;

    auto wrap = [](const char* stage, const auto& fn) {
        try {
            return fn();
        } catch (const SolverError& e) {
            throw SolverError(e.kind(), std::string(stage) + ": " + e.what());
        }
    };

    Stopwatch watch;
    const double margin = options.loss_margin.value_or(net.loss_margin);
    Rng rng(options.seed);

    PreProcessResult reduced =
        wrap("pre_process", [&] { return pre_process(net, report.active_set); });
    report.timings_s["pre_process_s"] = watch.lap();

    PartitionState state =
        wrap("islander", [&] { return islander(net, reduced, report.active_set, margin); });
    report.timings_s["islander_s"] = watch.lap();

    wrap("growth", [&] {
        for (size_t pi = 0; pi < state.partitions.size(); ++pi) {
            Partition& part = state.partitions[pi];
            while (part.attached_count < static_cast<int>(part.buses.size())) {
                auto candidates = net_concad(net, reduced, state, static_cast<int>(pi));
                if (candidates.empty())
                    raise(ErrorKind::StrandedBuses,
                          "partition rooted at " + net.buses[part.root].id +
                              " has unattached buses with no frontier");
                try {
                    ac_sampler(candidates, net, state, static_cast<int>(pi), options, rng);
                } catch (const SolverError& e) {
                    if (e.kind() != ErrorKind::AllCandidatesInfeasible) throw;
                    // capacity-blind fallback: keep building, let rewire repair
                    std::vector<FrontierCandidate> all = candidates;
                    for (auto& c : all) c.weight = sampler_weight(c, net, state);
                    size_t pick = 0;
                    if (options.mode == SolveMode::Greedy) {
                        for (size_t i = 1; i < all.size(); ++i)
                            if (all[i].weight > all[pick].weight) pick = i;
                    } else {
                        std::vector<double> w;
                        for (auto& c : all) w.push_back(c.weight);
                        pick = rng.weighted_index(w);
                    }
                    attach_candidate(net, state, static_cast<int>(pi), all[pick]);
                    report.fallback_selections += 1;
                }
            }
        }
        return 0;
    });
    report.timings_s["growth_s"] = watch.lap();

    RadialConfiguration config;
    config.roots = report.active_set;
    for (const auto& part : state.partitions)
        for (const LineRef& ref : part.selection) config.selected.push_back(ref);
    config.canonicalize();

    OrientedForest forest = wrap("orient", [&] { return orient(config, net); });
    PowerFlowSolution solution = sweep_power_flow(net, forest, config.roots);
    FeasibilityReport feas = check_feasibility(net, config, forest, solution);
    report.timings_s["evaluate_s"] = watch.lap();

    if (!feas.feasible) {
        config = wrap("rewire", [&] { return rewire(net, config, feas, options, &report.rewire_swaps); });
        forest = orient(config, net);
        solution = sweep_power_flow(net, forest, config.roots);
        feas = check_feasibility(net, config, forest, solution);
    }
    report.timings_s["rewire_s"] = watch.lap();

    report.configuration = config;
    report.feasibility = feas;
    report.exact_loss_kw = solution.converged ? exact_loss_kw(solution, net) : 0.0;
    report.approx_loss_kw = approx_loss_kw(net, config);
    report.total_supplied_kw = solution.total_supplied_kw;
    report.loss_fraction =
        solution.total_supplied_kw > 0.0 ? report.exact_loss_kw / solution.total_supplied_kw : 0.0;
    if (report.loss_fraction > net.loss_margin)
        log::warn("loss fraction %.4f exceeds the %.2f band on %s", report.loss_fraction,
                  net.loss_margin, net.name.c_str());
    report.timings_s["total_s"] = report.timings_s["pre_process_s"] + report.timings_s["islander_s"] +
                                  report.timings_s["growth_s"] + report.timings_s["evaluate_s"] +
                                  report.timings_s["rewire_s"];
    return report;
}

}  // namespace gridforest
