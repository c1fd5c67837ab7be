#include "gridforest/power_eval.hpp"

#include <algorithm>
#include <cmath>

namespace gridforest {

const char* constraint_family_name(ConstraintFamily f) {
    switch (f) {
        case ConstraintFamily::Balance: return "balance";
        case ConstraintFamily::Ohm: return "ohm";
        case ConstraintFamily::Voltage: return "voltage";
        case ConstraintFamily::LineP: return "line_p";
        case ConstraintFamily::LineQ: return "line_q";
        case ConstraintFamily::NodeP: return "node_p";
        case ConstraintFamily::NodeQ: return "node_q";
        case ConstraintFamily::Angle: return "angle";
    }
    return "?";
}

namespace {

std::string line_label(const DistributionNetwork& net, LineRef ref) {
    const Edge& e = net.edges[ref.edge];
    return e.from + "-" + e.to + "[" + std::to_string(ref.k) + "]";
}

void record(FeasibilityReport& report, ConstraintFamily family, double violation, const std::string& element) {
    if (violation <= 0.0) return;
    report.total_violation += violation;
    auto& entry = report.entry(family);
    if (violation > entry.worst_violation) {
        entry.worst_violation = violation;
        entry.element = element;
    }
}

/// Demand served through the lines: base demand at every non-root bus
/// (inactive pool generators included, per their base load), zero at roots.
Complex served_demand(const DistributionNetwork& net, const OrientedForest& forest, int bus, Phase p) {
    if (forest.is_root(bus)) return {0.0, 0.0};
    return net.buses[bus].demand_pu(p);
}

}  // namespace

PowerFlowSolution sweep_power_flow(const DistributionNetwork& net, const OrientedForest& forest,
                                   const std::vector<int>& active_set) {
    for (int root : forest.roots)
        if (std::find(active_set.begin(), active_set.end(), root) == active_set.end())
            raise(ErrorKind::NotRadial, "component root " + net.buses[root].id + " is not in the active set");

    const int n = net.n_buses();
    PowerFlowSolution sol;
    sol.voltage.assign(n, {});
    for (int b = 0; b < n; ++b)
        for (Phase p : kAllPhases) sol.voltage[b][p] = nominal_voltage(p);

    // buses by decreasing depth for the backward pass
    std::vector<int> order(n);
    for (int b = 0; b < n; ++b) order[b] = b;
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return forest.depth[a] != forest.depth[b] ? forest.depth[a] > forest.depth[b] : a < b; });

    // per-bus accumulated current into the parent link
    std::vector<PerPhase<Complex>> up_current(n);

    auto line_of = [&](int bus) -> const Line& { return net.line(forest.parent_line[bus]); };

    for (sol.iterations = 1; sol.iterations <= kSweepMaxIterations; ++sol.iterations) {
        // backward: accumulate load + child currents toward the roots
        for (auto& c : up_current) c = {};
        for (int b : order) {
            if (forest.is_root(b)) continue;
            const Line& line = line_of(b);
            PerPhase<Complex> flow_up{};
            for (Phase p : kAllPhases) {
                if (!line.phases.contains(p)) continue;
                Complex v = sol.voltage[b][p];
                Complex demand = served_demand(net, forest, b, p);
                Complex load_current = (std::abs(v) > 1e-12) ? std::conj(demand / v) : Complex{0.0, 0.0};
                flow_up[p] = load_current;
            }
            for (int child : forest.children[b]) {
                const Line& cl = line_of(child);
                for (Phase p : kAllPhases)
                    if (cl.phases.contains(p) && line.phases.contains(p)) flow_up[p] += up_current[child][p];
            }
            up_current[b] = flow_up;
        }

        // forward: propagate voltage drops away from the roots
        for (auto it = order.rbegin(); it != order.rend(); ++it) {
            int b = *it;
            if (forest.is_root(b)) {
                for (Phase p : kAllPhases) sol.voltage[b][p] = nominal_voltage(p);
                continue;
            }
            const Line& line = line_of(b);
            int parent = forest.parent[b];
            for (Phase p : kAllPhases) {
                if (!line.phases.contains(p)) continue;
                Complex z{line.r_pu[p], line.x_pu[p]};
                sol.voltage[b][p] = sol.voltage[parent][p] - z * up_current[b][p];
            }
        }

        // per-bus complex-power mismatch with the current iterate
        double mismatch = 0.0;
        for (int b = 0; b < n; ++b) {
            if (forest.is_root(b)) continue;
            const Line& line = line_of(b);
            for (Phase p : kAllPhases) {
                if (!net.buses[b].phases.contains(p)) continue;
                Complex inflow = line.phases.contains(p)
                                     ? sol.voltage[b][p] * std::conj(up_current[b][p])
                                     : Complex{0.0, 0.0};
                Complex outflow{0.0, 0.0};
                for (int child : forest.children[b]) {
                    const Line& cl = line_of(child);
                    if (cl.phases.contains(p)) outflow += sol.voltage[b][p] * std::conj(up_current[child][p]);
                }
                Complex demand = served_demand(net, forest, b, p);
                mismatch = std::max(mismatch, std::abs(inflow - outflow - demand));
            }
        }
        sol.max_mismatch_pu = mismatch;
        if (mismatch < kSweepTolerance) {
            sol.converged = true;
            break;
        }
    }
    if (sol.iterations > kSweepMaxIterations) sol.iterations = kSweepMaxIterations;

    // assemble per-line flows in canonical (edge, k) order
    std::vector<int> flow_buses;
    for (int b = 0; b < n; ++b)
        if (!forest.is_root(b)) flow_buses.push_back(b);
    std::sort(flow_buses.begin(), flow_buses.end(),
              [&](int a, int b) { return forest.parent_line[a] < forest.parent_line[b]; });

    double loss_pu = 0.0;
    for (int b : flow_buses) {
        const Line& line = line_of(b);
        LineFlow lf;
        lf.line = forest.parent_line[b];
        lf.parent_bus = forest.parent[b];
        lf.child_bus = b;
        for (Phase p : kAllPhases) {
            if (!line.phases.contains(p)) continue;
            Complex i = up_current[b][p];
            lf.current[p] = i;
            lf.flow_send[p] = sol.voltage[lf.parent_bus][p] * std::conj(i);
            lf.flow_recv[p] = sol.voltage[b][p] * std::conj(i);
            loss_pu += line.r_pu[p] * std::norm(i);
        }
        sol.flows.push_back(std::move(lf));
    }
    sol.total_loss_kw = loss_pu * net.s_base_kw();

    double supplied_pu = 0.0;
    for (int root : forest.roots) {
        for (Phase p : kAllPhases)
            if (net.buses[root].phases.contains(p)) supplied_pu += net.buses[root].demand_p_pu[p];
        for (int child : forest.children[root]) {
            const Line& cl = line_of(child);
            for (Phase p : kAllPhases)
                if (cl.phases.contains(p))
                    supplied_pu += (sol.voltage[root][p] * std::conj(up_current[child][p])).real();
        }
    }
    sol.total_supplied_kw = supplied_pu * net.s_base_kw();
    return sol;
}

double exact_loss_kw(const PowerFlowSolution& solution, const DistributionNetwork& net) {
    if (!solution.converged) raise(ErrorKind::NotConverged, "power flow did not converge");
    double loss_pu = 0.0;
    for (const auto& f : solution.flows) {
        const Line& line = net.line(f.line);
        for (Phase p : kAllPhases) {
            if (!line.phases.contains(p)) continue;
            loss_pu += line.r_pu[p] * std::norm(f.current[p]) * line.cos2_theta(p);
        }
    }
    return loss_pu * net.s_base_kw();
}

double approx_loss_kw(const DistributionNetwork& net, const RadialConfiguration& config) {
    OrientedForest forest = orient(config, net);  // throws NotRadial

    // path attribution: each bus's demand loads every line on its root path
    std::vector<PerPhase<double>> line_p(config.selected.size());
    std::vector<PerPhase<double>> line_q(config.selected.size());
    std::vector<LineRef> refs = config.selected;
    auto index_of = [&](LineRef ref) {
        return static_cast<size_t>(std::lower_bound(refs.begin(), refs.end(), ref) - refs.begin());
    };

    for (int b = 0; b < net.n_buses(); ++b) {
        if (forest.is_root(b)) continue;
        for (int cur = b; forest.parent[cur] >= 0; cur = forest.parent[cur]) {
            size_t idx = index_of(forest.parent_line[cur]);
            for (Phase p : kAllPhases) {
                line_p[idx][p] += net.buses[b].demand_p_pu[p];
                line_q[idx][p] += net.buses[b].demand_q_pu[p];
            }
        }
    }

    double loss_pu = 0.0;
    for (size_t i = 0; i < refs.size(); ++i) {
        const Line& line = net.line(refs[i]);
        for (Phase p : kAllPhases) {
            if (!line.phases.contains(p)) continue;
            loss_pu += line.loss_coeff(p) * (line_p[i][p] * line_p[i][p] + line_q[i][p] * line_q[i][p]);
        }
    }
    return loss_pu * net.s_base_kw();
}

double surrogate_loss_kw(const DistributionNetwork& net, const RadialConfiguration& partial) {
    if (partial.selected.empty()) return 0.0;
    for (const LineRef& ref : partial.selected) net.line(ref);

    const int n = net.n_buses();

    // acyclicity over the partial selection
    std::vector<int> dsu(n);
    for (int b = 0; b < n; ++b) dsu[b] = b;
    auto find = [&](int x) {
        while (dsu[x] != x) x = dsu[x] = dsu[dsu[x]];
        return x;
    };
    for (const LineRef& ref : partial.selected) {
        const Edge& e = net.edges[ref.edge];
        int a = find(e.from_idx), b = find(e.to_idx);
        if (a == b) raise(ErrorKind::NotForest, "partial configuration contains a cycle");
        dsu[b] = a;
    }
    std::vector<int> roots_per_comp(n, 0);
    for (int r : partial.roots) roots_per_comp[find(r)] += 1;
    for (int b = 0; b < n; ++b)
        if (roots_per_comp[find(b)] > 1) raise(ErrorKind::NotForest, "component contains more than one root");

    std::vector<std::vector<std::pair<int, LineRef>>> adj(n);
    for (const LineRef& ref : partial.selected) {
        const Edge& e = net.edges[ref.edge];
        adj[e.from_idx].push_back({e.to_idx, ref});
        adj[e.to_idx].push_back({e.from_idx, ref});
    }

    // orient each component at its root (or its smallest bus when rootless)
    std::vector<char> is_root(n, 0);
    for (int r : partial.roots) is_root[r] = 1;
    std::vector<int> start_order;
    for (int b = 0; b < n; ++b)
        if (is_root[b]) start_order.push_back(b);
    for (int b = 0; b < n; ++b) start_order.push_back(b);

    std::vector<int> parent(n, -2);  // -2 unvisited, -1 orientation root
    std::vector<LineRef> parent_line(n);
    std::vector<int> topo;
    for (int start : start_order) {
        if (parent[start] != -2) continue;
        parent[start] = -1;
        std::vector<int> stack{start};
        while (!stack.empty()) {
            int u = stack.back();
            stack.pop_back();
            topo.push_back(u);
            for (const auto& [v, ref] : adj[u]) {
                if (parent[v] != -2) continue;
                parent[v] = u;
                parent_line[v] = ref;
                stack.push_back(v);
            }
        }
    }

    // children-first accumulation of downstream demand per line
    std::vector<PerPhase<double>> acc_p(n), acc_q(n);
    for (int b = 0; b < n; ++b)
        for (Phase p : kAllPhases) {
            acc_p[b][p] = net.buses[b].demand_p_pu[p];
            acc_q[b][p] = net.buses[b].demand_q_pu[p];
        }
    double loss_pu = 0.0;
    for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
        int b = *it;
        if (parent[b] < 0) continue;
        const Line& line = net.line(parent_line[b]);
        for (Phase p : kAllPhases) {
            if (!line.phases.contains(p)) continue;
            loss_pu += line.loss_coeff(p) * (acc_p[b][p] * acc_p[b][p] + acc_q[b][p] * acc_q[b][p]);
        }
        for (Phase p : kAllPhases) {
            acc_p[parent[b]][p] += acc_p[b][p];
            acc_q[parent[b]][p] += acc_q[b][p];
        }
    }
    return loss_pu * net.s_base_kw();
}

FeasibilityReport check_feasibility(const DistributionNetwork& net, const RadialConfiguration& config,
                                    const OrientedForest& forest, const PowerFlowSolution& solution) {
    FeasibilityReport report;
    (void)config;

    if (!solution.converged)
        record(report, ConstraintFamily::Balance, std::max(solution.max_mismatch_pu, 1.0), "not converged");

    // (2b) power balance at every non-root bus, receiving-end inflow vs
    // sending-end outflows and demand
    for (int b = 0; b < net.n_buses(); ++b) {
        if (forest.is_root(b) || forest.component_root[b] < 0) continue;
        const LineFlow* in = solution.find_flow(forest.parent_line[b]);
        if (!in) continue;
        for (Phase p : kAllPhases) {
            if (!net.buses[b].phases.contains(p)) continue;
            Complex inflow = in->flow_recv[p];
            Complex outflow{0.0, 0.0};
            for (int child : forest.children[b]) {
                const LineFlow* out = solution.find_flow(forest.parent_line[child]);
                if (out) outflow += out->flow_send[p];
            }
            double resid = std::abs(inflow - outflow - net.buses[b].demand_pu(p));
            record(report, ConstraintFamily::Balance, resid - report.tolerance > 0 ? resid : 0.0,
                   net.buses[b].id + ":" + phase_char(p));
        }
    }

    // (2c) Ohm's law residual per selected line and phase
    for (const auto& f : solution.flows) {
        const Line& line = net.line(f.line);
        for (Phase p : kAllPhases) {
            if (!line.phases.contains(p)) continue;
            Complex y{line.g[p], line.b[p]};
            Complex expect = y * (solution.voltage[f.parent_bus][p] - solution.voltage[f.child_bus][p]);
            double resid = std::abs(f.current[p] - expect);
            record(report, ConstraintFamily::Ohm, resid > report.tolerance ? resid : 0.0,
                   line_label(net, f.line) + ":" + phase_char(p));
        }
    }

    // (2d) voltage magnitude bounds
    for (int b = 0; b < net.n_buses(); ++b) {
        const Bus& bus = net.buses[b];
        for (Phase p : kAllPhases) {
            if (!bus.phases.contains(p)) continue;
            double v = std::abs(solution.voltage[b][p]);
            record(report, ConstraintFamily::Voltage, bus.v_min_pu - v, bus.id + ":" + phase_char(p));
            record(report, ConstraintFamily::Voltage, v - bus.v_max_pu, bus.id + ":" + phase_char(p));
        }
    }

    // (2e)-(2f) line capacities on selected lines, sending end
    for (const auto& f : solution.flows) {
        const Line& line = net.line(f.line);
        for (Phase p : kAllPhases) {
            if (!line.phases.contains(p)) continue;
            record(report, ConstraintFamily::LineP, f.flow_send[p].real() - line.p_max_pu,
                   line_label(net, f.line) + ":" + phase_char(p));
            record(report, ConstraintFamily::LineQ, f.flow_send[p].imag() - line.q_max_pu,
                   line_label(net, f.line) + ":" + phase_char(p));
        }
    }

    // (2g)-(2h) injection bounds at the active roots
    for (int root : forest.roots) {
        const Bus& bus = net.buses[root];
        for (Phase p : kAllPhases) {
            if (!bus.phases.contains(p)) continue;
            Complex inj = bus.demand_pu(p);
            for (int child : forest.children[root]) {
                const LineFlow* out = solution.find_flow(forest.parent_line[child]);
                if (out) inj += out->flow_send[p];
            }
            record(report, ConstraintFamily::NodeP, inj.real() - net.alpha * bus.gen_p_max_pu[p],
                   bus.id + ":" + phase_char(p));
            record(report, ConstraintFamily::NodeP, bus.gen_p_min_pu[p] - inj.real(),
                   bus.id + ":" + phase_char(p));
            record(report, ConstraintFamily::NodeQ, inj.imag() - net.alpha * bus.gen_q_max_pu[p],
                   bus.id + ":" + phase_char(p));
            record(report, ConstraintFamily::NodeQ, bus.gen_q_min_pu[p] - inj.imag(),
                   bus.id + ":" + phase_char(p));
        }
    }

    // (2i) phase-angle difference bounds on selected lines
    for (const auto& f : solution.flows) {
        const Line& line = net.line(f.line);
        const Edge& e = net.edges[f.line.edge];
        for (Phase p : kAllPhases) {
            if (!line.phases.contains(p)) continue;
            double ang = std::arg(solution.voltage[e.from_idx][p] * std::conj(solution.voltage[e.to_idx][p]));
            record(report, ConstraintFamily::Angle, ang - line.theta_max_rad,
                   line_label(net, f.line) + ":" + phase_char(p));
            record(report, ConstraintFamily::Angle, line.theta_min_rad - ang,
                   line_label(net, f.line) + ":" + phase_char(p));
        }
    }

    report.feasible = true;
    for (const auto& entry : report.entries)
        if (entry.worst_violation > report.tolerance) report.feasible = false;
    return report;
}

}  // namespace gridforest
