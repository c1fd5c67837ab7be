#include "gridforest/network.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace gridforest {

void Line::compute_derived() {
    for (Phase p : kAllPhases) {
        if (!phases.contains(p)) {
            g[p] = b[p] = z[p] = theta[p] = 0.0;
            continue;
        }
        const double r = r_pu[p];
        const double x = x_pu[p];
        const double z2 = r * r + x * x;
        g[p] = r / z2;
        b[p] = -x / z2;
        z[p] = std::sqrt(z2);
        theta[p] = std::atan2(-x, r);
    }
}

double to_per_unit_power(double value_kva, double base_mva) {
    if (!(base_mva > 0.0)) raise(ErrorKind::NonPositiveBase, "base_mva must be > 0");
    return value_kva / (base_mva * 1000.0);
}

double to_per_unit_impedance(double value_ohm, double base_kv, double base_mva) {
    if (!(base_mva > 0.0) || !(base_kv > 0.0))
        raise(ErrorKind::NonPositiveBase, "base_kv and base_mva must be > 0");
    return value_ohm / (base_kv * base_kv / base_mva);
}

int DistributionNetwork::find_edge(const std::string& from, const std::string& to) const {
    for (int e = 0; e < n_edges(); ++e) {
        const auto& ed = edges[e];
        if ((ed.from == from && ed.to == to) || (ed.from == to && ed.to == from)) return e;
    }
    return -1;
}

void DistributionNetwork::rebuild_indexes() {
    bus_index.clear();
    for (int i = 0; i < n_buses(); ++i) bus_index[buses[i].id] = i;

    for (auto& e : edges) {
        e.from_idx = bus_idx(e.from);
        e.to_idx = bus_idx(e.to);
        for (auto& l : e.lines) l.compute_derived();
    }

    adjacency.assign(buses.size(), {});
    for (int e = 0; e < n_edges(); ++e) {
        adjacency[edges[e].from_idx].push_back(e);
        adjacency[edges[e].to_idx].push_back(e);
    }

    generator_pool.clear();
    for (int i = 0; i < n_buses(); ++i)
        if (buses[i].is_generator()) generator_pool.push_back(i);
}

void DistributionNetwork::normalize() {
    const double s = base_mva;
    for (auto& bus : buses) {
        for (Phase p : kAllPhases) {
            bus.demand_p_pu[p] = to_per_unit_power(bus.demand_kw[p], s);
            bus.demand_q_pu[p] = to_per_unit_power(bus.demand_kvar[p], s);
            bus.gen_p_max_pu[p] = to_per_unit_power(bus.gen_p_max_kw[p], s);
            bus.gen_p_min_pu[p] = to_per_unit_power(bus.gen_p_min_kw[p], s);
            bus.gen_q_max_pu[p] = to_per_unit_power(bus.gen_q_max_kvar[p], s);
            bus.gen_q_min_pu[p] = to_per_unit_power(bus.gen_q_min_kvar[p], s);
        }
    }
    for (auto& e : edges)
        for (auto& l : e.lines) {
            l.p_max_pu = to_per_unit_power(l.p_max_kw, s);
            l.q_max_pu = to_per_unit_power(l.q_max_kvar, s);
        }
}

double DistributionNetwork::total_demand_kw() const {
    double t = 0.0;
    for (const auto& b : buses) t += b.demand_kw.sum();
    return t;
}

double DistributionNetwork::total_demand_kvar() const {
    double t = 0.0;
    for (const auto& b : buses) t += b.demand_kvar.sum();
    return t;
}

double DistributionNetwork::total_generation_kw() const {
    double t = 0.0;
    for (const auto& b : buses)
        if (b.is_generator()) t += b.gen_p_max_kw.sum();
    return t;
}

double DistributionNetwork::scalar_demand_pu(int bus) const {
    const auto& b = buses[bus];
    double s = 0.0;
    for (Phase p : kAllPhases)
        if (b.phases.contains(p)) s += b.demand_p_pu[p] + b.demand_q_pu[p];
    return s;
}

double DistributionNetwork::scalar_capacity_pu(int bus) const {
    const auto& b = buses[bus];
    double s = 0.0;
    for (Phase p : kAllPhases)
        if (b.phases.contains(p)) s += b.gen_p_max_pu[p] + std::max(b.gen_q_max_pu[p], 0.0);
    return alpha * s;
}

std::vector<Issue> validate_network(const DistributionNetwork& net) {
    std::vector<Issue> issues;

    for (size_t i = 0; i < net.buses.size(); ++i) {
        const auto& b = net.buses[i];
        const std::string path = "buses[" + std::to_string(i) + "]";
        if (b.v_min_pu > b.v_max_pu)
            issues.push_back({Issue::Code::VoltageBoundsInverted, path + ".v_min_pu",
                              b.id + ": v_min > v_max"});
        for (Phase p : kAllPhases) {
            // capacitive (negative kvar) demand is allowed; real demand is not
            if (b.demand_kw[p] < 0.0) {
                issues.push_back({Issue::Code::NegativeDemand, path + ".demand_kw",
                                  b.id + ": negative real demand"});
                break;
            }
        }
        if (b.phases.empty())
            issues.push_back({Issue::Code::PhaseMismatch, path + ".phases", b.id + ": empty phase set"});
    }

    for (size_t e = 0; e < net.edges.size(); ++e) {
        const auto& ed = net.edges[e];
        const std::string path = "edges[" + std::to_string(e) + "]";
        const PhaseSet from_ph = net.buses[ed.from_idx].phases;
        const PhaseSet to_ph = net.buses[ed.to_idx].phases;
        for (size_t li = 0; li < ed.lines.size(); ++li) {
            const auto& l = ed.lines[li];
            const std::string lpath = path + ".lines[" + std::to_string(li) + "]";
            if (!from_ph.contains_all(l.phases) || !to_ph.contains_all(l.phases))
                issues.push_back({Issue::Code::PhaseMismatch, lpath + ".phases",
                                  ed.from + "-" + ed.to + ": line phases not a subset of both endpoints"});
            for (Phase p : kAllPhases) {
                if (!l.phases.contains(p)) continue;
                if (l.r_pu[p] < 0.0)
                    issues.push_back({Issue::Code::NegativeResistance, lpath + ".r",
                                      ed.from + "-" + ed.to + ": R < 0"});
                if (!(l.z[p] > 0.0))
                    issues.push_back({Issue::Code::ZeroImpedance, lpath,
                                      ed.from + "-" + ed.to + ": |Z| must be > 0"});
            }
            if (!(l.p_max_kw > 0.0) || !(l.q_max_kvar > 0.0))
                issues.push_back({Issue::Code::NonPositiveCapacity, lpath + ".p_max_kw",
                                  ed.from + "-" + ed.to + ": capacities must be > 0"});
            if (l.theta_min_rad > l.theta_max_rad)
                issues.push_back({Issue::Code::AngleBoundsInverted, lpath + ".theta_min_rad",
                                  ed.from + "-" + ed.to + ": theta_min > theta_max"});
        }
    }

    if (net.generator_pool.empty())
        issues.push_back({Issue::Code::NoGenerators, "buses", "no generator buses"});

    // aggregate necessary condition: alpha-adjusted generation covers demand
    const double gen = net.alpha * net.total_generation_kw();
    const double dem = net.total_demand_kw();
    if (dem > gen)
        issues.push_back({Issue::Code::InsufficientGeneration, "buses",
                          "total demand " + std::to_string(dem) + " kW exceeds alpha-adjusted generation " +
                              std::to_string(gen) + " kW"});

    // undirected connectivity
    if (!net.buses.empty()) {
        std::vector<char> seen(net.buses.size(), 0);
        std::deque<int> queue{0};
        seen[0] = 1;
        while (!queue.empty()) {
            int u = queue.front();
            queue.pop_front();
            for (int e : net.adjacency[u]) {
                int v = net.edges[e].other(u);
                if (!seen[v]) {
                    seen[v] = 1;
                    queue.push_back(v);
                }
            }
        }
        if (std::find(seen.begin(), seen.end(), 0) != seen.end())
            issues.push_back({Issue::Code::DisconnectedGraph, "edges", "graph is not connected"});
    }

    return issues;
}

}  // namespace gridforest
