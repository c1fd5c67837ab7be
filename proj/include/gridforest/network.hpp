#pragma once

#include <map>
#include <string>
#include <vector>

#include "gridforest/errors.hpp"
#include "gridforest/types.hpp"

namespace gridforest {

enum class BusKind { Generator, Consumer };

struct Bus {
    std::string id;
    BusKind kind = BusKind::Consumer;
    PhaseSet phases = PhaseSet::all();

    // file-facing values (kW / kvar), preserved verbatim for round-trips
    PerPhase<double> demand_kw{};
    PerPhase<double> demand_kvar{};
    PerPhase<double> gen_p_max_kw{};
    PerPhase<double> gen_p_min_kw{};
    PerPhase<double> gen_q_max_kvar{};
    PerPhase<double> gen_q_min_kvar{};
    double v_min_pu = 0.9;
    double v_max_pu = 1.1;

    // derived p.u. values, populated at load
    PerPhase<double> demand_p_pu{};
    PerPhase<double> demand_q_pu{};
    PerPhase<double> gen_p_max_pu{};
    PerPhase<double> gen_p_min_pu{};
    PerPhase<double> gen_q_max_pu{};
    PerPhase<double> gen_q_min_pu{};

    Complex demand_pu(Phase p) const { return {demand_p_pu[p], demand_q_pu[p]}; }
    bool is_generator() const { return kind == BusKind::Generator; }
};

struct Line {
    int k = 1;
    PhaseSet phases = PhaseSet::all();

    // per-phase impedance, p.u. after load
    PerPhase<double> r_pu{};
    PerPhase<double> x_pu{};

    // derived per-phase quantities: G = R/(R^2+X^2), B = -X/(R^2+X^2),
    // Z = sqrt(R^2+X^2), theta = atan2(-X, R)
    PerPhase<double> g{};
    PerPhase<double> b{};
    PerPhase<double> z{};
    PerPhase<double> theta{};

    double p_max_kw = 0.0;
    double q_max_kvar = 0.0;
    double theta_min_rad = -kPi / 6;
    double theta_max_rad = kPi / 6;

    double p_max_pu = 0.0;
    double q_max_pu = 0.0;

    double cos2_theta(Phase p) const { return (r_pu[p] * r_pu[p]) / (z[p] * z[p]); }

    /// R^3/Z^2 loss coefficient of the approximate objective.
    double loss_coeff(Phase p) const {
        return (r_pu[p] * r_pu[p] * r_pu[p]) / (z[p] * z[p]);
    }

    double loss_coeff_sum() const {
        double s = 0.0;
        for (Phase p : kAllPhases)
            if (phases.contains(p)) s += loss_coeff(p);
        return s;
    }

    /// Mean of R/Z over the line's phases; the electrical-distance metric.
    double rz_mean() const {
        double s = 0.0;
        int n = 0;
        for (Phase p : kAllPhases) {
            if (!phases.contains(p)) continue;
            s += r_pu[p] / z[p];
            ++n;
        }
        return n > 0 ? s / n : 0.0;
    }

    void compute_derived();
};

struct Edge {
    std::string from;
    std::string to;
    int from_idx = -1;
    int to_idx = -1;
    std::vector<Line> lines;

    const Line* find_line(int k) const {
        for (const auto& l : lines)
            if (l.k == k) return &l;
        return nullptr;
    }

    int other(int bus_idx) const { return bus_idx == from_idx ? to_idx : from_idx; }
};

/// Immutable multi-phase distribution network. All electrical quantities are
/// normalized to per-unit at load time; safe to share across solver threads.
struct DistributionNetwork {
    std::string name;
    double base_kv = 1.0;
    double base_mva = 1.0;
    double alpha = 1.0;
    double loss_margin = 0.20;

    std::vector<Bus> buses;
    std::vector<Edge> edges;

    std::map<std::string, int> bus_index;
    std::vector<std::vector<int>> adjacency;  // bus idx -> incident edge idxs
    std::vector<int> generator_pool;          // bus idxs, sorted

    double s_base_kw() const { return base_mva * 1000.0; }
    double z_base_ohm() const { return base_kv * base_kv / base_mva; }

    int n_buses() const { return static_cast<int>(buses.size()); }
    int n_edges() const { return static_cast<int>(edges.size()); }
    int n_generators() const { return static_cast<int>(generator_pool.size()); }

    int bus_idx(const std::string& id) const {
        auto it = bus_index.find(id);
        if (it == bus_index.end()) raise(ErrorKind::UnknownBus, "no bus named '" + id + "'");
        return it->second;
    }

    const Line& line(LineRef ref) const {
        if (ref.edge < 0 || ref.edge >= n_edges())
            raise(ErrorKind::UnknownEdge, "edge index out of range");
        const Line* l = edges[ref.edge].find_line(ref.k);
        if (!l) raise(ErrorKind::UnknownEdge, "edge has no line k=" + std::to_string(ref.k));
        return *l;
    }

    int find_edge(const std::string& from, const std::string& to) const;

    /// Rebuild bus_index, adjacency, generator_pool and per-line derived
    /// values. Call after mutating buses or edges.
    void rebuild_indexes();

    /// Populate p.u. fields from the kW/kvar fields and the bases.
    void normalize();

    double total_demand_kw() const;
    double total_demand_kvar() const;
    double total_generation_kw() const;

    /// Scalar demand metric used by the construction heuristics: per-phase
    /// real plus reactive magnitude, summed over phases, in p.u.
    double scalar_demand_pu(int bus) const;
    double scalar_capacity_pu(int bus) const;  // alpha-adjusted
};

/// kVA (or kW/kvar) -> p.u.
double to_per_unit_power(double value_kva, double base_mva);

/// ohm -> p.u. on the base impedance base_kv^2 / base_mva.
double to_per_unit_impedance(double value_ohm, double base_kv, double base_mva);

/// Semantic checks beyond load-time structure: bound ordering, sign
/// constraints, connectivity, aggregate generation capacity. Returns an
/// empty vector when the network is healthy.
std::vector<Issue> validate_network(const DistributionNetwork& net);

}  // namespace gridforest
