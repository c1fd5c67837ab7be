#pragma once

#include <string>
#include <vector>

#include "gridforest/network.hpp"
#include "gridforest/radial.hpp"
#include "gridforest/rng.hpp"

namespace gridforest::testing {

/// Programmatic network construction for fixtures. Values in kW/kvar and
/// p.u. impedances on base_mva = 1, base_kv = 1 unless overridden.
class NetworkBuilder {
  public:
    explicit NetworkBuilder(std::string name) { net_.name = std::move(name); }

    NetworkBuilder& bases(double kv, double mva) {
        net_.base_kv = kv;
        net_.base_mva = mva;
        return *this;
    }

    NetworkBuilder& alpha(double a) {
        net_.alpha = a;
        return *this;
    }

    NetworkBuilder& generator(const std::string& id, double p_max_kw, double q_max_kvar,
                              PhaseSet phases = PhaseSet::all(), double v_min = 0.8, double v_max = 1.2) {
        Bus b;
        b.id = id;
        b.kind = BusKind::Generator;
        b.phases = phases;
        b.v_min_pu = v_min;
        b.v_max_pu = v_max;
        for (Phase p : kAllPhases) {
            if (!phases.contains(p)) continue;
            b.gen_p_max_kw[p] = p_max_kw;
            b.gen_q_max_kvar[p] = q_max_kvar;
            b.gen_q_min_kvar[p] = -q_max_kvar;
        }
        net_.buses.push_back(std::move(b));
        return *this;
    }

    NetworkBuilder& consumer(const std::string& id, double demand_kw, double demand_kvar,
                             PhaseSet phases = PhaseSet::all(), double v_min = 0.8, double v_max = 1.2) {
        Bus b;
        b.id = id;
        b.kind = BusKind::Consumer;
        b.phases = phases;
        b.v_min_pu = v_min;
        b.v_max_pu = v_max;
        for (Phase p : kAllPhases) {
            if (!phases.contains(p)) continue;
            b.demand_kw[p] = demand_kw;
            b.demand_kvar[p] = demand_kvar;
        }
        net_.buses.push_back(std::move(b));
        return *this;
    }

    NetworkBuilder& line(const std::string& from, const std::string& to, double r_pu, double x_pu,
                         double p_max_kw = 1e7, double q_max_kvar = 1e7, int k = 1,
                         PhaseSet phases = PhaseSet::all()) {
        int e = -1;
        for (size_t i = 0; i < net_.edges.size(); ++i)
            if (net_.edges[i].from == from && net_.edges[i].to == to) e = static_cast<int>(i);
        if (e < 0) {
            Edge edge;
            edge.from = from;
            edge.to = to;
            net_.edges.push_back(std::move(edge));
            e = static_cast<int>(net_.edges.size()) - 1;
        }
        Line l;
        l.k = k;
        l.phases = phases;
        for (Phase p : kAllPhases) {
            l.r_pu[p] = r_pu;
            l.x_pu[p] = x_pu;
        }
        l.p_max_kw = p_max_kw;
        l.q_max_kvar = q_max_kvar;
        net_.edges[e].lines.push_back(std::move(l));
        return *this;
    }

    DistributionNetwork build() {
        net_.rebuild_indexes();
        net_.normalize();
        return net_;
    }

  private:
    DistributionNetwork net_;
};

inline RadialConfiguration make_config(const DistributionNetwork& net,
                                       const std::vector<std::tuple<std::string, std::string, int>>& lines,
                                       const std::vector<std::string>& roots) {
    RadialConfiguration c;
    for (const auto& [from, to, k] : lines) c.selected.push_back({net.find_edge(from, to), k});
    for (const auto& r : roots) c.roots.push_back(net.bus_idx(r));
    c.canonicalize();
    return c;
}

/// Single-phase two-bus fixture: R = X = 0.01 p.u., load 1.0 + j0 p.u.
inline DistributionNetwork two_bus() {
    return NetworkBuilder("two_bus")
        .generator("g1", 2000.0, 2000.0, PhaseSet::single(Phase::A))
        .consumer("b2", 1000.0, 0.0, PhaseSet::single(Phase::A))
        .line("g1", "b2", 0.01, 0.01, 3000.0, 3000.0)
        .build();
}

/// Triangle with per-edge resistances, generator opposite the loads.
inline DistributionNetwork triangle(double r1 = 0.01, double r2 = 0.02, double r3 = 0.03) {
    return NetworkBuilder("triangle")
        .generator("g1", 5000.0, 5000.0)
        .consumer("b2", 300.0, 100.0)
        .consumer("b3", 400.0, 120.0)
        .line("g1", "b2", r1, 0.01)
        .line("b2", "b3", r2, 0.01)
        .line("g1", "b3", r3, 0.01)
        .build();
}

/// Three-bus path g1 - b2 - b3.
inline DistributionNetwork path3() {
    return NetworkBuilder("path3")
        .generator("g1", 5000.0, 5000.0)
        .consumer("b2", 200.0, 50.0)
        .consumer("b3", 300.0, 80.0)
        .line("g1", "b2", 0.01, 0.01)
        .line("b2", "b3", 0.02, 0.01)
        .build();
}

/// Diamond g1 - {a, b} - c; the g1-a-c side is cheap but capacity-tight.
inline DistributionNetwork diamond(double ac_cap_kw) {
    return NetworkBuilder("diamond")
        .generator("g1", 9000.0, 9000.0)
        .consumer("a", 100.0, 20.0)
        .consumer("b", 100.0, 20.0)
        .consumer("c", 900.0, 200.0)
        .line("g1", "a", 0.005, 0.005, 5000.0, 5000.0)
        .line("g1", "b", 0.02, 0.02, 5000.0, 5000.0)
        .line("a", "c", 0.005, 0.005, ac_cap_kw, 5000.0)
        .line("b", "c", 0.02, 0.02, 5000.0, 5000.0)
        .build();
}

/// Two generators at the ends of a path; g2 is nearer to the heavy bus but
/// can be given too little capacity for it.
inline DistributionNetwork barbell(double g2_cap_kw) {
    return NetworkBuilder("barbell")
        .generator("g1", 9000.0, 9000.0)
        .consumer("a", 100.0, 30.0)
        .consumer("b", 1500.0, 450.0)
        .generator("g2", g2_cap_kw, g2_cap_kw)
        .line("g1", "a", 0.01, 0.01)
        .line("a", "b", 0.01, 0.01)
        .line("b", "g2", 0.005, 0.005)
        .build();
}

/// Six-bus fixture with three generators for Problem-2 tests. The pool
/// generator g2 sits next to the heavy load but has little capacity.
inline DistributionNetwork tiny6() {
    return NetworkBuilder("tiny6")
        .generator("g1", 4000.0, 3000.0)
        .generator("g2", 260.0, 200.0)
        .generator("g3", 2500.0, 2000.0)
        .consumer("c1", 700.0, 210.0)
        .consumer("c2", 250.0, 70.0)
        .consumer("c3", 180.0, 40.0)
        .line("g1", "c1", 0.02, 0.015)
        .line("c1", "c2", 0.015, 0.012)
        .line("c2", "g2", 0.008, 0.008)
        .line("c2", "c3", 0.02, 0.015)
        .line("c3", "g3", 0.01, 0.01)
        .line("g1", "c3", 0.03, 0.02)
        .line("g2", "c1", 0.012, 0.01)
        .build();
}

/// Ten-bus ring, every bus a generator (for subset-count checks).
inline DistributionNetwork ring10() {
    NetworkBuilder b("ring10");
    for (int i = 0; i < 10; ++i)
        b.generator("g" + std::to_string(i), 2000.0, 1500.0);
    for (int i = 0; i < 10; ++i) {
        std::string from = "g" + std::to_string(i);
        std::string to = "g" + std::to_string((i + 1) % 10);
        b.line(from, to, 0.01 + 0.001 * i, 0.01);
    }
    return b.build();
}

/// Seeded random tiny network: N <= 8, m <= 12, K <= 2, one to three
/// generators, moderate impedances, occasionally tight line capacities.
inline DistributionNetwork random_tiny(uint64_t seed) {
    Rng rng(seed);
    const int n = 4 + static_cast<int>(rng.next_below(5));      // 4..8 buses
    const int n_gen = 1 + static_cast<int>(rng.next_below(3));  // 1..3 generators

    NetworkBuilder b("tiny-" + std::to_string(seed));
    double total_demand = 0.0;
    std::vector<double> demand(n, 0.0);
    for (int i = 0; i < n; ++i) {
        if (i < n_gen) continue;
        if (rng.next_double() < 0.15) continue;  // pass-through node
        demand[i] = rng.uniform(50.0, 350.0);
        total_demand += demand[i];
    }
    for (int i = 0; i < n; ++i) {
        std::string id = (i < n_gen ? "g" : "c") + std::to_string(i);
        if (i < n_gen)
            b.generator(id, 1.6 * total_demand / n_gen + 200.0, 1.2 * total_demand / n_gen + 200.0);
        else
            b.consumer(id, demand[i], demand[i] * rng.uniform(0.2, 0.4));
    }
    auto id_of = [&](int i) { return (i < n_gen ? "g" : "c") + std::to_string(i); };

    // random spanning tree first, then extra edges up to m <= 12
    std::vector<std::pair<int, int>> pairs;
    for (int i = 1; i < n; ++i)
        pairs.push_back({static_cast<int>(rng.next_below(static_cast<uint64_t>(i))), i});
    int extra = static_cast<int>(rng.next_below(4));
    for (int t = 0; t < extra && static_cast<int>(pairs.size()) < 12; ++t) {
        int u = static_cast<int>(rng.next_below(static_cast<uint64_t>(n)));
        int v = static_cast<int>(rng.next_below(static_cast<uint64_t>(n)));
        if (u == v) continue;
        auto pr = std::minmax(u, v);
        bool dup = false;
        for (auto& existing : pairs)
            if (existing == std::make_pair(pr.first, pr.second)) dup = true;
        if (!dup) pairs.push_back({pr.first, pr.second});
    }

    for (const auto& [u, v] : pairs) {
        int lines = rng.next_double() < 0.3 ? 2 : 1;
        for (int k = 1; k <= lines; ++k) {
            double r = rng.uniform(0.005, 0.03);
            double x = rng.uniform(0.005, 0.03);
            // occasionally tight capacity to exercise the repair path
            double cap = rng.next_double() < 0.25 ? rng.uniform(0.6, 1.2) * std::max(200.0, total_demand * 0.5)
                                                  : 4.0 * total_demand + 500.0;
            b.line(id_of(u), id_of(v), r, x, cap, cap, k);
        }
    }
    return b.build();
}

/// Seeded random fixture for generator-selection tests: N <= 8, single
/// lines, 3..6 generators with uneven capacities so subset choice matters.
inline DistributionNetwork random_tiny_pool(uint64_t seed) {
    Rng rng(seed);
    const int n_gen = 3 + static_cast<int>(rng.next_below(4));  // 3..6
    const int n = std::max(n_gen + 2, 6 + static_cast<int>(rng.next_below(3)));  // 6..8

    NetworkBuilder b("pool-" + std::to_string(seed));
    double total_demand = 0.0;
    std::vector<double> demand(n, 0.0);
    for (int i = n_gen; i < n; ++i) {
        demand[i] = rng.uniform(80.0, 400.0);
        total_demand += demand[i];
    }
    for (int i = 0; i < n; ++i) {
        std::string id = (i < n_gen ? "g" : "c") + std::to_string(i);
        if (i < n_gen) {
            // capacities between half and double the total demand
            double cap = total_demand * rng.uniform(0.5, 2.0) + 100.0;
            b.generator(id, cap, 0.8 * cap);
        } else {
            b.consumer(id, demand[i], demand[i] * rng.uniform(0.2, 0.4));
        }
    }
    auto id_of = [&](int i) { return (i < n_gen ? "g" : "c") + std::to_string(i); };

    std::vector<std::pair<int, int>> pairs;
    for (int i = 1; i < n; ++i)
        pairs.push_back({static_cast<int>(rng.next_below(static_cast<uint64_t>(i))), i});
    int extra = 1 + static_cast<int>(rng.next_below(2));
    for (int t = 0; t < extra && static_cast<int>(pairs.size()) < 10; ++t) {
        int u = static_cast<int>(rng.next_below(static_cast<uint64_t>(n)));
        int v = static_cast<int>(rng.next_below(static_cast<uint64_t>(n)));
        if (u == v) continue;
        auto pr = std::minmax(u, v);
        bool dup = false;
        for (auto& existing : pairs)
            if (existing == std::make_pair(pr.first, pr.second)) dup = true;
        if (!dup) pairs.push_back({pr.first, pr.second});
    }
    for (const auto& [u, v] : pairs)
        b.line(id_of(u), id_of(v), rng.uniform(0.005, 0.03), rng.uniform(0.005, 0.03),
               4.0 * total_demand + 500.0, 4.0 * total_demand + 500.0);
    return b.build();
}

}  // namespace gridforest::testing
