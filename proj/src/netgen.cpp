#include "gridforest/netgen.hpp"

#include <algorithm>
#include <deque>
#include <set>
#include <string>
#include <vector>

#include "gridforest/rng.hpp"

namespace gridforest {

namespace {

std::string bus_id(int i, int width) {
    std::string digits = std::to_string(i);
    return "b" + std::string(std::max(0, width - static_cast<int>(digits.size())), '0') + digits;
}

std::vector<std::pair<int, int>> ws_edges(const WsParams& p, Rng& rng) {
    const int n = p.n_nodes;
    const int half = p.mean_degree / 2;
    std::set<std::pair<int, int>> present;
    std::vector<std::pair<int, int>> edges;
    auto key = [](int a, int b) { return std::make_pair(std::min(a, b), std::max(a, b)); };

    for (int i = 0; i < n; ++i)
        for (int j = 1; j <= half; ++j) {
            auto e = key(i, (i + j) % n);
            if (present.insert(e).second) edges.push_back(e);
        }

    // Watts-Strogatz rewiring: move the far endpoint with probability
    // rewire_prob, keeping the edge count fixed
    for (auto& e : edges) {
        if (rng.next_double() >= p.rewire_prob) continue;
        for (int attempt = 0; attempt < 32; ++attempt) {
            int target = static_cast<int>(rng.next_below(static_cast<uint64_t>(n)));
            if (target == e.first || target == e.second) continue;
            auto candidate = std::minmax(e.first, target);
            auto cand_pair = std::make_pair(candidate.first, candidate.second);
            if (present.count(cand_pair)) continue;
            present.erase(e);
            present.insert(cand_pair);
            e = cand_pair;
            break;
        }
    }
    std::sort(edges.begin(), edges.end());
    return edges;
}

bool connected(int n, const std::vector<std::pair<int, int>>& edges) {
    std::vector<std::vector<int>> adj(n);
    for (const auto& [a, b] : edges) {
        adj[a].push_back(b);
        adj[b].push_back(a);
    }
    std::vector<char> seen(n, 0);
    std::deque<int> queue{0};
    seen[0] = 1;
    int visited = 1;
    while (!queue.empty()) {
        int u = queue.front();
        queue.pop_front();
        for (int v : adj[u])
            if (!seen[v]) {
                seen[v] = 1;
                ++visited;
                queue.push_back(v);
            }
    }
    return visited == n;
}

}  // namespace

DistributionNetwork generate_ws(const WsParams& p) {
    if (p.n_nodes < 3 || p.mean_degree < 2 || p.mean_degree % 2 != 0 || p.mean_degree >= p.n_nodes ||
        p.n_sources < 1 || p.n_sources >= p.n_nodes || p.rewire_prob < 0.0 || p.rewire_prob > 1.0 ||
        !(p.demand_total_kw > 0.0) || !(p.generation_ratio > 1.0))
        raise(ErrorKind::InvalidParams, "Watts-Strogatz parameters out of range");

    // regenerate with derived seeds until the graph is connected
    std::vector<std::pair<int, int>> edges;
    Rng rng(p.seed);
    bool ok = false;
    for (int attempt = 0; attempt < 64 && !ok; ++attempt) {
        rng = Rng(combine_seed(p.seed, static_cast<uint64_t>(attempt)));
        edges = ws_edges(p, rng);
        ok = connected(p.n_nodes, edges);
    }
    if (!ok) raise(ErrorKind::InvalidParams, "could not generate a connected graph in 64 attempts");

    const int n = p.n_nodes;
    const int width = static_cast<int>(std::to_string(n - 1).size());

    // generator placement
    std::vector<int> degree(n, 0);
    for (const auto& [a, b] : edges) {
        ++degree[a];
        ++degree[b];
    }
    std::set<int> sources;
    if (p.hub_sources) {
        std::vector<int> order(n);
        for (int i = 0; i < n; ++i) order[i] = i;
        std::sort(order.begin(), order.end(),
                  [&](int a, int b) { return degree[a] != degree[b] ? degree[a] > degree[b] : a < b; });
        for (int i = 0; i < p.n_sources; ++i) sources.insert(order[i]);
    } else {
        while (static_cast<int>(sources.size()) < p.n_sources)
            sources.insert(static_cast<int>(rng.next_below(static_cast<uint64_t>(n))));
    }

    DistributionNetwork net;
    net.name = "ws" + std::to_string(n) + "-seed" + std::to_string(p.seed);
    net.base_kv = 12.47;
    net.base_mva = p.demand_total_kw / 1000.0;  // total demand ~ 1 p.u.
    net.alpha = 1.0;
    net.loss_margin = 0.20;

    // log-uniform raw demands, rescaled so the total hits the target
    std::vector<PerPhase<double>> raw_p(n), raw_q(n);
    double raw_total = 0.0;
    for (int i = 0; i < n; ++i) {
        if (sources.count(i)) continue;
        for (Phase ph : kAllPhases) {
            raw_p[i][ph] = rng.log_uniform(1.0, 25.0);
            raw_q[i][ph] = raw_p[i][ph] * rng.uniform(0.25, 0.45);
            raw_total += raw_p[i][ph];
        }
    }
    const double demand_scale = p.demand_total_kw / raw_total;

    // generation shares rescaled to generation_ratio * total demand
    std::vector<double> gen_share(n, 0.0);
    double share_total = 0.0;
    for (int i = 0; i < n; ++i)
        if (sources.count(i)) {
            gen_share[i] = rng.log_uniform(1.0, 4.0);
            share_total += gen_share[i];
        }
    const double gen_total_kw = p.generation_ratio * p.demand_total_kw;

    for (int i = 0; i < n; ++i) {
        Bus bus;
        bus.id = bus_id(i, width);
        bus.phases = PhaseSet::all();
        bus.v_min_pu = 0.90;
        bus.v_max_pu = 1.10;
        if (sources.count(i)) {
            bus.kind = BusKind::Generator;
            const double p_cap = gen_total_kw * gen_share[i] / share_total / 3.0;
            for (Phase ph : kAllPhases) {
                bus.gen_p_max_kw[ph] = p_cap;
                bus.gen_q_max_kvar[ph] = 0.6 * p_cap;
                bus.gen_q_min_kvar[ph] = -0.6 * p_cap;
            }
        } else {
            bus.kind = BusKind::Consumer;
            for (Phase ph : kAllPhases) {
                bus.demand_kw[ph] = raw_p[i][ph] * demand_scale;
                bus.demand_kvar[ph] = raw_q[i][ph] * demand_scale;
            }
        }
        net.buses.push_back(std::move(bus));
    }

    // impedances per line, shared by the three phases
    std::vector<std::pair<double, double>> rx;
    rx.reserve(edges.size());
    for (size_t e = 0; e < edges.size(); ++e)
        rx.push_back({rng.uniform(0.005, 0.05), rng.uniform(0.005, 0.05)});

    // breadth-first baseline tree for capacity sizing
    std::vector<std::vector<std::pair<int, int>>> adj(n);  // (neighbor, edge idx)
    for (size_t e = 0; e < edges.size(); ++e) {
        adj[edges[e].first].push_back({edges[e].second, static_cast<int>(e)});
        adj[edges[e].second].push_back({edges[e].first, static_cast<int>(e)});
    }
    std::vector<int> parent(n, -1), parent_edge(n, -1), bfs_order;
    std::vector<char> seen(n, 0);
    std::deque<int> queue;
    for (int s : sources) {
        seen[s] = 1;
        parent[s] = s;
        queue.push_back(s);
    }
    while (!queue.empty()) {
        int u = queue.front();
        queue.pop_front();
        bfs_order.push_back(u);
        for (const auto& [v, e] : adj[u])
            if (!seen[v]) {
                seen[v] = 1;
                parent[v] = u;
                parent_edge[v] = e;
                queue.push_back(v);
            }
    }
    std::vector<PerPhase<double>> acc_p(n), acc_q(n);
    for (int i = 0; i < n; ++i)
        for (Phase ph : kAllPhases) {
            acc_p[i][ph] = sources.count(i) ? 0.0 : raw_p[i][ph] * demand_scale;
            acc_q[i][ph] = sources.count(i) ? 0.0 : raw_q[i][ph] * demand_scale;
        }
    double flow_p_sum = 0.0, flow_q_sum = 0.0, flow_p_max = 0.0, flow_q_max = 0.0;
    int tree_lines = 0;
    for (auto it = bfs_order.rbegin(); it != bfs_order.rend(); ++it) {
        int b = *it;
        if (parent_edge[b] < 0) continue;
        double fp = 0.0, fq = 0.0;
        for (Phase ph : kAllPhases) {
            fp = std::max(fp, acc_p[b][ph]);
            fq = std::max(fq, acc_q[b][ph]);
            acc_p[parent[b]][ph] += acc_p[b][ph];
            acc_q[parent[b]][ph] += acc_q[b][ph];
        }
        flow_p_sum += fp;
        flow_q_sum += fq;
        flow_p_max = std::max(flow_p_max, fp);
        flow_q_max = std::max(flow_q_max, fq);
        ++tree_lines;
    }
    // 3x the mean baseline flow, floored so the baseline tree itself stays
    // feasible with headroom for losses
    const double p_cap_kw =
        std::max({1.0, 3.0 * flow_p_sum / std::max(1, tree_lines), 1.5 * flow_p_max});
    const double q_cap_kvar =
        std::max({1.0, 3.0 * flow_q_sum / std::max(1, tree_lines), 1.5 * flow_q_max});

    for (size_t e = 0; e < edges.size(); ++e) {
        Edge edge;
        edge.from = bus_id(edges[e].first, width);
        edge.to = bus_id(edges[e].second, width);
        Line line;
        line.k = 1;
        line.phases = PhaseSet::all();
        for (Phase ph : kAllPhases) {
            line.r_pu[ph] = rx[e].first;
            line.x_pu[ph] = rx[e].second;
        }
        line.p_max_kw = p_cap_kw;
        line.q_max_kvar = q_cap_kvar;
        line.theta_min_rad = -kPi / 6;
        line.theta_max_rad = kPi / 6;
        edge.lines.push_back(std::move(line));
        net.edges.push_back(std::move(edge));
    }

    net.rebuild_indexes();
    net.normalize();
    return net;
}

}  // namespace gridforest
