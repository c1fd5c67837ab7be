#include "gridforest/radial.hpp"

#include <algorithm>
#include <deque>
#include <numeric>

#include "json.hpp"

namespace gridforest {

namespace {

struct Dsu {
    std::vector<int> parent;
    explicit Dsu(size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    bool unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        parent[b] = a;
        return true;
    }
};

void check_refs(const RadialConfiguration& config, const DistributionNetwork& net) {
    for (const LineRef& ref : config.selected) net.line(ref);  // throws UnknownEdge
    for (int r : config.roots)
        if (r < 0 || r >= net.n_buses()) raise(ErrorKind::UnknownBus, "root index out of range");
}

}  // namespace

void RadialConfiguration::canonicalize() {
    std::sort(selected.begin(), selected.end());
    selected.erase(std::unique(selected.begin(), selected.end()), selected.end());
    std::sort(roots.begin(), roots.end());
    roots.erase(std::unique(roots.begin(), roots.end()), roots.end());
}

bool is_radial(const RadialConfiguration& config, const DistributionNetwork& net) {
    check_refs(config, net);
    if (config.roots.empty()) return false;

    // acyclicity over the multigraph: parallel selected lines collide in the DSU
    Dsu dsu(net.buses.size());
    for (const LineRef& ref : config.selected) {
        const Edge& e = net.edges[ref.edge];
        if (!dsu.unite(e.from_idx, e.to_idx)) return false;
    }

    // exactly one root per component, every component rooted
    std::vector<int> root_count(net.buses.size(), 0);
    for (int r : config.roots) root_count[dsu.find(r)] += 1;
    for (int b = 0; b < net.n_buses(); ++b)
        if (root_count[dsu.find(b)] != 1) return false;

    // acyclic + one root per component implies |selected| = N - #components,
    // which covers the spanning requirement
    return true;
}

OrientedForest orient(const RadialConfiguration& config, const DistributionNetwork& net) {
    if (!is_radial(config, net)) raise(ErrorKind::NotRadial, "configuration is not a radial spanning forest");

    const int n = net.n_buses();
    OrientedForest f;
    f.parent.assign(n, -1);
    f.parent_line.assign(n, LineRef{});
    f.children.assign(n, {});
    f.component_root.assign(n, -1);
    f.depth.assign(n, 0);
    f.roots = config.roots;

    // adjacency restricted to selected lines
    std::vector<std::vector<std::pair<int, LineRef>>> adj(n);
    for (const LineRef& ref : config.selected) {
        const Edge& e = net.edges[ref.edge];
        adj[e.from_idx].push_back({e.to_idx, ref});
        adj[e.to_idx].push_back({e.from_idx, ref});
    }

    for (int root : config.roots) {
        std::deque<int> queue{root};
        f.component_root[root] = root;
        while (!queue.empty()) {
            int u = queue.front();
            queue.pop_front();
            for (const auto& [v, ref] : adj[u]) {
                if (f.component_root[v] != -1) continue;
                f.component_root[v] = root;
                f.parent[v] = u;
                f.parent_line[v] = ref;
                f.depth[v] = f.depth[u] + 1;
                f.children[u].push_back(v);
                queue.push_back(v);
            }
        }
    }
    for (auto& c : f.children) std::sort(c.begin(), c.end());
    return f;
}

std::vector<int> downstream_set(const OrientedForest& forest, const DistributionNetwork& net, LineRef line) {
    net.line(line);
    // locate the child endpoint of the line
    int child = -1;
    const Edge& e = net.edges[line.edge];
    if (forest.parent[e.from_idx] == e.to_idx && forest.parent_line[e.from_idx] == line)
        child = e.from_idx;
    else if (forest.parent[e.to_idx] == e.from_idx && forest.parent_line[e.to_idx] == line)
        child = e.to_idx;
    if (child < 0) raise(ErrorKind::UnknownEdge, "line is not part of the oriented forest");

    std::vector<int> out;
    std::deque<int> queue{child};
    while (!queue.empty()) {
        int u = queue.front();
        queue.pop_front();
        out.push_back(u);
        for (int c : forest.children[u]) queue.push_back(c);
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<LineRef> upstream_path(const OrientedForest& forest, const DistributionNetwork& net, int bus) {
    if (bus < 0 || bus >= net.n_buses()) raise(ErrorKind::UnknownBus, "bus index out of range");
    std::vector<LineRef> path;
    for (int b = bus; forest.parent[b] >= 0; b = forest.parent[b]) path.push_back(forest.parent_line[b]);
    std::reverse(path.begin(), path.end());
    return path;
}

std::string configuration_to_json(const RadialConfiguration& config, const DistributionNetwork& net) {
    nlohmann::ordered_json j;
    j["roots"] = nlohmann::ordered_json::array();
    for (int r : config.roots) j["roots"].push_back(net.buses[r].id);
    j["selected"] = nlohmann::ordered_json::array();
    for (const LineRef& ref : config.selected) {
        const Edge& e = net.edges[ref.edge];
        j["selected"].push_back({{"from", e.from}, {"to", e.to}, {"k", ref.k}});
    }
    return j.dump();
}

RadialConfiguration configuration_from_json(const std::string& text, const DistributionNetwork& net) {
    nlohmann::ordered_json j;
    try {
        j = nlohmann::ordered_json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        raise(ErrorKind::Parse, e.what());
    }
    RadialConfiguration config;
    for (const auto& rid : j.at("roots")) config.roots.push_back(net.bus_idx(rid.get<std::string>()));
    for (const auto& sel : j.at("selected")) {
        int e = net.find_edge(sel.at("from").get<std::string>(), sel.at("to").get<std::string>());
        if (e < 0)
            raise(ErrorKind::UnknownEdge, "no edge " + sel.at("from").get<std::string>() + "-" +
                                              sel.at("to").get<std::string>());
        config.selected.push_back({e, sel.at("k").get<int>()});
    }
    config.canonicalize();
    return config;
}

}  // namespace gridforest
