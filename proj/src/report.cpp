#include "gridforest/report.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"

namespace gridforest {

using ordered_json = nlohmann::ordered_json;

namespace {

ordered_json config_json(const RadialConfiguration& config, const DistributionNetwork& net) {
    ordered_json j;
    j["roots"] = ordered_json::array();
    for (int r : config.roots) j["roots"].push_back(net.buses[r].id);
    j["selected"] = ordered_json::array();
    for (const LineRef& ref : config.selected) {
        const Edge& e = net.edges[ref.edge];
        j["selected"].push_back({{"from", e.from}, {"to", e.to}, {"k", ref.k}});
    }
    return j;
}

ordered_json feasibility_json(const FeasibilityReport& rep) {
    ordered_json j;
    j["feasible"] = rep.feasible;
    j["tolerance_pu"] = rep.tolerance;
    j["total_violation"] = rep.total_violation;
    ordered_json families = ordered_json::object();
    for (ConstraintFamily f : kAllFamilies) {
        const auto& e = rep.entry(f);
        families[constraint_family_name(f)] = {{"worst_violation", e.worst_violation},
                                               {"element", e.element}};
    }
    j["constraints"] = families;
    return j;
}

}  // namespace

std::string SolverReport::to_json(const DistributionNetwork& net) const {
    ordered_json j;
    j["tool"] = {{"name", kToolName}, {"version", kToolVersion}};
    j["network"] = network_name;
    j["network_path"] = network_path;
    j["problem"] = problem;
    j["mode"] = mode;
    j["seed"] = seed;
    if (kappa) j["kappa"] = *kappa;
    j["active_set"] = ordered_json::array();
    for (int b : active_set) j["active_set"].push_back(net.buses[b].id);
    j["configuration"] = config_json(configuration, net);
    j["exact_loss_kw"] = exact_loss_kw;
    j["approx_loss_kw"] = approx_loss_kw;
    j["loss_fraction"] = loss_fraction;
    j["total_supplied_kw"] = total_supplied_kw;
    j["feasibility"] = feasibility_json(feasibility);
    j["conventions"] = {{"weight_numerator", "newly_attached_node"}, {"tmax_log_base", "e"}};
    // forward_runs is excluded: speculative parallel batches may evaluate
    // (and discard) extra candidates without affecting the outcome
    j["evaluations"] = evaluations;
    j["fallback_selections"] = fallback_selections;
    j["rewire_swaps"] = rewire_swaps;
    if (problem == 2) {
        j["trace"] = ordered_json::array();
        for (const auto& step : trace) {
            ordered_json sj;
            sj["set"] = ordered_json::array();
            for (int b : step.active_set) sj["set"].push_back(net.buses[b].id);
            sj["feasible"] = step.feasible;
            if (step.feasible) sj["loss_kw"] = step.loss_kw;
            sj["accepted"] = step.accepted;
            sj["incumbent_kw"] = step.incumbent_kw;
            j["trace"].push_back(std::move(sj));
        }
    }
    ordered_json timings = ordered_json::object();
    for (const auto& [k, v] : timings_s) timings[k] = v;
    j["timings"] = timings;
    return j.dump(2) + "\n";
}

std::string WarmStart::to_json(const SolverReport& report, const DistributionNetwork& net,
                               const PowerFlowSolution& solution) {
    ordered_json j;
    j["tool"] = {{"name", kToolName}, {"version", kToolVersion}};
    j["network"] = report.network_name;
    j["exact_loss_kw"] = report.exact_loss_kw;
    j["configuration"] = config_json(report.configuration, net);

    const auto& sel = report.configuration.selected;
    j["gamma"] = ordered_json::array();
    for (int e = 0; e < net.n_edges(); ++e) {
        for (const Line& l : net.edges[e].lines) {
            LineRef ref{e, l.k};
            bool on = std::binary_search(sel.begin(), sel.end(), ref);
            j["gamma"].push_back({{"from", net.edges[e].from},
                                  {"to", net.edges[e].to},
                                  {"k", l.k},
                                  {"value", on ? 1 : 0}});
        }
    }

    j["beta"] = ordered_json::array();
    for (int g : net.generator_pool) {
        bool on = std::binary_search(report.configuration.roots.begin(), report.configuration.roots.end(), g);
        j["beta"].push_back({{"bus", net.buses[g].id}, {"value", on ? 1 : 0}});
    }

    j["x"] = ordered_json::array();
    for (const auto& f : solution.flows) {
        const Edge& e = net.edges[f.line.edge];
        const Line& line = net.line(f.line);
        for (Phase p : kAllPhases) {
            if (!line.phases.contains(p)) continue;
            j["x"].push_back({{"from", e.from},
                              {"to", e.to},
                              {"k", f.line.k},
                              {"phase", std::string(1, phase_char(p))},
                              {"p_pu", f.flow_send[p].real()},
                              {"q_pu", f.flow_send[p].imag()}});
        }
    }

    j["v"] = ordered_json::array();
    for (int b = 0; b < net.n_buses(); ++b) {
        const Bus& bus = net.buses[b];
        for (Phase p : kAllPhases) {
            if (!bus.phases.contains(p)) continue;
            j["v"].push_back({{"bus", bus.id},
                              {"phase", std::string(1, phase_char(p))},
                              {"re", solution.voltage[b][p].real()},
                              {"im", solution.voltage[b][p].imag()}});
        }
    }
    return j.dump(2) + "\n";
}

RadialConfiguration WarmStart::configuration_from_json(const std::string& text,
                                                       const DistributionNetwork& net) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        raise(ErrorKind::Parse, e.what());
    }
    RadialConfiguration config;
    for (const auto& gj : j.at("gamma")) {
        if (gj.at("value").get<int>() != 1) continue;
        int e = net.find_edge(gj.at("from").get<std::string>(), gj.at("to").get<std::string>());
        if (e < 0) raise(ErrorKind::UnknownEdge, "warm-start references unknown edge");
        config.selected.push_back({e, gj.at("k").get<int>()});
    }
    for (const auto& bj : j.at("beta")) {
        if (bj.at("value").get<int>() != 1) continue;
        config.roots.push_back(net.bus_idx(bj.at("bus").get<std::string>()));
    }
    config.canonicalize();
    return config;
}

}  // namespace gridforest
