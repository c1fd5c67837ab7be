#include "gridforest/network_io.hpp"

#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace gridforest {

using ordered_json = nlohmann::ordered_json;

namespace {

[[noreturn]] void fail_validation(const std::string& path, const std::string& what) {
    raise(ErrorKind::Validation, path + ": " + what);
}

double require_number(const ordered_json& j, const std::string& key, const std::string& path) {
    if (!j.contains(key) || !j[key].is_number())
        fail_validation(path + "." + key, "missing or non-numeric");
    return j[key].get<double>();
}

std::string require_string(const ordered_json& j, const std::string& key, const std::string& path) {
    if (!j.contains(key) || !j[key].is_string())
        fail_validation(path + "." + key, "missing or non-string");
    return j[key].get<std::string>();
}

PhaseSet parse_phases(const ordered_json& j, const std::string& path) {
    if (!j.is_string()) fail_validation(path, "phases must be a string like \"abc\"");
    PhaseSet ps = PhaseSet::from_string(j.get<std::string>());
    if (ps.empty()) fail_validation(path, "phase set is empty");
    return ps;
}

/// Per-phase values arrive either as a {"a": x, ...} map or as a single
/// number applied to every phase of the owner.
PerPhase<double> parse_per_phase(const ordered_json& j, PhaseSet phases, const std::string& path) {
    PerPhase<double> out{};
    if (j.is_number()) {
        for (Phase p : kAllPhases)
            if (phases.contains(p)) out[p] = j.get<double>();
        return out;
    }
    if (!j.is_object()) fail_validation(path, "expected number or per-phase object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        PhaseSet key = PhaseSet::from_string(it.key());
        if (key.count() != 1 || it.key().size() != 1) fail_validation(path, "bad phase key '" + it.key() + "'");
        for (Phase p : kAllPhases)
            if (key.contains(p)) {
                if (!phases.contains(p)) fail_validation(path, "value for phase not on element");
                out[p] = it.value().get<double>();
            }
    }
    return out;
}

ordered_json per_phase_json(const PerPhase<double>& v, PhaseSet phases) {
    ordered_json j = ordered_json::object();
    for (Phase p : kAllPhases)
        if (phases.contains(p)) j[std::string(1, phase_char(p))] = v[p];
    return j;
}

}  // namespace

DistributionNetwork load_network_from_string(const std::string& text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        raise(ErrorKind::Parse, e.what());
    }

    DistributionNetwork net;
    net.name = require_string(j, "name", "$");
    net.base_kv = require_number(j, "base_kv", "$");
    net.base_mva = require_number(j, "base_mva", "$");
    if (!(net.base_kv > 0.0)) fail_validation("$.base_kv", "must be > 0");
    if (!(net.base_mva > 0.0)) fail_validation("$.base_mva", "must be > 0");

    std::string units = j.contains("units") ? require_string(j, "units", "$") : "pu";
    if (units != "pu" && units != "ohm") fail_validation("$.units", "must be \"pu\" or \"ohm\"");
    net.alpha = j.contains("alpha") ? require_number(j, "alpha", "$") : 1.0;
    net.loss_margin = j.contains("loss_margin") ? require_number(j, "loss_margin", "$") : 0.20;

    if (!j.contains("buses") || !j["buses"].is_array() || j["buses"].empty())
        fail_validation("$.buses", "missing or empty");

    std::set<std::string> ids;
    for (size_t i = 0; i < j["buses"].size(); ++i) {
        const auto& bj = j["buses"][i];
        const std::string path = "buses[" + std::to_string(i) + "]";
        Bus bus;
        bus.id = require_string(bj, "id", path);
        if (!ids.insert(bus.id).second) fail_validation(path + ".id", "duplicate bus id '" + bus.id + "'");
        std::string kind = require_string(bj, "kind", path);
        if (kind == "generator") bus.kind = BusKind::Generator;
        else if (kind == "consumer") bus.kind = BusKind::Consumer;
        else fail_validation(path + ".kind", "must be \"generator\" or \"consumer\"");
        bus.phases = bj.contains("phases") ? parse_phases(bj["phases"], path + ".phases") : PhaseSet::all();
        if (bj.contains("demand_kw")) bus.demand_kw = parse_per_phase(bj["demand_kw"], bus.phases, path + ".demand_kw");
        if (bj.contains("demand_kvar"))
            bus.demand_kvar = parse_per_phase(bj["demand_kvar"], bus.phases, path + ".demand_kvar");
        if (bj.contains("gen_p_max_kw"))
            bus.gen_p_max_kw = parse_per_phase(bj["gen_p_max_kw"], bus.phases, path + ".gen_p_max_kw");
        if (bj.contains("gen_p_min_kw"))
            bus.gen_p_min_kw = parse_per_phase(bj["gen_p_min_kw"], bus.phases, path + ".gen_p_min_kw");
        if (bj.contains("gen_q_max_kvar"))
            bus.gen_q_max_kvar = parse_per_phase(bj["gen_q_max_kvar"], bus.phases, path + ".gen_q_max_kvar");
        if (bj.contains("gen_q_min_kvar"))
            bus.gen_q_min_kvar = parse_per_phase(bj["gen_q_min_kvar"], bus.phases, path + ".gen_q_min_kvar");
        if (bj.contains("v_min_pu")) bus.v_min_pu = require_number(bj, "v_min_pu", path);
        if (bj.contains("v_max_pu")) bus.v_max_pu = require_number(bj, "v_max_pu", path);
        net.buses.push_back(std::move(bus));
    }

    if (!j.contains("edges") || !j["edges"].is_array()) fail_validation("$.edges", "missing");
    for (size_t e = 0; e < j["edges"].size(); ++e) {
        const auto& ej = j["edges"][e];
        const std::string path = "edges[" + std::to_string(e) + "]";
        Edge edge;
        edge.from = require_string(ej, "from", path);
        edge.to = require_string(ej, "to", path);
        if (!ids.count(edge.from)) fail_validation(path + ".from", "unknown bus '" + edge.from + "'");
        if (!ids.count(edge.to)) fail_validation(path + ".to", "unknown bus '" + edge.to + "'");
        if (edge.from == edge.to) fail_validation(path + ".to", "self-loop");
        if (!ej.contains("lines") || !ej["lines"].is_array() || ej["lines"].empty())
            fail_validation(path + ".lines", "missing or empty");
        std::set<int> ks;
        for (size_t li = 0; li < ej["lines"].size(); ++li) {
            const auto& lj = ej["lines"][li];
            const std::string lpath = path + ".lines[" + std::to_string(li) + "]";
            Line line;
            line.k = lj.contains("k") ? static_cast<int>(require_number(lj, "k", lpath)) : static_cast<int>(li) + 1;
            if (!ks.insert(line.k).second) fail_validation(lpath + ".k", "duplicate line index");
            line.phases = lj.contains("phases") ? parse_phases(lj["phases"], lpath + ".phases") : PhaseSet::all();
            if (!lj.contains("r") || !lj.contains("x")) fail_validation(lpath, "missing r or x");
            line.r_pu = parse_per_phase(lj["r"], line.phases, lpath + ".r");
            line.x_pu = parse_per_phase(lj["x"], line.phases, lpath + ".x");
            if (units == "ohm") {
                for (Phase p : kAllPhases) {
                    line.r_pu[p] = to_per_unit_impedance(line.r_pu[p], net.base_kv, net.base_mva);
                    line.x_pu[p] = to_per_unit_impedance(line.x_pu[p], net.base_kv, net.base_mva);
                }
            }
            line.p_max_kw = require_number(lj, "p_max_kw", lpath);
            line.q_max_kvar = require_number(lj, "q_max_kvar", lpath);
            if (lj.contains("theta_min_rad")) line.theta_min_rad = require_number(lj, "theta_min_rad", lpath);
            if (lj.contains("theta_max_rad")) line.theta_max_rad = require_number(lj, "theta_max_rad", lpath);
            edge.lines.push_back(std::move(line));
        }
        net.edges.push_back(std::move(edge));
    }

    net.rebuild_indexes();
    net.normalize();

    // phase containment is structural: the solvers rely on it
    for (size_t e = 0; e < net.edges.size(); ++e) {
        const auto& ed = net.edges[e];
        for (size_t li = 0; li < ed.lines.size(); ++li) {
            if (!net.buses[ed.from_idx].phases.contains_all(ed.lines[li].phases) ||
                !net.buses[ed.to_idx].phases.contains_all(ed.lines[li].phases))
                fail_validation("edges[" + std::to_string(e) + "].lines[" + std::to_string(li) + "].phases",
                                "not a subset of both endpoint buses");
        }
    }
    return net;
}

DistributionNetwork load_network(const std::string& path) {
    return load_network_from_string(read_file(path));
}

std::string save_network_to_string(const DistributionNetwork& net) {
    ordered_json j;
    j["name"] = net.name;
    j["base_kv"] = net.base_kv;
    j["base_mva"] = net.base_mva;
    j["units"] = "pu";
    j["alpha"] = net.alpha;
    j["loss_margin"] = net.loss_margin;

    j["buses"] = ordered_json::array();
    for (const auto& b : net.buses) {
        ordered_json bj;
        bj["id"] = b.id;
        bj["kind"] = b.is_generator() ? "generator" : "consumer";
        bj["phases"] = b.phases.to_string();
        bj["demand_kw"] = per_phase_json(b.demand_kw, b.phases);
        bj["demand_kvar"] = per_phase_json(b.demand_kvar, b.phases);
        if (b.is_generator()) {
            bj["gen_p_max_kw"] = per_phase_json(b.gen_p_max_kw, b.phases);
            bj["gen_p_min_kw"] = per_phase_json(b.gen_p_min_kw, b.phases);
            bj["gen_q_max_kvar"] = per_phase_json(b.gen_q_max_kvar, b.phases);
            bj["gen_q_min_kvar"] = per_phase_json(b.gen_q_min_kvar, b.phases);
        }
        bj["v_min_pu"] = b.v_min_pu;
        bj["v_max_pu"] = b.v_max_pu;
        j["buses"].push_back(std::move(bj));
    }

    j["edges"] = ordered_json::array();
    for (const auto& e : net.edges) {
        ordered_json ej;
        ej["from"] = e.from;
        ej["to"] = e.to;
        ej["lines"] = ordered_json::array();
        for (const auto& l : e.lines) {
            ordered_json lj;
            lj["k"] = l.k;
            lj["phases"] = l.phases.to_string();
            lj["r"] = per_phase_json(l.r_pu, l.phases);
            lj["x"] = per_phase_json(l.x_pu, l.phases);
            lj["p_max_kw"] = l.p_max_kw;
            lj["q_max_kvar"] = l.q_max_kvar;
            lj["theta_min_rad"] = l.theta_min_rad;
            lj["theta_max_rad"] = l.theta_max_rad;
            ej["lines"].push_back(std::move(lj));
        }
        j["edges"].push_back(std::move(ej));
    }

    return j.dump(2) + "\n";
}

void save_network(const DistributionNetwork& net, const std::string& path) {
    write_file_atomic(path, save_network_to_string(net));
}

void write_file_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    fs::path target(path);
    fs::path dir = target.parent_path();
    if (dir.empty()) dir = ".";
    fs::path tmp = dir / (target.filename().string() + ".tmp." + std::to_string(::getpid()));
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) raise(ErrorKind::Io, "cannot open " + tmp.string() + " for writing");
        out << content;
        if (!out.good()) raise(ErrorKind::Io, "write failed for " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp);
        raise(ErrorKind::Io, "rename to " + path + " failed: " + ec.message());
    }
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(ErrorKind::Io, "cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace gridforest
