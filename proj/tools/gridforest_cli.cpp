#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "gridforest/forward_solver.hpp"
#include "gridforest/log.hpp"
#include "gridforest/netgen.hpp"
#include "gridforest/network_io.hpp"
#include "gridforest/oracle.hpp"
#include "gridforest/permutation_search.hpp"
#include "gridforest/report.hpp"

namespace gf = gridforest;
namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

int exit_code_for(gf::ErrorKind kind) {
    switch (kind) {
        case gf::ErrorKind::Disconnected:
        case gf::ErrorKind::InsufficientGeneration:
        case gf::ErrorKind::UnreachableBus:
        case gf::ErrorKind::StrandedBuses:
        case gf::ErrorKind::AllCandidatesInfeasible:
        case gf::ErrorKind::RepairFailed:
        case gf::ErrorKind::NoFeasibleForest:
        case gf::ErrorKind::NoFeasibleSolution:
            return 1;
        default:
            return 2;
    }
}

[[noreturn]] void fail(const gf::SolverError& e) {
    ordered_json j;
    j["error"] = gf::error_kind_name(e.kind());
    j["message"] = e.what();
    std::cerr << j.dump() << "\n";
    std::exit(exit_code_for(e.kind()));
}

void emit(const std::string& content, const std::string& out_path) {
    if (out_path.empty())
        std::cout << content;
    else
        gf::write_file_atomic(out_path, content);
}

std::vector<int> parse_generators(const gf::DistributionNetwork& net, const std::string& csv) {
    std::vector<int> out;
    if (csv.empty()) {
        out = net.generator_pool;
        return out;
    }
    std::stringstream ss(csv);
    std::string id;
    while (std::getline(ss, id, ',')) {
        if (!id.empty()) out.push_back(net.bus_idx(id));
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

struct BenchRow {
    std::string network;
    int problem = 1;
    std::string mode;
    int kappa = 0;
    uint64_t seed = 0;
    double loss_kw = 0.0;
    double loss_fraction = 0.0;
    bool feasible = false;
    int64_t iterations = 0;
    double time_s = 0.0;

    std::string to_csv() const {
        char buf[320];
        std::snprintf(buf, sizeof(buf), "%s,%d,%s,%d,%llu,%.9g,%.9g,%d,%lld,%.6f\n", network.c_str(),
                      problem, mode.c_str(), kappa, static_cast<unsigned long long>(seed), loss_kw,
                      loss_fraction, feasible ? 1 : 0, static_cast<long long>(iterations), time_s);
        return buf;
    }
};

constexpr const char* kCsvHeader = "network,problem,mode,kappa,seed,loss_kw,loss_fraction,feasible,iterations,time_s\n";

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"radial reconfiguration solver toolkit"};
    app.set_version_flag("--version", std::string(gf::kToolName) + " " + gf::kToolVersion);
    app.require_subcommand(1);

    std::string network_path, out_path, generators_csv, mode_str = "greedy", report_path, dir_path,
                seeds_csv = "0", warm_csv;
    uint64_t seed = 0;
    int kappa = 0;
    double target_p = 0.95, epsilon_rel = 0.01;
    int64_t max_iters = 0, stall_limit = 0;
    int jobs = 1, problem = 1;

    gf::WsParams ws;

    auto* validate_cmd = app.add_subcommand("validate", "check a network file");
    validate_cmd->add_option("--network", network_path)->required();

    auto* solve_cmd = app.add_subcommand("solve", "radial configuration for a fixed active set");
    solve_cmd->add_option("--network", network_path)->required();
    solve_cmd->add_option("--generators", generators_csv, "active generator ids (default: all)");
    solve_cmd->add_option("--seed", seed);
    solve_cmd->add_option("--mode", mode_str)->check(CLI::IsMember({"greedy", "stochastic"}));
    solve_cmd->add_option("--out", out_path);

    auto* search_cmd = app.add_subcommand("search", "generator selection via permutation search");
    search_cmd->add_option("--network", network_path)->required();
    search_cmd->add_option("--kappa", kappa)->required();
    search_cmd->add_option("--seed", seed);
    search_cmd->add_option("--mode", mode_str)->check(CLI::IsMember({"greedy", "stochastic"}));
    search_cmd->add_option("--target-p", target_p);
    search_cmd->add_option("--epsilon-rel", epsilon_rel);
    search_cmd->add_option("--max-iters", max_iters);
    search_cmd->add_option("--stall-limit", stall_limit);
    search_cmd->add_option("--jobs", jobs);
    search_cmd->add_option("--warm", warm_csv, "warm-start generator ids");
    search_cmd->add_option("--out", out_path);

    auto* oracle_cmd = app.add_subcommand("oracle", "exhaustive reference solver (tiny networks)");
    oracle_cmd->add_option("--network", network_path)->required();
    oracle_cmd->add_option("--generators", generators_csv);
    oracle_cmd->add_option("--kappa", kappa);
    oracle_cmd->add_option("--out", out_path);

    auto* generate_cmd = app.add_subcommand("generate", "emit a Watts-Strogatz synthetic network");
    generate_cmd->add_option("--nodes", ws.n_nodes);
    generate_cmd->add_option("--degree", ws.mean_degree);
    generate_cmd->add_option("--rewire-prob", ws.rewire_prob);
    generate_cmd->add_option("--sources", ws.n_sources);
    generate_cmd->add_option("--demand-kw", ws.demand_total_kw);
    generate_cmd->add_option("--gen-ratio", ws.generation_ratio);
    generate_cmd->add_option("--seed", ws.seed);
    generate_cmd->add_flag("--hubs", ws.hub_sources, "place generators on the highest-degree buses");
    generate_cmd->add_option("--out", out_path)->required();

    auto* bench_cmd = app.add_subcommand("bench", "run a directory of networks over a seed list");
    bench_cmd->add_option("--dir", dir_path)->required();
    bench_cmd->add_option("--seeds", seeds_csv, "comma-separated seed list");
    bench_cmd->add_option("--problem", problem)->check(CLI::IsMember({1, 2}));
    bench_cmd->add_option("--kappa", kappa);
    bench_cmd->add_option("--generators", generators_csv);
    bench_cmd->add_option("--mode", mode_str)->check(CLI::IsMember({"greedy", "stochastic"}));
    bench_cmd->add_option("--jobs", jobs);
    bench_cmd->add_option("--out", out_path)->required();

    auto* export_cmd = app.add_subcommand("export-warmstart", "emit MINLP warm-start variables");
    export_cmd->add_option("--report", report_path)->required();
    export_cmd->add_option("--network", network_path, "override the report's network path");
    export_cmd->add_option("--out", out_path)->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (validate_cmd->parsed()) {
            gf::DistributionNetwork net = gf::load_network(network_path);
            auto issues = gf::validate_network(net);
            ordered_json j;
            j["network"] = net.name;
            j["issues"] = ordered_json::array();
            for (const auto& issue : issues)
                j["issues"].push_back({{"code", gf::issue_code_name(issue.code)},
                                       {"path", issue.path},
                                       {"message", issue.message}});
            emit(j.dump(2) + "\n", out_path);
            return issues.empty() ? 0 : 1;
        }

        if (solve_cmd->parsed()) {
            gf::DistributionNetwork net = gf::load_network(network_path);
            gf::SolverOptions options;
            options.mode = mode_str == "greedy" ? gf::SolveMode::Greedy : gf::SolveMode::Stochastic;
            options.seed = seed;
            gf::SolverReport report = gf::forward_solve(net, parse_generators(net, generators_csv), options);
            report.network_path = network_path;
            emit(report.to_json(net), out_path);
            return report.feasibility.feasible ? 0 : 1;
        }

        if (search_cmd->parsed()) {
            gf::DistributionNetwork net = gf::load_network(network_path);
            gf::SearchOptions options;
            options.kappa = kappa;
            options.seed = seed;
            options.target_p = target_p;
            options.epsilon_rel = epsilon_rel;
            if (max_iters > 0) options.max_iters = max_iters;
            if (stall_limit > 0) options.stall_limit = stall_limit;
            options.parallel = std::max(1, jobs);
            options.forward.mode = mode_str == "greedy" ? gf::SolveMode::Greedy : gf::SolveMode::Stochastic;
            if (!warm_csv.empty()) options.warm_start = parse_generators(net, warm_csv);
            gf::SolverReport report = gf::permutation_search(net, options);
            report.network_path = network_path;
            report.mode = mode_str;
            emit(report.to_json(net), out_path);
            return report.feasibility.feasible ? 0 : 1;
        }

        if (oracle_cmd->parsed()) {
            gf::DistributionNetwork net = gf::load_network(network_path);
            gf::OracleResult result;
            int prob = kappa > 0 ? 2 : 1;
            if (prob == 2)
                result = gf::oracle_problem2(net, kappa);
            else
                result = gf::oracle_problem1(net, parse_generators(net, generators_csv));
            ordered_json j;
            j["network"] = net.name;
            j["problem"] = prob;
            if (prob == 2) j["kappa"] = kappa;
            j["best_loss_kw"] = result.best_loss_kw;
            j["best_set"] = ordered_json::array();
            for (int b : result.best_set) j["best_set"].push_back(net.buses[b].id);
            j["configuration"] = ordered_json::parse(gf::configuration_to_json(result.best, net));
            j["forests_enumerated"] = result.forests_enumerated;
            j["forests_feasible"] = result.forests_feasible;
            if (prob == 2) j["subsets_enumerated"] = result.subsets_enumerated;
            emit(j.dump(2) + "\n", out_path);
            return 0;
        }

        if (generate_cmd->parsed()) {
            gf::DistributionNetwork net = gf::generate_ws(ws);
            gf::save_network(net, out_path);
            return 0;
        }

        if (bench_cmd->parsed()) {
            std::vector<std::string> files;
            for (const auto& entry : fs::directory_iterator(dir_path))
                if (entry.path().extension() == ".json") files.push_back(entry.path().string());
            std::sort(files.begin(), files.end());
            if (files.empty()) gf::raise(gf::ErrorKind::Io, "no .json networks in " + dir_path);

            std::vector<uint64_t> seeds;
            std::stringstream ss(seeds_csv);
            std::string tok;
            while (std::getline(ss, tok, ','))
                if (!tok.empty()) seeds.push_back(std::stoull(tok));

            struct Job {
                std::string file;
                uint64_t seed;
            };
            std::vector<Job> queue;
            for (const auto& f : files)
                for (uint64_t s : seeds) queue.push_back({f, s});
            std::vector<BenchRow> rows(queue.size());

            std::atomic<size_t> next{0};
            auto worker = [&] {
                for (size_t i = next.fetch_add(1); i < queue.size(); i = next.fetch_add(1)) {
                    const Job& job = queue[i];
                    BenchRow row;
                    row.seed = job.seed;
                    row.problem = problem;
                    row.mode = mode_str;
                    row.kappa = problem == 2 ? kappa : 0;
                    auto t0 = std::chrono::steady_clock::now();
                    try {
                        gf::DistributionNetwork net = gf::load_network(job.file);
                        row.network = net.name;
                        gf::SolverReport report;
                        if (problem == 2) {
                            gf::SearchOptions options;
                            options.kappa = kappa;
                            options.seed = job.seed;
                            options.forward.mode = mode_str == "greedy" ? gf::SolveMode::Greedy
                                                                        : gf::SolveMode::Stochastic;
                            report = gf::permutation_search(net, options);
                        } else {
                            gf::SolverOptions options;
                            options.seed = job.seed;
                            options.mode = mode_str == "greedy" ? gf::SolveMode::Greedy
                                                                : gf::SolveMode::Stochastic;
                            report = gf::forward_solve(net, parse_generators(net, generators_csv), options);
                        }
                        row.loss_kw = report.exact_loss_kw;
                        row.loss_fraction = report.loss_fraction;
                        row.feasible = report.feasibility.feasible;
                        row.iterations = report.evaluations;
                    } catch (const gf::SolverError& e) {
                        if (row.network.empty()) row.network = fs::path(job.file).stem().string();
                        gf::log::warn("bench: %s seed %llu failed: %s", job.file.c_str(),
                                      static_cast<unsigned long long>(job.seed), e.what());
                    }
                    row.time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
                    rows[i] = std::move(row);
                }
            };
            std::vector<std::thread> pool;
            for (int t = 0; t < std::max(1, jobs); ++t) pool.emplace_back(worker);
            for (auto& t : pool) t.join();

            const bool fresh = !fs::exists(out_path) || fs::file_size(out_path) == 0;
            std::ofstream csv(out_path, std::ios::app);
            if (!csv) gf::raise(gf::ErrorKind::Io, "cannot open " + out_path);
            if (fresh) csv << kCsvHeader;
            for (const auto& row : rows) csv << row.to_csv();
            return 0;
        }

        if (export_cmd->parsed()) {
            ordered_json rj = ordered_json::parse(gf::read_file(report_path));
            std::string net_path = network_path.empty() ? rj.at("network_path").get<std::string>()
                                                        : network_path;
            gf::DistributionNetwork net = gf::load_network(net_path);
            gf::SolverReport report;
            report.network_name = rj.at("network").get<std::string>();
            report.exact_loss_kw = rj.at("exact_loss_kw").get<double>();
            report.configuration = gf::configuration_from_json(rj.at("configuration").dump(), net);
            gf::OrientedForest forest = gf::orient(report.configuration, net);
            gf::PowerFlowSolution sol = gf::sweep_power_flow(net, forest, report.configuration.roots);
            if (!sol.converged)
                gf::raise(gf::ErrorKind::NotConverged, "re-evaluating the report's configuration failed");
            emit(gf::WarmStart::to_json(report, net, sol), out_path);
            return 0;
        }
    } catch (const gf::SolverError& e) {
        fail(e);
    } catch (const std::exception& e) {
        ordered_json j;
        j["error"] = "Error";
        j["message"] = e.what();
        std::cerr << j.dump() << "\n";
        return 2;
    }
    return 2;
}
