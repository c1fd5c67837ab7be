#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

#include "fixtures.hpp"
#include "gridforest/network_io.hpp"
#include "gridforest/radial.hpp"
#include "gridforest/report.hpp"

using namespace gridforest;
using namespace gridforest::testing;
namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

std::string cli() {
    const char* env = std::getenv("GRIDFOREST_CLI");
    REQUIRE_MESSAGE(env != nullptr, "GRIDFOREST_CLI must point at the built binary");
    return env;
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("gridforest_cli_" + std::to_string(::getpid()) + "_" +
                                            std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    static int& counter() {
        static int c = 0;
        return c;
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

int run(const std::string& args) {
    int rc = std::system((cli() + " " + args + " >/dev/null 2>/dev/null").c_str());
    return WEXITSTATUS(rc);
}

std::string strip_timings(const std::string& json_text) {
    ordered_json j = ordered_json::parse(json_text);
    j.erase("timings");
    return j.dump(2);
}

void write_tiny6(const std::string& path) { save_network(tiny6(), path); }

}  // namespace

TEST_CASE("generate then validate round-trip") {
    TempDir dir;
    std::string net_path = dir.file("ws.json");
    CHECK(run("generate --nodes 24 --degree 4 --sources 2 --demand-kw 5000 --gen-ratio 3.0 --seed 5 --out " +
              net_path) == 0);
    CHECK(fs::exists(net_path));
    CHECK(run("validate --network " + net_path) == 0);
}

TEST_CASE("solve emits a report and deterministic reruns") {
    TempDir dir;
    std::string net_path = dir.file("tiny6.json");
    write_tiny6(net_path);

    std::string r1 = dir.file("r1.json"), r2 = dir.file("r2.json");
    CHECK(run("solve --network " + net_path + " --generators g1,g3 --seed 7 --out " + r1) == 0);
    CHECK(run("solve --network " + net_path + " --generators g1,g3 --seed 7 --out " + r2) == 0);
    CHECK(strip_timings(read_file(r1)) == strip_timings(read_file(r2)));

    ordered_json report = ordered_json::parse(read_file(r1));
    CHECK(report["problem"] == 1);
    CHECK(report["feasibility"]["feasible"] == true);
    CHECK(report["configuration"]["selected"].size() == 4);  // 6 buses, 2 roots
}

TEST_CASE("search matches the oracle on tiny6 and parallel equals serial") {
    TempDir dir;
    std::string net_path = dir.file("tiny6.json");
    write_tiny6(net_path);

    std::string s1 = dir.file("s1.json"), s2 = dir.file("s2.json"), o1 = dir.file("o1.json");
    CHECK(run("search --network " + net_path + " --kappa 1 --seed 7 --out " + s1) == 0);
    CHECK(run("oracle --network " + net_path + " --kappa 1 --out " + o1) == 0);
    ordered_json search = ordered_json::parse(read_file(s1));
    ordered_json oracle = ordered_json::parse(read_file(o1));
    CHECK(search["active_set"] == oracle["best_set"]);

    CHECK(run("search --network " + net_path + " --kappa 1 --seed 7 --jobs 3 --out " + s2) == 0);
    CHECK(strip_timings(read_file(s1)) == strip_timings(read_file(s2)));
}

TEST_CASE("warm-start export round-trips") {
    TempDir dir;
    std::string net_path = dir.file("tiny6.json");
    write_tiny6(net_path);

    std::string report_path = dir.file("report.json"), warm_path = dir.file("warm.json");
    REQUIRE(run("solve --network " + net_path + " --seed 3 --out " + report_path) == 0);
    REQUIRE(run("export-warmstart --report " + report_path + " --network " + net_path + " --out " +
                warm_path) == 0);

    DistributionNetwork net = load_network(net_path);
    ordered_json report = ordered_json::parse(read_file(report_path));
    ordered_json warm = ordered_json::parse(read_file(warm_path));

    // gamma sum = N - #components
    int gamma_sum = 0;
    for (const auto& g : warm["gamma"]) gamma_sum += g["value"].get<int>();
    int n_components = static_cast<int>(report["configuration"]["roots"].size());
    CHECK(gamma_sum == net.n_buses() - n_components);

    // reconstruct the configuration and reproduce the loss
    RadialConfiguration config = WarmStart::configuration_from_json(read_file(warm_path), net);
    OrientedForest forest = orient(config, net);
    PowerFlowSolution sol = sweep_power_flow(net, forest, config.roots);
    REQUIRE(sol.converged);
    double loss = exact_loss_kw(sol, net);
    CHECK(loss == doctest::Approx(report["exact_loss_kw"].get<double>()).epsilon(1e-9));

    // flows and voltages come from the converged sweep
    CHECK(warm["x"].size() > 0);
    CHECK(warm["v"].size() == static_cast<size_t>(net.n_buses()) * 3);
}

TEST_CASE("bench writes schema-stable CSV rows") {
    TempDir dir;
    fs::create_directories(dir.path / "nets");
    save_network(tiny6(), (dir.path / "nets" / "tiny6.json").string());
    save_network(path3(), (dir.path / "nets" / "path3.json").string());

    std::string csv_path = dir.file("bench.csv");
    CHECK(run("bench --dir " + (dir.path / "nets").string() + " --seeds 1,2 --problem 1 --jobs 2 --out " +
              csv_path) == 0);

    std::ifstream csv(csv_path);
    std::string line;
    std::getline(csv, line);
    CHECK(line == "network,problem,mode,kappa,seed,loss_kw,loss_fraction,feasible,iterations,time_s");
    int rows = 0;
    while (std::getline(csv, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 4);  // 2 networks x 2 seeds

    // append-only on rerun
    CHECK(run("bench --dir " + (dir.path / "nets").string() + " --seeds 3 --problem 1 --out " + csv_path) ==
          0);
    std::ifstream csv2(csv_path);
    rows = 0;
    while (std::getline(csv2, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 1 + 4 + 2);
}

TEST_CASE("exit codes distinguish infeasibility from input errors") {
    TempDir dir;

    SUBCASE("malformed JSON is an input error") {
        std::string bad = dir.file("bad.json");
        std::ofstream(bad) << "{ not json";
        CHECK(run("solve --network " + bad) == 2);
    }
    SUBCASE("unknown generator id is an input error") {
        std::string net_path = dir.file("tiny6.json");
        write_tiny6(net_path);
        CHECK(run("solve --network " + net_path + " --generators nosuch") == 2);
    }
    SUBCASE("infeasible network exits 1") {
        DistributionNetwork net = NetworkBuilder("hopeless")
                                      .generator("g1", 5000.0, 2500.0)
                                      .consumer("c", 900.0, 100.0)
                                      .line("g1", "c", 0.01, 0.01, 50.0, 50.0)
                                      .build();
        std::string net_path = dir.file("hopeless.json");
        save_network(net, net_path);
        CHECK(run("solve --network " + net_path) == 1);
    }
    SUBCASE("validate flags issues with exit 1") {
        DistributionNetwork net = NetworkBuilder("lowgen")
                                      .generator("g1", 100.0, 100.0)
                                      .consumer("c1", 500.0, 0.0)
                                      .line("g1", "c1", 0.01, 0.01)
                                      .build();
        std::string net_path = dir.file("lowgen.json");
        save_network(net, net_path);
        CHECK(run("validate --network " + net_path) == 1);
    }
}
