#include "doctest.h"

#include <set>

#include "gridforest/netgen.hpp"
#include "gridforest/network_io.hpp"
#include "gridforest/radial.hpp"

using namespace gridforest;

TEST_CASE("pure ring lattice when rewire_prob is zero") {
    WsParams p{20, 4, 0.0, 2, 4000.0, 3.0, 5, false};
    DistributionNetwork net = generate_ws(p);
    CHECK(net.n_edges() == 20 * 4 / 2);
    // ring lattice: every bus has degree exactly 4
    for (int b = 0; b < net.n_buses(); ++b) CHECK(net.adjacency[b].size() == 4);
}

TEST_CASE("rewiring preserves the edge count") {
    for (double prob : {0.1, 0.5, 1.0}) {
        WsParams p{24, 6, prob, 3, 5000.0, 3.0, 9, false};
        DistributionNetwork net = generate_ws(p);
        CHECK(net.n_edges() == 24 * 6 / 2);
    }
}

TEST_CASE("same seed gives byte-identical files, different seed differs") {
    WsParams p{30, 6, 0.2, 3, 6000.0, 3.5, 77, false};
    std::string a = save_network_to_string(generate_ws(p));
    std::string b = save_network_to_string(generate_ws(p));
    CHECK(a == b);
    p.seed = 78;
    CHECK(save_network_to_string(generate_ws(p)) != a);
}

TEST_CASE("totals hit the targets within 0.01 percent") {
    WsParams p{60, 8, 0.15, 4, 33000.0, 4.44, 5, false};
    DistributionNetwork net = generate_ws(p);
    CHECK(net.total_demand_kw() == doctest::Approx(33000.0).epsilon(1e-4));
    CHECK(net.total_generation_kw() == doctest::Approx(4.44 * 33000.0).epsilon(1e-4));
    CHECK(net.n_generators() == 4);
}

TEST_CASE("WS-120 profile") {
    WsParams p{120, 10, 0.1, 5, 65726.0, 292115.6 / 65726.0, 1, false};
    DistributionNetwork net = generate_ws(p);
    CHECK(net.n_buses() == 120);
    CHECK(net.n_generators() == 5);
    CHECK(net.total_demand_kw() == doctest::Approx(65726.0).epsilon(1e-4));
    CHECK(net.total_generation_kw() == doctest::Approx(292115.6).epsilon(1e-4));
    CHECK(validate_network(net).empty());

    SUBCASE("round-trips through the canonical serialization") {
        std::string first = save_network_to_string(net);
        DistributionNetwork reloaded = load_network_from_string(first);
        CHECK(save_network_to_string(reloaded) == first);
    }
}

TEST_CASE("generated graphs are connected") {
    for (uint64_t seed = 0; seed < 10; ++seed) {
        WsParams p{40, 4, 0.3, 3, 8000.0, 3.0, seed, false};
        DistributionNetwork net = generate_ws(p);
        CHECK(validate_network(net).empty());  // includes the connectivity check
    }
}

TEST_CASE("hub placement selects the highest-degree buses") {
    WsParams p{30, 4, 0.4, 3, 6000.0, 3.0, 13, true};
    DistributionNetwork net = generate_ws(p);
    std::multiset<size_t> degrees;
    for (int b = 0; b < net.n_buses(); ++b) degrees.insert(net.adjacency[b].size());
    size_t min_gen_degree = SIZE_MAX;
    for (int g : net.generator_pool) min_gen_degree = std::min(min_gen_degree, net.adjacency[g].size());
    // no consumer may have degree strictly above every generator
    size_t above = 0;
    for (int b = 0; b < net.n_buses(); ++b)
        if (!net.buses[b].is_generator() && net.adjacency[b].size() > min_gen_degree) ++above;
    // ties can push a consumer to equal degree, never above all hubs
    CHECK(above == 0);
}

TEST_CASE("invalid parameters are rejected") {
    CHECK_THROWS_AS(generate_ws({20, 5, 0.1, 2, 4000.0, 3.0, 1, false}), SolverError);   // odd degree
    CHECK_THROWS_AS(generate_ws({20, 4, 0.1, 2, 4000.0, 0.9, 1, false}), SolverError);   // ratio <= 1
    CHECK_THROWS_AS(generate_ws({20, 4, 1.5, 2, 4000.0, 3.0, 1, false}), SolverError);   // bad prob
    CHECK_THROWS_AS(generate_ws({20, 4, 0.1, 25, 4000.0, 3.0, 1, false}), SolverError);  // too many sources
}
