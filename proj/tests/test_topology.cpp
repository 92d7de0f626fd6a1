#include "doctest.h"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "qroute/topology.hpp"

using namespace qroute;

TEST_CASE("ring(5): normalized sorted edges define the action order") {
    const Topology t = ring_topology(5);
    CHECK(t.num_qubits == 5);
    const std::vector<std::pair<int, int>> expected = {{0, 1}, {0, 4}, {1, 2}, {2, 3}, {3, 4}};
    CHECK(t.edges == expected);
    for (std::size_t i = 0; i < expected.size(); ++i) {
        CHECK(t.edge_index(expected[i].first, expected[i].second) == static_cast<int>(i));
        CHECK(t.edge_index(expected[i].second, expected[i].first) == static_cast<int>(i));
    }
    CHECK(t.has_edge(4, 0));
    CHECK_FALSE(t.has_edge(0, 2));
    CHECK(t.edge_index(0, 2) == -1);
    CHECK(t.neighbors(0) == std::vector<int>{1, 4});
}

TEST_CASE("grid(3,4) shape and distances") {
    const Topology t = grid_topology(3, 4);
    CHECK(t.num_qubits == 12);
    CHECK(t.edges.size() == 17);  // 3 rows * 3 + 2 * 4 columns
    const DistanceMatrix d = all_pairs_distance(t);
    CHECK(d(0, 0) == 0);
    CHECK(d(0, 11) == 5);  // opposite corners: 2 rows + 3 columns
    CHECK(d(0, 3) == 3);
    CHECK(d(3, 0) == 3);
}

TEST_CASE("ring(8) wraps distances around") {
    const Topology t = ring_topology(8);
    const DistanceMatrix d = all_pairs_distance(t);
    CHECK(d(0, 4) == 4);
    CHECK(d(0, 5) == 3);
    CHECK(d(0, 7) == 1);
}

TEST_CASE("distance matrix is a metric on the graph") {
    const Topology t = grid_topology(2, 3);
    const DistanceMatrix d = all_pairs_distance(t);
    for (int i = 0; i < t.num_qubits; ++i) {
        CHECK(d(i, i) == 0);
        for (int j = 0; j < t.num_qubits; ++j) {
            CHECK(d(i, j) == d(j, i));
            for (int k = 0; k < t.num_qubits; ++k) {
                CHECK(d(i, j) <= d(i, k) + d(k, j));
            }
        }
    }
    for (const auto& [p, q] : t.edges) CHECK(d(p, q) == 1);
}

TEST_CASE("guadalupe: 16 qubits, 16 edges, degree <= 3, connected") {
    const Topology t = guadalupe_topology();
    CHECK(t.num_qubits == 16);
    CHECK(t.edges.size() == 16);
    int max_degree = 0;
    for (int v = 0; v < 16; ++v) {
        max_degree = std::max(max_degree, static_cast<int>(t.neighbors(v).size()));
    }
    CHECK(max_degree == 3);
    const DistanceMatrix d = all_pairs_distance(t);
    for (int i = 0; i < 16; ++i) {
        for (int j = 0; j < 16; ++j) CHECK(d(i, j) >= 0);  // finite: connected
    }
}

TEST_CASE("make_topology normalizes and validates") {
    const Topology t = make_topology(3, {{2, 1}, {1, 0}});
    const std::vector<std::pair<int, int>> expected = {{0, 1}, {1, 2}};
    CHECK(t.edges == expected);

    CHECK_THROWS_AS(make_topology(3, {{0, 1}, {1, 3}}), std::runtime_error);  // out of range
    CHECK_THROWS_AS(make_topology(3, {{0, 1}, {1, 1}}), std::runtime_error);  // self-loop
    CHECK_THROWS_AS(make_topology(3, {{0, 1}, {1, 0}}), std::runtime_error);  // duplicate
    CHECK_THROWS_AS(make_topology(4, {{0, 1}, {2, 3}}), std::runtime_error);  // disconnected
    CHECK_THROWS_AS(make_topology(2, {}), std::runtime_error);                // no edges
}

TEST_CASE("named specs resolve to the documented layouts") {
    CHECK(topology_from_spec("ring5") == ring_topology(5));
    CHECK(topology_from_spec("grid3x4") == grid_topology(3, 4));
    CHECK(topology_from_spec("tokyo") == grid_topology(3, 4));
    CHECK(topology_from_spec("oqc") == ring_topology(8));
    CHECK(topology_from_spec("guadalupe") == guadalupe_topology());

    const Topology line = topology_from_spec("line4");
    CHECK(line.num_qubits == 4);
    const std::vector<std::pair<int, int>> expected = {{0, 1}, {1, 2}, {2, 3}};
    CHECK(line.edges == expected);

    CHECK_THROWS_AS(topology_from_spec("ring2"), std::runtime_error);
    CHECK_THROWS_AS(topology_from_spec("gibberish"), std::runtime_error);
    CHECK_THROWS_AS(topology_from_spec("grid0x4"), std::runtime_error);
}

TEST_CASE("topology_from_spec also accepts a JSON file path") {
    const std::string path = "test_topology_tmp.json";
    {
        std::ofstream out(path);
        out << serialize_topology(ring_topology(5));
    }
    CHECK(topology_from_spec(path) == ring_topology(5));
    std::remove(path.c_str());
}

TEST_CASE("topology JSON round-trips") {
    const Topology t = grid_topology(3, 4);
    const Topology back = parse_topology(serialize_topology(t));
    CHECK(back == t);
    CHECK(topology_fingerprint(back) == topology_fingerprint(t));

    CHECK_THROWS_AS(parse_topology("[1,2]"), std::runtime_error);
    CHECK_THROWS_AS(parse_topology(R"({"num_qubits": 3})"), std::runtime_error);
    CHECK_THROWS_AS(parse_topology(R"({"num_qubits": 3, "edges": [[0, 1]]})"),
                    std::runtime_error);  // disconnected
}

TEST_CASE("fingerprints separate devices and are stable") {
    const std::uint64_t ring5 = topology_fingerprint(ring_topology(5));
    CHECK(ring5 == topology_fingerprint(ring_topology(5)));
    CHECK(ring5 != topology_fingerprint(ring_topology(6)));
    CHECK(ring5 != topology_fingerprint(grid_topology(3, 4)));
    CHECK(topology_fingerprint(topology_from_spec("tokyo")) ==
          topology_fingerprint(grid_topology(3, 4)));
}

TEST_CASE("ring needs at least three qubits, grid positive extents") {
    CHECK_THROWS_AS(ring_topology(2), std::runtime_error);
    CHECK_THROWS_AS(grid_topology(0, 4), std::runtime_error);
    CHECK(grid_topology(1, 2).edges.size() == 1);  // degenerate line
}
