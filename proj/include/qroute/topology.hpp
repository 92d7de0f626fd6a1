#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace qroute {

// Connected undirected coupling graph over physical qubits. Edges are kept
// normalized (p < q), deduplicated, and sorted; a SWAP action index is the
// position of its edge in `edges`, so this ordering is part of the
// contract for policies, checkpoints, and search results.
struct Topology {
    int num_qubits = 0;
    std::vector<std::pair<int, int>> edges;

    [[nodiscard]] bool has_edge(int p, int q) const;
    [[nodiscard]] int edge_index(int p, int q) const;  // -1 when absent
    [[nodiscard]] const std::vector<int>& neighbors(int p) const;

    friend bool operator==(const Topology& a, const Topology& b) {
        return a.num_qubits == b.num_qubits && a.edges == b.edges;
    }

    // Populated by make_topology / parse_topology.
    std::vector<std::vector<int>> adjacency;
};

// Validates, normalizes and indexes an edge list. Throws on out-of-range
// endpoints, self-loops, duplicate edges, or a disconnected graph.
Topology make_topology(int num_qubits, std::vector<std::pair<int, int>> edges);

Topology ring_topology(int n);            // n >= 3
Topology grid_topology(int rows, int cols);
Topology guadalupe_topology();            // fixed 16-qubit device graph

// Accepts either a path to a topology JSON file or a named layout:
// ring<N>, line<N>, grid<R>x<C>, guadalupe, tokyo (grid 3x4), oqc (ring 8).
Topology topology_from_spec(const std::string& spec);

// All-pairs shortest-path hop counts (BFS per vertex).
using DistanceMatrix = Eigen::MatrixXi;
DistanceMatrix all_pairs_distance(const Topology& t);

// JSON topology format: {"num_qubits": n, "edges": [[p, q], ...]}.
Topology parse_topology(const std::string& json_text);
std::string serialize_topology(const Topology& t);

// Stable fingerprint over (num_qubits, normalized edge list); checkpoints
// record it so a model is never silently applied to the wrong device.
std::uint64_t topology_fingerprint(const Topology& t);

}  // namespace qroute
