#include "qroute/topology.hpp"

#include <algorithm>
#include <deque>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace qroute {

bool Topology::has_edge(int p, int q) const {
    return edge_index(p, q) >= 0;
}

int Topology::edge_index(int p, int q) const {
    if (p > q) std::swap(p, q);
    const auto it = std::lower_bound(edges.begin(), edges.end(), std::make_pair(p, q));
    if (it != edges.end() && *it == std::make_pair(p, q)) {
        return static_cast<int>(it - edges.begin());
    }
    return -1;
}

const std::vector<int>& Topology::neighbors(int p) const {
    return adjacency.at(static_cast<std::size_t>(p));
}

Topology make_topology(int num_qubits, std::vector<std::pair<int, int>> edges) {
    if (num_qubits < 1) throw std::runtime_error("topology: num_qubits must be positive");

    for (auto& [p, q] : edges) {
        if (p < 0 || p >= num_qubits || q < 0 || q >= num_qubits) {
            throw std::runtime_error("topology: edge endpoint out of range");
        }
        if (p == q) throw std::runtime_error("topology: self-loop edge");
        if (p > q) std::swap(p, q);
    }
    std::sort(edges.begin(), edges.end());
    if (std::adjacent_find(edges.begin(), edges.end()) != edges.end()) {
        throw std::runtime_error("topology: duplicate edge");
    }

    Topology t;
    t.num_qubits = num_qubits;
    t.edges = std::move(edges);
    t.adjacency.assign(static_cast<std::size_t>(num_qubits), {});
    for (const auto& [p, q] : t.edges) {
        t.adjacency[static_cast<std::size_t>(p)].push_back(q);
        t.adjacency[static_cast<std::size_t>(q)].push_back(p);
    }
    for (auto& nbrs : t.adjacency) std::sort(nbrs.begin(), nbrs.end());

    // Connectivity check; routing distances are undefined otherwise.
    std::vector<char> seen(static_cast<std::size_t>(num_qubits), 0);
    std::deque<int> frontier{0};
    seen[0] = 1;
    int reached = 1;
    while (!frontier.empty()) {
        const int v = frontier.front();
        frontier.pop_front();
        for (int w : t.adjacency[static_cast<std::size_t>(v)]) {
            if (!seen[static_cast<std::size_t>(w)]) {
                seen[static_cast<std::size_t>(w)] = 1;
                ++reached;
                frontier.push_back(w);
            }
        }
    }
    if (reached != num_qubits) throw std::runtime_error("topology: graph is not connected");
    return t;
}

Topology ring_topology(int n) {
    if (n < 3) throw std::runtime_error("ring topology needs at least three qubits");
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i < n; ++i) edges.emplace_back(i, (i + 1) % n);
    return make_topology(n, std::move(edges));
}

Topology grid_topology(int rows, int cols) {
    if (rows < 1 || cols < 1 || rows * cols < 2) {
        throw std::runtime_error("grid topology needs at least two qubits");
    }
    std::vector<std::pair<int, int>> edges;
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            const int v = r * cols + c;
            if (c + 1 < cols) edges.emplace_back(v, v + 1);
            if (r + 1 < rows) edges.emplace_back(v, v + cols);
        }
    }
    return make_topology(rows * cols, std::move(edges));
}

Topology guadalupe_topology() {
    return make_topology(16, {{0, 1}, {1, 2}, {2, 3}, {3, 5}, {1, 4}, {4, 7}, {5, 8}, {6, 7},
                              {7, 10}, {8, 9}, {8, 11}, {10, 12}, {11, 14}, {12, 13}, {12, 15},
                              {13, 14}});
}

namespace {

bool parse_int_after(const std::string& s, std::size_t pos, int& out) {
    if (pos >= s.size()) return false;
    for (std::size_t i = pos; i < s.size(); ++i) {
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
    }
    out = std::stoi(s.substr(pos));
    return true;
}

}  // namespace

Topology topology_from_spec(const std::string& spec) {
    if (std::filesystem::exists(spec)) {
        std::ifstream in(spec);
        if (!in) throw std::runtime_error("cannot open topology file: " + spec);
        std::stringstream buf;
        buf << in.rdbuf();
        return parse_topology(buf.str());
    }
    if (spec == "guadalupe") return guadalupe_topology();
    if (spec == "tokyo") return grid_topology(3, 4);
    if (spec == "oqc") return ring_topology(8);
    int n = 0;
    if (spec.rfind("ring", 0) == 0 && parse_int_after(spec, 4, n)) return ring_topology(n);
    if (spec.rfind("line", 0) == 0 && parse_int_after(spec, 4, n)) return grid_topology(1, n);
    if (spec.rfind("grid", 0) == 0) {
        const auto x = spec.find('x', 4);
        if (x != std::string::npos) {
            int rows = 0;
            int cols = 0;
            const std::string r = spec.substr(4, x - 4);
            if (!r.empty() && std::all_of(r.begin(), r.end(), [](unsigned char ch) {
                    return std::isdigit(ch);
                }) &&
                parse_int_after(spec, x + 1, cols)) {
                rows = std::stoi(r);
                return grid_topology(rows, cols);
            }
        }
    }
    throw std::runtime_error("unknown topology spec: " + spec +
                             " (expected a file path, ring<N>, line<N>, grid<R>x<C>, "
                             "guadalupe, tokyo, or oqc)");
}

DistanceMatrix all_pairs_distance(const Topology& t) {
    const int n = t.num_qubits;
    DistanceMatrix dist(n, n);
    dist.setConstant(-1);
    for (int src = 0; src < n; ++src) {
        dist(src, src) = 0;
        std::deque<int> frontier{src};
        while (!frontier.empty()) {
            const int v = frontier.front();
            frontier.pop_front();
            for (int w : t.neighbors(v)) {
                if (dist(src, w) < 0) {
                    dist(src, w) = dist(src, v) + 1;
                    frontier.push_back(w);
                }
            }
        }
    }
    if ((dist.array() < 0).any()) {
        throw std::runtime_error("topology: graph is not connected");
    }
    return dist;
}

Topology parse_topology(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::runtime_error(std::string("topology: malformed JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("num_qubits") || !j["num_qubits"].is_number_integer() ||
        !j.contains("edges") || !j["edges"].is_array()) {
        throw std::runtime_error("topology: expected {num_qubits, edges}");
    }
    std::vector<std::pair<int, int>> edges;
    for (const auto& e : j["edges"]) {
        if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() ||
            !e[1].is_number_integer()) {
            throw std::runtime_error("topology: each edge must be a pair of integers");
        }
        edges.emplace_back(e[0].get<int>(), e[1].get<int>());
    }
    return make_topology(j["num_qubits"].get<int>(), std::move(edges));
}

std::string serialize_topology(const Topology& t) {
    nlohmann::ordered_json j;
    j["num_qubits"] = t.num_qubits;
    auto edges = nlohmann::ordered_json::array();
    for (const auto& [p, q] : t.edges) edges.push_back({p, q});
    j["edges"] = std::move(edges);
    return j.dump();
}

std::uint64_t topology_fingerprint(const Topology& t) {
    // FNV-1a over the qubit count and the normalized edge list.
    std::uint64_t h = 0xcbf29ce484222325ull;
    auto absorb = [&h](std::uint64_t v) {
        for (int b = 0; b < 8; ++b) {
            h ^= (v >> (8 * b)) & 0xff;
            h *= 0x100000001b3ull;
        }
    };
    absorb(static_cast<std::uint64_t>(t.num_qubits));
    for (const auto& [p, q] : t.edges) {
        absorb(static_cast<std::uint64_t>(p));
        absorb(static_cast<std::uint64_t>(q));
    }
    return h;
}

}  // namespace qroute
