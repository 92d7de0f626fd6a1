#include "qroute/circuit.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>
#include <utility>

#include "json.hpp"

#include "qroute/rng.hpp"

namespace qroute {

namespace {

void check_gate_qubits(int q1, int q2, int num_qubits, int position) {
    const std::string where = "gate " + std::to_string(position);
    if (q1 < 0 || q1 >= num_qubits || q2 < 0 || q2 >= num_qubits) {
        throw std::runtime_error(where + ": qubit id out of range for num_qubits=" +
                                 std::to_string(num_qubits));
    }
    if (q1 == q2) {
        throw std::runtime_error(where + ": duplicate qubit within a gate");
    }
}

}  // namespace

DagIndex build_dag(const LogicalCircuit& c) {
    DagIndex dag;
    const int m = static_cast<int>(c.gates.size());
    dag.predecessors.assign(static_cast<std::size_t>(m), {});
    dag.depth.assign(static_cast<std::size_t>(m), 1);

    std::vector<int> last_gate_on(static_cast<std::size_t>(c.num_qubits), -1);
    for (int i = 0; i < m; ++i) {
        const Gate& g = c.gates[static_cast<std::size_t>(i)];
        int depth = 1;
        for (int q : {g.q1, g.q2}) {
            const int p = last_gate_on[static_cast<std::size_t>(q)];
            if (p >= 0) {
                auto& preds = dag.predecessors[static_cast<std::size_t>(i)];
                if (std::find(preds.begin(), preds.end(), p) == preds.end()) {
                    preds.push_back(p);
                }
                depth = std::max(depth, dag.depth[static_cast<std::size_t>(p)] + 1);
            }
        }
        std::sort(dag.predecessors[static_cast<std::size_t>(i)].begin(),
                  dag.predecessors[static_cast<std::size_t>(i)].end());
        dag.depth[static_cast<std::size_t>(i)] = depth;
        last_gate_on[static_cast<std::size_t>(g.q1)] = i;
        last_gate_on[static_cast<std::size_t>(g.q2)] = i;
    }
    return dag;
}

LogicalCircuit parse_circuit(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::runtime_error(std::string("circuit: malformed JSON: ") + e.what());
    }
    if (!j.is_object()) throw std::runtime_error("circuit: top level must be an object");
    if (!j.contains("num_qubits") || !j["num_qubits"].is_number_integer()) {
        throw std::runtime_error("circuit: missing integer field num_qubits");
    }
    if (!j.contains("gates") || !j["gates"].is_array()) {
        throw std::runtime_error("circuit: missing array field gates");
    }

    LogicalCircuit c;
    c.num_qubits = j["num_qubits"].get<int>();
    if (c.num_qubits < 1) throw std::runtime_error("circuit: num_qubits must be positive");

    int position = 0;
    for (const auto& entry : j["gates"]) {
        if (!entry.is_array()) {
            throw std::runtime_error("circuit: gate " + std::to_string(position) +
                                     " is not an array");
        }
        for (const auto& v : entry) {
            if (!v.is_number_integer()) {
                throw std::runtime_error("circuit: gate " + std::to_string(position) +
                                         " has a non-integer qubit id");
            }
        }
        if (entry.size() == 1) {
            const int q = entry[0].get<int>();
            if (q < 0 || q >= c.num_qubits) {
                throw std::runtime_error("circuit: gate " + std::to_string(position) +
                                         ": qubit id out of range");
            }
            ++c.dropped_single_qubit_gates;
        } else if (entry.size() == 2) {
            const int q1 = entry[0].get<int>();
            const int q2 = entry[1].get<int>();
            check_gate_qubits(q1, q2, c.num_qubits, position);
            c.gates.push_back(Gate{q1, q2});
        } else {
            throw std::runtime_error("circuit: gate " + std::to_string(position) +
                                     " must list one or two qubits");
        }
        ++position;
    }
    return c;
}

std::string serialize_circuit(const LogicalCircuit& c) {
    nlohmann::ordered_json j;
    j["num_qubits"] = c.num_qubits;
    auto gates = nlohmann::ordered_json::array();
    for (const Gate& g : c.gates) {
        gates.push_back({g.q1, g.q2});
    }
    j["gates"] = std::move(gates);
    return j.dump();
}

BenchmarkKind benchmark_kind_from_string(const std::string& name) {
    if (name == "regular") return BenchmarkKind::Regular;
    if (name == "erdos") return BenchmarkKind::Erdos;
    if (name == "qft") return BenchmarkKind::Qft;
    if (name == "qv") return BenchmarkKind::Qv;
    if (name == "ghz") return BenchmarkKind::Ghz;
    if (name == "bv") return BenchmarkKind::Bv;
    if (name == "hs") return BenchmarkKind::Hs;
    if (name == "random") return BenchmarkKind::Random;
    throw std::runtime_error("unknown benchmark kind: " + name);
}

std::string to_string(BenchmarkKind kind) {
    switch (kind) {
        case BenchmarkKind::Regular: return "regular";
        case BenchmarkKind::Erdos: return "erdos";
        case BenchmarkKind::Qft: return "qft";
        case BenchmarkKind::Qv: return "qv";
        case BenchmarkKind::Ghz: return "ghz";
        case BenchmarkKind::Bv: return "bv";
        case BenchmarkKind::Hs: return "hs";
        case BenchmarkKind::Random: return "random";
    }
    throw std::runtime_error("unknown benchmark kind");
}

namespace {

// Configuration-model sample of a simple 3-regular graph, resampling on
// self-loops or parallel edges. Returns normalized (a < b) edges in
// lexicographic order.
std::vector<std::pair<int, int>> random_3_regular(int n, Rng& rng) {
    if (n < 4 || n % 2 != 0) {
        throw std::runtime_error("regular benchmark needs an even qubit count >= 4");
    }
    for (int attempt = 0; attempt < 10000; ++attempt) {
        std::vector<int> stubs;
        stubs.reserve(static_cast<std::size_t>(3 * n));
        for (int v = 0; v < n; ++v) {
            for (int k = 0; k < 3; ++k) stubs.push_back(v);
        }
        rng.shuffle(stubs);

        std::set<std::pair<int, int>> edges;
        bool ok = true;
        for (std::size_t i = 0; i + 1 < stubs.size(); i += 2) {
            int a = stubs[i];
            int b = stubs[i + 1];
            if (a == b) {
                ok = false;
                break;
            }
            if (a > b) std::swap(a, b);
            if (!edges.insert({a, b}).second) {
                ok = false;
                break;
            }
        }
        if (ok) return {edges.begin(), edges.end()};
    }
    throw std::runtime_error("failed to sample a simple 3-regular graph");
}

std::vector<std::pair<int, int>> disjoint_pairing(int n, Rng& rng) {
    const std::vector<int> perm = rng.permutation(n);
    std::vector<std::pair<int, int>> pairs;
    for (int k = 0; k + 1 < n; k += 2) {
        pairs.emplace_back(perm[static_cast<std::size_t>(k)],
                           perm[static_cast<std::size_t>(k + 1)]);
    }
    return pairs;
}

void append_layer(LogicalCircuit& c, const std::vector<std::pair<int, int>>& layer) {
    for (const auto& [a, b] : layer) {
        c.gates.push_back(Gate{a, b});
    }
}

}  // namespace

BenchmarkParams resolve_benchmark_defaults(BenchmarkKind kind, int num_qubits,
                                           BenchmarkParams params) {
    if (kind == BenchmarkKind::Random && params.gate_count < 0) {
        params.gate_count = 3 * num_qubits;
    }
    return params;
}

LogicalCircuit generate_benchmark(BenchmarkKind kind, int num_qubits, std::uint64_t seed,
                                  const BenchmarkParams& params) {
    if (num_qubits < 2) {
        throw std::runtime_error("benchmark circuits need at least two qubits");
    }
    LogicalCircuit c;
    c.num_qubits = num_qubits;
    Rng rng(seed);

    switch (kind) {
        case BenchmarkKind::Ghz: {
            for (int i = 0; i + 1 < num_qubits; ++i) {
                c.gates.push_back(Gate{i, i + 1});
            }
            break;
        }
        case BenchmarkKind::Qft: {
            for (int i = 0; i < num_qubits; ++i) {
                for (int j = i + 1; j < num_qubits; ++j) {
                    c.gates.push_back(Gate{i, j});
                }
            }
            break;
        }
        case BenchmarkKind::Bv: {
            std::string bits = params.bitstring;
            if (bits.empty()) {
                bits.resize(static_cast<std::size_t>(num_qubits - 1));
                for (char& ch : bits) ch = rng.below(2) ? '1' : '0';
            }
            if (static_cast<int>(bits.size()) != num_qubits - 1) {
                throw std::runtime_error("bv bitstring length must be num_qubits - 1");
            }
            for (int i = 0; i < num_qubits - 1; ++i) {
                const char ch = bits[static_cast<std::size_t>(i)];
                if (ch != '0' && ch != '1') {
                    throw std::runtime_error("bv bitstring must contain only 0 and 1");
                }
                if (ch == '1') c.gates.push_back(Gate{i, num_qubits - 1});
            }
            break;
        }
        case BenchmarkKind::Regular: {
            if (params.layers < 1) throw std::runtime_error("layer count must be >= 1");
            const auto graph = random_3_regular(num_qubits, rng);
            for (int layer = 0; layer < params.layers; ++layer) append_layer(c, graph);
            break;
        }
        case BenchmarkKind::Erdos: {
            if (params.layers < 1) throw std::runtime_error("layer count must be >= 1");
            if (params.edge_prob < 0.0 || params.edge_prob > 1.0) {
                throw std::runtime_error("erdos edge probability must be in [0, 1]");
            }
            std::vector<std::pair<int, int>> graph;
            for (int i = 0; i < num_qubits; ++i) {
                for (int j = i + 1; j < num_qubits; ++j) {
                    if (rng.uniform() < params.edge_prob) graph.emplace_back(i, j);
                }
            }
            for (int layer = 0; layer < params.layers; ++layer) append_layer(c, graph);
            break;
        }
        case BenchmarkKind::Qv: {
            for (int layer = 0; layer < num_qubits; ++layer) {
                append_layer(c, disjoint_pairing(num_qubits, rng));
            }
            break;
        }
        case BenchmarkKind::Hs: {
            const auto a = disjoint_pairing(num_qubits, rng);
            const auto b = disjoint_pairing(num_qubits, rng);
            append_layer(c, a);
            append_layer(c, a);
            append_layer(c, b);
            break;
        }
        case BenchmarkKind::Random: {
            if (params.gate_count < 0) {
                throw std::runtime_error("random benchmark requires a gate count");
            }
            for (int k = 0; k < params.gate_count; ++k) {
                const int q1 = rng.below(num_qubits);
                int q2 = rng.below(num_qubits - 1);
                if (q2 >= q1) ++q2;
                c.gates.push_back(Gate{q1, q2});
            }
            break;
        }
    }
    return c;
}

}  // namespace qroute
