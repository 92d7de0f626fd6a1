#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace qroute {

// A two-qubit gate acting on logical qubits q1 and q2. The pair is
// unordered semantically; q1/q2 preserve the order they were given in so
// serialization round-trips byte for byte.
struct Gate {
    int q1 = 0;
    int q2 = 0;

    friend bool operator==(const Gate&, const Gate&) = default;
};

// A logical circuit reduced to its two-qubit gates, in program order.
// Single-qubit gates are irrelevant for routing; the parser drops them and
// records how many were dropped.
struct LogicalCircuit {
    int num_qubits = 0;
    std::vector<Gate> gates;
    int dropped_single_qubit_gates = 0;

    friend bool operator==(const LogicalCircuit& a, const LogicalCircuit& b) {
        return a.num_qubits == b.num_qubits && a.gates == b.gates;
    }
};

// Immediate-predecessor DAG over gates plus per-gate depth. Gate j is a
// predecessor of gate i when j is the most recent earlier gate sharing one
// of i's qubits. depth[i] = 1 + max depth over predecessors (1 if none).
struct DagIndex {
    std::vector<std::vector<int>> predecessors;
    std::vector<int> depth;
};

DagIndex build_dag(const LogicalCircuit& c);

// JSON circuit format: {"num_qubits": n, "gates": [[q1, q2], ...]}.
// One-element gate entries are dropped (counted); anything else malformed
// throws std::runtime_error with a description.
LogicalCircuit parse_circuit(const std::string& json_text);
std::string serialize_circuit(const LogicalCircuit& c);

enum class BenchmarkKind {
    Regular,
    Erdos,
    Qft,
    Qv,
    Ghz,
    Bv,
    Hs,
    Random,
};

BenchmarkKind benchmark_kind_from_string(const std::string& name);
std::string to_string(BenchmarkKind kind);

struct BenchmarkParams {
    int layers = 1;            // QAOA layer count for regular / erdos
    double edge_prob = 0.5;    // erdos edge probability
    std::string bitstring;     // bv hidden string; empty = seeded random
    int gate_count = -1;       // random family; required there
};

// Fills family-dependent defaults: the random family defaults to 3*n
// gates when no count was given.
BenchmarkParams resolve_benchmark_defaults(BenchmarkKind kind, int num_qubits,
                                           BenchmarkParams params);

// Deterministic circuit families. Identical (kind, n, seed, params) give
// identical circuits.
//
//   regular  QAOA layers over a seeded random 3-regular graph (n even, >= 4)
//   erdos    QAOA layers over a seeded Erdos-Renyi graph G(n, edge_prob)
//   qft      all pairs (i, j), i < j, in nested loop order
//   qv       n layers of seeded random disjoint pairings
//   ghz      chain (0,1), (1,2), ..., (n-2, n-1)
//   bv       gate (i, n-1) for every set bit i of the hidden string
//   hs       pairing layers [A, A, B] from two seeded pairings
//   random   gate_count uniformly sampled distinct pairs
LogicalCircuit generate_benchmark(BenchmarkKind kind, int num_qubits, std::uint64_t seed,
                                  const BenchmarkParams& params = {});

}  // namespace qroute
