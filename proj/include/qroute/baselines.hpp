#pragma once

#include <cstdint>
#include <optional>

#include "qroute/env.hpp"

namespace qroute {

// Shortest-path walker: repeatedly picks the earliest schedulable gate and
// walks its endpoints together along a BFS shortest path. Deterministic.
RoutedCircuit route_basic(const LogicalCircuit& c, const Topology& t, const Mapping& m);

struct StochasticConfig {
    int trials = 20;        // random attempts per front layer
    int attempt_cap = 50;   // swap budget per attempt
    std::uint64_t seed = 0;
};

// Per front layer, tries `trials` seeded random swap sequences and commits
// the shortest one that schedules the whole layer; if none succeeds within
// the attempt cap, the layer is finished by the shortest-path walker.
// Deterministic per seed, and attempt k does not depend on the trial
// budget, so raising trials only widens the candidate set.
RoutedCircuit route_stochastic(const LogicalCircuit& c, const Topology& t, const Mapping& m,
                               const StochasticConfig& cfg = {});

struct SabreConfig {
    double lookahead_weight = 0.5;
    double decay = 1.001;   // per-swap multiplicative qubit penalty; 1.0 disables
    int window = 20;        // gates scored beyond the front layer
    long step_cap = kDefaultStepCap;
};

// Heuristic swap search: scores every swap touching a front-layer qubit by
// the summed post-swap distance of the front layer plus a weighted mean
// over the lookahead window, with a decay penalty on recently swapped
// qubits (reset whenever a gate schedules). Ties break to the lowest edge
// index. Falls back to the walker if the step cap is exhausted.
RoutedCircuit route_sabre(const LogicalCircuit& c, const Topology& t, const Mapping& m,
                          const SabreConfig& cfg = {});

inline constexpr long kOracleDefaultLimit = 2'000'000;

// Exact minimum SWAP count via breadth-first search over (mapping,
// remaining) states, canonicalized so idle logical qubits do not split
// equivalent states. Exhaustive only for small instances: beyond 8 physical
// qubits or 8 gates the default limit refuses up front; raising max_states
// past the default lifts that guard. Returns nullopt when the limit stops
// the search.
std::optional<int> optimal_swap_count(const LogicalCircuit& c, const Topology& t, const Mapping& m,
                                      long max_states = kOracleDefaultLimit);

// Same search, but reconstructs one optimal SWAP sequence as a routed
// circuit.
std::optional<RoutedCircuit> optimal_route(const LogicalCircuit& c, const Topology& t,
                                           const Mapping& m, long max_states = kOracleDefaultLimit);

}  // namespace qroute
