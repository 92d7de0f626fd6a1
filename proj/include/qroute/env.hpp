#pragma once

#include <functional>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "qroute/circuit.hpp"
#include "qroute/topology.hpp"

namespace qroute {

// Bijection between logical and physical qubits. Always covers every
// physical qubit; circuits narrower than the device are padded with idle
// logical qubits so the bijection stays total.
struct Mapping {
    std::vector<int> log_to_phys;
    std::vector<int> phys_to_log;

    [[nodiscard]] int size() const { return static_cast<int>(log_to_phys.size()); }
    [[nodiscard]] bool is_valid() const;
    void apply_swap(int p, int q);  // swap the logical occupants of p and q

    friend bool operator==(const Mapping&, const Mapping&) = default;
};

Mapping trivial_mapping(int n);
Mapping random_mapping(int n, std::uint64_t seed);

// Immutable per-instance data shared by all states of one routing run.
struct EnvContext {
    LogicalCircuit circuit;
    DagIndex dag;
    Topology topology;
    DistanceMatrix dist;
};

std::shared_ptr<const EnvContext> make_env_context(const LogicalCircuit& c, const Topology& t);

// One state of the routing MDP: which gates remain and where the logical
// qubits sit. States are value types; stepping never mutates its input.
struct RoutingState {
    std::shared_ptr<const EnvContext> ctx;
    std::vector<int> remaining;      // unscheduled gate indices, ascending
    std::vector<char> in_remaining;  // membership bitmap over all gates
    Mapping mapping;
    int swaps_applied = 0;

    [[nodiscard]] bool gate_remaining(int gate) const {
        return in_remaining[static_cast<std::size_t>(gate)] != 0;
    }
};

// Builds the initial state and greedily schedules every gate that is
// already executable under m (all predecessors scheduled and mapped
// endpoints adjacent, cascading in program order). This pass earns no
// reward. Throws if the circuit is wider than the topology or m does not
// cover the device.
RoutingState init_state(const std::shared_ptr<const EnvContext>& ctx, const Mapping& m);
RoutingState init_state(const LogicalCircuit& c, const Topology& t, const Mapping& m);

bool is_terminal(const RoutingState& s);

struct StepResult {
    RoutingState state;
    int reward = 0;              // gates scheduled this step minus one
    std::vector<int> scheduled;  // gate indices scheduled, in order
};

// Applies SWAP on topology edge (p, q), then schedules every gate whose
// predecessors are all scheduled and whose mapped qubits are adjacent,
// cascading in program order. Throws on a terminal state or a non-edge.
StepResult step(const RoutingState& s, std::pair<int, int> swap_edge);

struct SwapOp {
    int p = 0;
    int q = 0;
    friend bool operator==(const SwapOp&, const SwapOp&) = default;
};
struct ExecOp {
    int gate = 0;
    int p = 0;  // physical qubits the gate executes on
    int q = 0;
    friend bool operator==(const ExecOp&, const ExecOp&) = default;
};
using RoutedOp = std::variant<SwapOp, ExecOp>;

// A hardware-compliant schedule: the op list interleaves SWAPs with gate
// executions in a valid order for the recorded initial mapping.
struct RoutedCircuit {
    Mapping initial_mapping;
    std::vector<RoutedOp> ops;
    int swap_count = 0;
    bool fallback_used = false;
};

using Policy = std::function<std::pair<int, int>(const RoutingState&)>;

inline constexpr long kDefaultStepCap = -1;  // resolve to 10*|gates| + 50

// Drives a policy from init_state(c, t, m) to termination, recording every
// SWAP and execution. If the policy has not terminated within step_cap
// swaps, the remainder is routed by the deterministic shortest-path walker
// and fallback_used is set. Throws if the policy returns a non-edge.
RoutedCircuit route(const LogicalCircuit& c, const Topology& t, const Mapping& m,
                    const Policy& policy, long step_cap = kDefaultStepCap);

// Deterministic shortest-path step for the earliest schedulable gate:
// swap from the lower-indexed mapped endpoint toward the other, tie-broken
// by lowest next-vertex index. Total as long as s is non-terminal.
std::pair<int, int> basic_next_swap(const RoutingState& s);

struct VerifyResult {
    bool ok = true;
    std::vector<std::string> violations;
};

// Independent replay check of a routed circuit against the original
// circuit and topology: every SWAP is an edge, every execution touches the
// right physical pair on an edge with dependencies satisfied, every gate
// executes exactly once, and swap_count matches. Shares no logic with
// step's scheduler.
VerifyResult verify(const RoutedCircuit& rc, const LogicalCircuit& c, const Topology& t);

// Mapping after applying all SWAPs of rc to its initial mapping.
Mapping final_mapping(const RoutedCircuit& rc);

using Router = std::function<RoutedCircuit(const LogicalCircuit&, const Topology&, const Mapping&)>;

// Forward-backward mapping refinement: route c from m0, route the reversed
// gate list from the resulting final mapping, and return that pass's final
// mapping as the refined initial mapping for c.
Mapping bidirectional_initial_mapping(const LogicalCircuit& c, const Topology& t,
                                      const Router& router, const Mapping& m0);

// Routed-circuit JSON: {"initial_mapping": [...], "ops": [{"swap": [p, q]}
// | {"exec": {"gate": i, "phys": [p, q]}}, ...], "swap_count": k,
// "fallback_used": b}.
RoutedCircuit parse_routed(const std::string& json_text);
std::string serialize_routed(const RoutedCircuit& rc);

}  // namespace qroute
