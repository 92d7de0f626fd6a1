#include "qroute/env.hpp"

#include <algorithm>
#include <stdexcept>
#include <utility>

#include "json.hpp"

#include "qroute/rng.hpp"

namespace qroute {

bool Mapping::is_valid() const {
    const int n = size();
    if (static_cast<int>(phys_to_log.size()) != n) return false;
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    for (int l = 0; l < n; ++l) {
        const int p = log_to_phys[static_cast<std::size_t>(l)];
        if (p < 0 || p >= n || seen[static_cast<std::size_t>(p)]) return false;
        seen[static_cast<std::size_t>(p)] = 1;
        if (phys_to_log[static_cast<std::size_t>(p)] != l) return false;
    }
    return true;
}

void Mapping::apply_swap(int p, int q) {
    const int l1 = phys_to_log[static_cast<std::size_t>(p)];
    const int l2 = phys_to_log[static_cast<std::size_t>(q)];
    phys_to_log[static_cast<std::size_t>(p)] = l2;
    phys_to_log[static_cast<std::size_t>(q)] = l1;
    log_to_phys[static_cast<std::size_t>(l1)] = q;
    log_to_phys[static_cast<std::size_t>(l2)] = p;
}

Mapping trivial_mapping(int n) {
    Mapping m;
    m.log_to_phys.resize(static_cast<std::size_t>(n));
    m.phys_to_log.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        m.log_to_phys[static_cast<std::size_t>(i)] = i;
        m.phys_to_log[static_cast<std::size_t>(i)] = i;
    }
    return m;
}

Mapping random_mapping(int n, std::uint64_t seed) {
    Rng rng(seed);
    Mapping m;
    m.log_to_phys = rng.permutation(n);
    m.phys_to_log.assign(static_cast<std::size_t>(n), 0);
    for (int l = 0; l < n; ++l) {
        m.phys_to_log[static_cast<std::size_t>(m.log_to_phys[static_cast<std::size_t>(l)])] = l;
    }
    return m;
}

std::shared_ptr<const EnvContext> make_env_context(const LogicalCircuit& c, const Topology& t) {
    auto ctx = std::make_shared<EnvContext>();
    ctx->circuit = c;
    ctx->dag = build_dag(c);
    ctx->topology = t;
    ctx->dist = all_pairs_distance(t);
    return ctx;
}

namespace {

// Schedules every gate in s.remaining whose predecessors are scheduled and
// whose mapped qubits are adjacent. A single ascending pass reaches the
// fixpoint because predecessors always have lower indices.
std::vector<int> schedule_pass(RoutingState& s) {
    std::vector<int> scheduled;
    std::vector<int> still_remaining;
    still_remaining.reserve(s.remaining.size());
    const EnvContext& ctx = *s.ctx;
    for (int g : s.remaining) {
        const auto& preds = ctx.dag.predecessors[static_cast<std::size_t>(g)];
        bool ready = true;
        for (int p : preds) {
            if (s.in_remaining[static_cast<std::size_t>(p)]) {
                ready = false;
                break;
            }
        }
        if (ready) {
            const Gate& gate = ctx.circuit.gates[static_cast<std::size_t>(g)];
            const int a = s.mapping.log_to_phys[static_cast<std::size_t>(gate.q1)];
            const int b = s.mapping.log_to_phys[static_cast<std::size_t>(gate.q2)];
            if (ctx.dist(a, b) == 1) {
                s.in_remaining[static_cast<std::size_t>(g)] = 0;
                scheduled.push_back(g);
                continue;
            }
        }
        still_remaining.push_back(g);
    }
    s.remaining = std::move(still_remaining);
    return scheduled;
}

}  // namespace

RoutingState init_state(const std::shared_ptr<const EnvContext>& ctx, const Mapping& m) {
    if (ctx->circuit.num_qubits > ctx->topology.num_qubits) {
        throw std::runtime_error("circuit is wider than the topology");
    }
    if (m.size() != ctx->topology.num_qubits || !m.is_valid()) {
        throw std::runtime_error("mapping must be a bijection over all physical qubits");
    }
    RoutingState s;
    s.ctx = ctx;
    s.mapping = m;
    const int gate_count = static_cast<int>(ctx->circuit.gates.size());
    s.remaining.resize(static_cast<std::size_t>(gate_count));
    for (int i = 0; i < gate_count; ++i) s.remaining[static_cast<std::size_t>(i)] = i;
    s.in_remaining.assign(static_cast<std::size_t>(gate_count), 1);
    schedule_pass(s);  // pre-scheduling earns no reward
    return s;
}

RoutingState init_state(const LogicalCircuit& c, const Topology& t, const Mapping& m) {
    return init_state(make_env_context(c, t), m);
}

bool is_terminal(const RoutingState& s) {
    return s.remaining.empty();
}

StepResult step(const RoutingState& s, std::pair<int, int> swap_edge) {
    if (is_terminal(s)) throw std::logic_error("step on a terminal state");
    const auto [p, q] = swap_edge;
    if (!s.ctx->topology.has_edge(p, q)) {
        throw std::invalid_argument("swap (" + std::to_string(p) + ", " + std::to_string(q) +
                                    ") is not a topology edge");
    }
    StepResult r;
    r.state = s;
    r.state.mapping.apply_swap(p, q);
    r.state.swaps_applied = s.swaps_applied + 1;
    r.scheduled = schedule_pass(r.state);
    r.reward = static_cast<int>(r.scheduled.size()) - 1;
    return r;
}

std::pair<int, int> basic_next_swap(const RoutingState& s) {
    const EnvContext& ctx = *s.ctx;
    // Earliest remaining gate with all predecessors scheduled. One always
    // exists in a non-terminal state, and its endpoints are non-adjacent
    // (adjacent ready gates were consumed by the previous cascade).
    int target = -1;
    for (int g : s.remaining) {
        bool ready = true;
        for (int p : ctx.dag.predecessors[static_cast<std::size_t>(g)]) {
            if (s.in_remaining[static_cast<std::size_t>(p)]) {
                ready = false;
                break;
            }
        }
        if (ready) {
            target = g;
            break;
        }
    }
    if (target < 0) throw std::logic_error("no schedulable gate in a non-terminal state");

    const Gate& gate = ctx.circuit.gates[static_cast<std::size_t>(target)];
    int a = s.mapping.log_to_phys[static_cast<std::size_t>(gate.q1)];
    int b = s.mapping.log_to_phys[static_cast<std::size_t>(gate.q2)];
    if (a > b) std::swap(a, b);
    // Walk the occupant of the lower-indexed endpoint one hop along a
    // shortest path, preferring the lowest-numbered next vertex.
    int best = -1;
    for (int v : ctx.topology.neighbors(a)) {
        if (ctx.dist(v, b) == ctx.dist(a, b) - 1 && (best < 0 || v < best)) best = v;
    }
    return {std::min(a, best), std::max(a, best)};
}

RoutedCircuit route(const LogicalCircuit& c, const Topology& t, const Mapping& m,
                    const Policy& policy, long step_cap) {
    if (step_cap == kDefaultStepCap) {
        step_cap = 10 * static_cast<long>(c.gates.size()) + 50;
    }
    RoutingState s = init_state(c, t, m);

    RoutedCircuit rc;
    rc.initial_mapping = m;
    auto record_execs = [&rc, &s](const std::vector<int>& scheduled) {
        for (int g : scheduled) {
            const Gate& gate = s.ctx->circuit.gates[static_cast<std::size_t>(g)];
            rc.ops.push_back(ExecOp{g, s.mapping.log_to_phys[static_cast<std::size_t>(gate.q1)],
                                    s.mapping.log_to_phys[static_cast<std::size_t>(gate.q2)]});
        }
    };

    {
        // Gates already executable under the initial mapping.
        std::vector<int> pre;
        for (int g = 0; g < static_cast<int>(c.gates.size()); ++g) {
            if (!s.gate_remaining(g)) pre.push_back(g);
        }
        record_execs(pre);
    }

    long policy_steps = 0;
    while (!is_terminal(s)) {
        std::pair<int, int> a;
        if (policy_steps < step_cap) {
            a = policy(s);
            if (s.ctx->topology.edge_index(a.first, a.second) < 0) {
                throw std::runtime_error("policy returned a non-edge swap");
            }
            ++policy_steps;
        } else {
            a = basic_next_swap(s);
            rc.fallback_used = true;
        }
        StepResult r = step(s, a);
        s = std::move(r.state);
        if (a.first > a.second) std::swap(a.first, a.second);
        rc.ops.push_back(SwapOp{a.first, a.second});
        ++rc.swap_count;
        record_execs(r.scheduled);
    }
    return rc;
}

VerifyResult verify(const RoutedCircuit& rc, const LogicalCircuit& c, const Topology& t) {
    VerifyResult res;
    auto fail = [&res](std::string msg) {
        res.ok = false;
        res.violations.push_back(std::move(msg));
    };

    const int n = t.num_qubits;
    if (rc.initial_mapping.size() != n || !rc.initial_mapping.is_valid()) {
        fail("initial_mapping is not a bijection over the physical qubits");
        return res;
    }
    if (c.num_qubits > n) {
        fail("circuit is wider than the topology");
        return res;
    }

    // Dependency tracking rebuilt from scratch: a gate may execute only
    // after the latest earlier gate on each of its qubits has executed.
    const int gate_count = static_cast<int>(c.gates.size());
    std::vector<std::vector<int>> preds(static_cast<std::size_t>(gate_count));
    {
        std::vector<int> last(static_cast<std::size_t>(c.num_qubits), -1);
        for (int i = 0; i < gate_count; ++i) {
            const Gate& g = c.gates[static_cast<std::size_t>(i)];
            for (int q : {g.q1, g.q2}) {
                const int p = last[static_cast<std::size_t>(q)];
                if (p >= 0) preds[static_cast<std::size_t>(i)].push_back(p);
                last[static_cast<std::size_t>(q)] = i;
            }
        }
    }

    std::vector<int> where = rc.initial_mapping.log_to_phys;
    std::vector<char> executed(static_cast<std::size_t>(gate_count), 0);
    int swap_ops = 0;

    for (std::size_t idx = 0; idx < rc.ops.size(); ++idx) {
        const std::string at = "op " + std::to_string(idx);
        if (const auto* sw = std::get_if<SwapOp>(&rc.ops[idx])) {
            if (sw->p < 0 || sw->p >= n || sw->q < 0 || sw->q >= n || !t.has_edge(sw->p, sw->q)) {
                fail(at + ": swap is not a topology edge");
                continue;
            }
            for (int& pos : where) {
                if (pos == sw->p) {
                    pos = sw->q;
                } else if (pos == sw->q) {
                    pos = sw->p;
                }
            }
            ++swap_ops;
        } else {
            const auto& ex = std::get<ExecOp>(rc.ops[idx]);
            if (ex.gate < 0 || ex.gate >= gate_count) {
                fail(at + ": gate index out of range");
                continue;
            }
            if (executed[static_cast<std::size_t>(ex.gate)]) {
                fail(at + ": gate " + std::to_string(ex.gate) + " executed twice");
                continue;
            }
            for (int p : preds[static_cast<std::size_t>(ex.gate)]) {
                if (!executed[static_cast<std::size_t>(p)]) {
                    fail(at + ": gate " + std::to_string(ex.gate) + " executed before gate " +
                         std::to_string(p));
                }
            }
            const Gate& g = c.gates[static_cast<std::size_t>(ex.gate)];
            const int a = where[static_cast<std::size_t>(g.q1)];
            const int b = where[static_cast<std::size_t>(g.q2)];
            if (!((ex.p == a && ex.q == b) || (ex.p == b && ex.q == a))) {
                fail(at + ": gate " + std::to_string(ex.gate) +
                     " executed on the wrong physical qubits");
            }
            if (!t.has_edge(ex.p, ex.q)) {
                fail(at + ": gate " + std::to_string(ex.gate) +
                     " executed on non-adjacent physical qubits");
            }
            executed[static_cast<std::size_t>(ex.gate)] = 1;
        }
    }

    for (int g = 0; g < gate_count; ++g) {
        if (!executed[static_cast<std::size_t>(g)]) {
            fail("gate " + std::to_string(g) + " never executed");
        }
    }
    if (swap_ops != rc.swap_count) {
        fail("swap_count field (" + std::to_string(rc.swap_count) + ") does not match swap ops (" +
             std::to_string(swap_ops) + ")");
    }
    return res;
}

Mapping final_mapping(const RoutedCircuit& rc) {
    Mapping m = rc.initial_mapping;
    for (const RoutedOp& op : rc.ops) {
        if (const auto* sw = std::get_if<SwapOp>(&op)) m.apply_swap(sw->p, sw->q);
    }
    return m;
}

Mapping bidirectional_initial_mapping(const LogicalCircuit& c, const Topology& t,
                                      const Router& router, const Mapping& m0) {
    const RoutedCircuit forward = router(c, t, m0);
    LogicalCircuit reversed;
    reversed.num_qubits = c.num_qubits;
    reversed.gates.assign(c.gates.rbegin(), c.gates.rend());
    const RoutedCircuit backward = router(reversed, t, final_mapping(forward));
    return final_mapping(backward);
}

RoutedCircuit parse_routed(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::runtime_error(std::string("routed circuit: malformed JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("initial_mapping") || !j.contains("ops") ||
        !j.contains("swap_count") || !j.contains("fallback_used")) {
        throw std::runtime_error(
            "routed circuit: expected {initial_mapping, ops, swap_count, fallback_used}");
    }
    RoutedCircuit rc;
    rc.initial_mapping.log_to_phys = j["initial_mapping"].get<std::vector<int>>();
    const int n = static_cast<int>(rc.initial_mapping.log_to_phys.size());
    rc.initial_mapping.phys_to_log.assign(static_cast<std::size_t>(n), -1);
    for (int l = 0; l < n; ++l) {
        const int p = rc.initial_mapping.log_to_phys[static_cast<std::size_t>(l)];
        if (p < 0 || p >= n) throw std::runtime_error("routed circuit: mapping entry out of range");
        rc.initial_mapping.phys_to_log[static_cast<std::size_t>(p)] = l;
    }
    if (!rc.initial_mapping.is_valid()) {
        throw std::runtime_error("routed circuit: initial_mapping is not a bijection");
    }
    for (const auto& op : j["ops"]) {
        if (op.contains("swap")) {
            const auto pq = op["swap"].get<std::vector<int>>();
            if (pq.size() != 2) throw std::runtime_error("routed circuit: swap needs two qubits");
            rc.ops.push_back(SwapOp{pq[0], pq[1]});
        } else if (op.contains("exec")) {
            const auto& e = op["exec"];
            const auto phys = e.at("phys").get<std::vector<int>>();
            if (phys.size() != 2) throw std::runtime_error("routed circuit: exec needs two qubits");
            rc.ops.push_back(ExecOp{e.at("gate").get<int>(), phys[0], phys[1]});
        } else {
            throw std::runtime_error("routed circuit: op must be a swap or an exec");
        }
    }
    rc.swap_count = j["swap_count"].get<int>();
    rc.fallback_used = j["fallback_used"].get<bool>();
    return rc;
}

std::string serialize_routed(const RoutedCircuit& rc) {
    nlohmann::ordered_json j;
    j["initial_mapping"] = rc.initial_mapping.log_to_phys;
    auto ops = nlohmann::ordered_json::array();
    for (const RoutedOp& op : rc.ops) {
        if (const auto* sw = std::get_if<SwapOp>(&op)) {
            ops.push_back({{"swap", {sw->p, sw->q}}});
        } else {
            const auto& ex = std::get<ExecOp>(op);
            nlohmann::ordered_json e;
            e["gate"] = ex.gate;
            e["phys"] = {ex.p, ex.q};
            ops.push_back({{"exec", std::move(e)}});
        }
    }
    j["ops"] = std::move(ops);
    j["swap_count"] = rc.swap_count;
    j["fallback_used"] = rc.fallback_used;
    return j.dump();
}

}  // namespace qroute
