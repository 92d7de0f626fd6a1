#include "qroute/baselines.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <unordered_map>
#include <utility>

#include "qroute/rng.hpp"

namespace qroute {

namespace {

std::vector<int> front_layer(const RoutingState& s) {
    std::vector<int> front;
    for (int g : s.remaining) {
        bool ready = true;
        for (int p : s.ctx->dag.predecessors[static_cast<std::size_t>(g)]) {
            if (s.in_remaining[static_cast<std::size_t>(p)]) {
                ready = false;
                break;
            }
        }
        if (ready) front.push_back(g);
    }
    return front;
}

}  // namespace

RoutedCircuit route_basic(const LogicalCircuit& c, const Topology& t, const Mapping& m) {
    // The walker strictly shrinks the target gate's distance each step, so
    // no cap is needed.
    return route(c, t, m, basic_next_swap, std::numeric_limits<long>::max());
}

RoutedCircuit route_stochastic(const LogicalCircuit& c, const Topology& t, const Mapping& m,
                               const StochasticConfig& cfg) {
    if (cfg.trials < 1) throw std::invalid_argument("stochastic router needs trials >= 1");
    const auto& edges = t.edges;
    const int edge_count = static_cast<int>(edges.size());

    // Stateful policy: plans a swap sequence per front layer, then replays
    // it one step at a time.
    auto planned = std::make_shared<std::deque<std::pair<int, int>>>();
    auto layer_ordinal = std::make_shared<int>(0);

    Policy policy = [planned, layer_ordinal, &edges, edge_count, cfg](const RoutingState& s) {
        if (!planned->empty()) {
            auto next = planned->front();
            planned->pop_front();
            return next;
        }
        const std::vector<int> front = front_layer(s);
        auto layer_done = [&front](const RoutingState& sim) {
            for (int g : front) {
                if (sim.gate_remaining(g)) return false;
            }
            return true;
        };

        std::vector<std::pair<int, int>> best;
        bool found = false;
        for (int attempt = 0; attempt < cfg.trials; ++attempt) {
            Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(*layer_ordinal),
                                static_cast<std::uint64_t>(attempt)));
            RoutingState sim = s;
            std::vector<std::pair<int, int>> seq;
            while (!layer_done(sim) && static_cast<int>(seq.size()) < cfg.attempt_cap) {
                const auto e = edges[static_cast<std::size_t>(rng.below(edge_count))];
                sim = step(sim, e).state;
                seq.push_back(e);
            }
            if (layer_done(sim) && (!found || seq.size() < best.size())) {
                best = std::move(seq);
                found = true;
            }
        }
        if (!found) {
            // Every attempt blew the budget; clear the layer deterministically.
            RoutingState sim = s;
            while (!layer_done(sim)) {
                const auto e = basic_next_swap(sim);
                sim = step(sim, e).state;
                best.push_back(e);
            }
        }
        ++*layer_ordinal;
        planned->assign(best.begin(), best.end());
        auto next = planned->front();
        planned->pop_front();
        return next;
    };

    return route(c, t, m, policy, std::numeric_limits<long>::max());
}

RoutedCircuit route_sabre(const LogicalCircuit& c, const Topology& t, const Mapping& m,
                          const SabreConfig& cfg) {
    const auto& edges = t.edges;

    auto decay = std::make_shared<std::vector<double>>(static_cast<std::size_t>(t.num_qubits), 1.0);
    auto last_remaining = std::make_shared<std::size_t>(std::numeric_limits<std::size_t>::max());

    Policy policy = [decay, last_remaining, &edges, cfg](const RoutingState& s) {
        if (s.remaining.size() != *last_remaining) {
            // A gate was scheduled since the previous swap.
            std::fill(decay->begin(), decay->end(), 1.0);
        }

        const std::vector<int> front = front_layer(s);
        std::vector<int> window;
        {
            std::vector<char> in_front(s.in_remaining.size(), 0);
            for (int g : front) in_front[static_cast<std::size_t>(g)] = 1;
            for (int g : s.remaining) {
                if (static_cast<int>(window.size()) >= cfg.window) break;
                if (!in_front[static_cast<std::size_t>(g)]) window.push_back(g);
            }
        }

        const EnvContext& ctx = *s.ctx;
        std::vector<char> front_qubit(static_cast<std::size_t>(ctx.topology.num_qubits), 0);
        for (int g : front) {
            const Gate& gate = ctx.circuit.gates[static_cast<std::size_t>(g)];
            front_qubit[static_cast<std::size_t>(
                s.mapping.log_to_phys[static_cast<std::size_t>(gate.q1)])] = 1;
            front_qubit[static_cast<std::size_t>(
                s.mapping.log_to_phys[static_cast<std::size_t>(gate.q2)])] = 1;
        }

        auto gate_distance = [&ctx](const Mapping& map, int g) {
            const Gate& gate = ctx.circuit.gates[static_cast<std::size_t>(g)];
            return ctx.dist(map.log_to_phys[static_cast<std::size_t>(gate.q1)],
                            map.log_to_phys[static_cast<std::size_t>(gate.q2)]);
        };

        double best_score = std::numeric_limits<double>::infinity();
        std::pair<int, int> best_edge{-1, -1};
        for (const auto& e : edges) {
            if (!front_qubit[static_cast<std::size_t>(e.first)] &&
                !front_qubit[static_cast<std::size_t>(e.second)]) {
                continue;
            }
            Mapping after = s.mapping;
            after.apply_swap(e.first, e.second);
            double h = 0.0;
            for (int g : front) h += gate_distance(after, g);
            if (!window.empty()) {
                double wsum = 0.0;
                for (int g : window) wsum += gate_distance(after, g);
                h += cfg.lookahead_weight * wsum / static_cast<double>(window.size());
            }
            const double score =
                h * std::max((*decay)[static_cast<std::size_t>(e.first)],
                             (*decay)[static_cast<std::size_t>(e.second)]);
            if (score < best_score) {
                best_score = score;
                best_edge = e;
            }
        }

        (*decay)[static_cast<std::size_t>(best_edge.first)] *= cfg.decay;
        (*decay)[static_cast<std::size_t>(best_edge.second)] *= cfg.decay;
        *last_remaining = s.remaining.size();
        return best_edge;
    };

    return route(c, t, m, policy, cfg.step_cap);
}

namespace {

struct OracleSearch {
    std::optional<std::vector<std::pair<int, int>>> swap_path;  // set when solved
    bool exhausted = false;
};

struct VecIntHash {
    std::size_t operator()(const std::vector<int>& v) const {
        std::uint64_t h = 0xcbf29ce484222325ull;
        for (int x : v) {
            h ^= static_cast<std::uint64_t>(static_cast<std::uint32_t>(x));
            h *= 0x100000001b3ull;
        }
        return static_cast<std::size_t>(h);
    }
};

// Key collapsing idle-qubit permutations: physical position -> logical
// occupant if that logical qubit still has pending gates, else -1; plus the
// remaining gate set.
std::vector<int> canonical_key(const RoutingState& s) {
    const EnvContext& ctx = *s.ctx;
    std::vector<char> active(static_cast<std::size_t>(ctx.topology.num_qubits), 0);
    for (int g : s.remaining) {
        const Gate& gate = ctx.circuit.gates[static_cast<std::size_t>(g)];
        active[static_cast<std::size_t>(gate.q1)] = 1;
        active[static_cast<std::size_t>(gate.q2)] = 1;
    }
    std::vector<int> key;
    key.reserve(static_cast<std::size_t>(ctx.topology.num_qubits) + s.remaining.size() + 1);
    for (int p = 0; p < ctx.topology.num_qubits; ++p) {
        const int l = s.mapping.phys_to_log[static_cast<std::size_t>(p)];
        key.push_back(active[static_cast<std::size_t>(l)] ? l : -1);
    }
    key.push_back(-2);
    key.insert(key.end(), s.remaining.begin(), s.remaining.end());
    return key;
}

OracleSearch oracle_bfs(const LogicalCircuit& c, const Topology& t, const Mapping& m,
                        long max_states) {
    OracleSearch out;
    if ((t.num_qubits > 8 || static_cast<int>(c.gates.size()) > 8) &&
        max_states <= kOracleDefaultLimit) {
        out.exhausted = true;
        return out;
    }

    const RoutingState start = init_state(c, t, m);
    if (is_terminal(start)) {
        out.swap_path = std::vector<std::pair<int, int>>{};
        return out;
    }

    struct Entry {
        int parent = -1;
        std::pair<int, int> edge{-1, -1};
    };
    std::vector<Entry> entries;
    std::unordered_map<std::vector<int>, int, VecIntHash> visited;
    std::deque<std::pair<RoutingState, int>> frontier;

    entries.push_back({});
    visited.emplace(canonical_key(start), 0);
    frontier.emplace_back(start, 0);

    while (!frontier.empty()) {
        auto [state, idx] = std::move(frontier.front());
        frontier.pop_front();
        for (const auto& e : t.edges) {
            StepResult r = step(state, e);
            auto key = canonical_key(r.state);
            if (visited.contains(key)) continue;
            if (static_cast<long>(entries.size()) >= max_states) {
                out.exhausted = true;
                return out;
            }
            const int child = static_cast<int>(entries.size());
            entries.push_back({idx, e});
            if (is_terminal(r.state)) {
                std::vector<std::pair<int, int>> path;
                for (int cur = child; entries[static_cast<std::size_t>(cur)].parent >= 0;
                     cur = entries[static_cast<std::size_t>(cur)].parent) {
                    path.push_back(entries[static_cast<std::size_t>(cur)].edge);
                }
                std::reverse(path.begin(), path.end());
                out.swap_path = std::move(path);
                return out;
            }
            visited.emplace(std::move(key), child);
            frontier.emplace_back(std::move(r.state), child);
        }
    }
    // Connected topology: unreachable, every instance is solvable.
    out.exhausted = true;
    return out;
}

}  // namespace

std::optional<int> optimal_swap_count(const LogicalCircuit& c, const Topology& t, const Mapping& m,
                                      long max_states) {
    const OracleSearch res = oracle_bfs(c, t, m, max_states);
    if (!res.swap_path) return std::nullopt;
    return static_cast<int>(res.swap_path->size());
}

std::optional<RoutedCircuit> optimal_route(const LogicalCircuit& c, const Topology& t,
                                           const Mapping& m, long max_states) {
    const OracleSearch res = oracle_bfs(c, t, m, max_states);
    if (!res.swap_path) return std::nullopt;
    auto plan = std::make_shared<std::deque<std::pair<int, int>>>(res.swap_path->begin(),
                                                                  res.swap_path->end());
    Policy policy = [plan](const RoutingState&) {
        auto next = plan->front();
        plan->pop_front();
        return next;
    };
    return route(c, t, m, policy, std::numeric_limits<long>::max());
}

}  // namespace qroute
