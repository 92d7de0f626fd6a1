#include "doctest.h"

#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "qroute/circuit.hpp"
#include "qroute/env.hpp"
#include "qroute/mcts.hpp"
#include "qroute/topology.hpp"

using namespace qroute;

namespace {

LogicalCircuit demo_circuit() {
    LogicalCircuit c;
    c.num_qubits = 5;
    c.gates = {{0, 2}, {1, 3}, {1, 4}, {3, 4}};
    return c;
}

RoutingState demo_state() {
    return init_state(demo_circuit(), ring_topology(5), trivial_mapping(5));
}

}  // namespace

TEST_CASE("ucb matches its closed form") {
    const double c = std::sqrt(2.0);

    // One visit out of two parent visits, mean value 1.
    const double expect1 = 1.0 + std::sqrt(2.0 * std::log(2.0));
    CHECK(ucb(2, 1, 1.0, c) == doctest::Approx(expect1).epsilon(1e-12));
    CHECK(std::abs(ucb(2, 1, 1.0, c) - 2.17741) < 1e-4);

    // Two children under a 10-visit parent: the better-explored child with
    // the higher mean still scores below the fresher one.
    const double a = ucb(10, 2, 2.0, c);  // mean 1, explored twice
    const double b = ucb(10, 1, 1.0, c);  // mean 1, explored once
    CHECK(std::abs(a - 2.5174) < 1e-4);
    CHECK(std::abs(b - 3.1459) < 1e-4);
    CHECK(a == doctest::Approx(1.0 + c * std::sqrt(std::log(10.0) / 2.0)).epsilon(1e-12));
    CHECK(b == doctest::Approx(1.0 + c * std::sqrt(std::log(10.0))).epsilon(1e-12));
    CHECK(b > a);

    // Unvisited children always go first.
    CHECK(ucb(5, 0, 0.0, c) == std::numeric_limits<double>::infinity());
    // Zero exploration reduces to the mean.
    CHECK(ucb(7, 2, 3.0, 0.0) == doctest::Approx(1.5).epsilon(1e-12));
}

TEST_CASE("search options carry the standard constants") {
    const SearchOptions opt;
    CHECK(opt.rollouts == 200);
    CHECK(opt.exploration == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
}

TEST_CASE("search finds the double-scheduling swap on the demo instance") {
    const SearchResult res = search(demo_state(), zero_value, {200, std::sqrt(2.0)});

    // Ring-5 edges in index order: (0,1) (0,4) (1,2) (2,3) (3,4). Swapping
    // (1,2) schedules gates 0 and 1 at once; nothing else earns +1.
    REQUIRE(res.children.size() == 5);
    CHECK(res.children[0].edge_reward == 0.0);   // (0,1) schedules gate 0
    CHECK(res.children[1].edge_reward == -1.0);  // (0,4) schedules nothing
    CHECK(res.children[2].edge_reward == 1.0);   // (1,2) schedules 0 and 1
    CHECK(res.children[3].edge_reward == 0.0);   // (2,3) schedules gate 1
    CHECK(res.children[4].edge_reward == -1.0);  // (3,4) blocked by preds
    CHECK(res.best_action_index == 2);
    CHECK(res.best_action == std::pair<int, int>{1, 2});

    // Every child is explored at least once and the visits add up to the
    // root total (one initializing visit plus one per rollout).
    int visit_sum = 0;
    for (const ChildStat& ch : res.children) {
        CHECK(ch.visits >= 1);
        visit_sum += ch.visits;
    }
    CHECK(visit_sum == 200);
}

TEST_CASE("driving fresh searches to termination routes the demo in two swaps") {
    const Policy mcts_policy = [](const RoutingState& s) {
        return search(s, zero_value, {400, std::sqrt(2.0)}).best_action;
    };
    const LogicalCircuit c = demo_circuit();
    const Topology ring = ring_topology(5);
    const RoutedCircuit rc = route(c, ring, trivial_mapping(5), mcts_policy);
    CHECK(rc.swap_count == 2);
    CHECK_FALSE(rc.fallback_used);
    CHECK(verify(rc, c, ring).ok);
}

TEST_CASE("unvisited children are tried first, in edge order") {
    // With exactly |edges| rollouts every child ends up visited once.
    const SearchResult res = search(demo_state(), zero_value, {5, std::sqrt(2.0)});
    for (const ChildStat& ch : res.children) CHECK(ch.visits == 1);

    // With fewer rollouts the prefix of the edge list is visited.
    const SearchResult partial = search(demo_state(), zero_value, {3, std::sqrt(2.0)});
    CHECK(partial.children[0].visits == 1);
    CHECK(partial.children[1].visits == 1);
    CHECK(partial.children[2].visits == 1);
    CHECK(partial.children[3].visits == 0);
    CHECK(partial.children[4].visits == 0);
    // Only visited children may be recommended.
    CHECK(partial.best_action_index >= 0);
    CHECK(partial.best_action_index <= 2);
    CHECK(partial.children[static_cast<std::size_t>(partial.best_action_index)].visits > 0);
}

TEST_CASE("a constant value function yields a hand-computable root value") {
    // Five rollouts visit the five root children once each. Every leaf is
    // non-terminal and evaluates to 5, so the root accumulates its own
    // initial evaluation plus (5 + edge reward) per rollout.
    const auto five = [](const RoutingState&) { return 5.0; };
    const SearchResult res = search(demo_state(), five, {5, std::sqrt(2.0)});
    // Edge rewards sum to 0 - 1 + 1 + 0 - 1 = -1, so value_sum = 5 + 25 - 1.
    CHECK(res.root_value == doctest::Approx(29.0 / 6.0).epsilon(1e-12));
    for (const ChildStat& ch : res.children) {
        CHECK(ch.visits == 1);
        CHECK(ch.mean_value == doctest::Approx(5.0).epsilon(1e-12));
        CHECK(ch.leaf_value == doctest::Approx(5.0).epsilon(1e-12));
    }
    // Best action maximizes edge reward + mean value; means are equal, so
    // the +1 swap wins.
    CHECK(res.best_action_index == 2);
}

TEST_CASE("terminal leaves are worth zero, not the model value") {
    // Single well-separated gate on a 3-qubit line: both swaps finish the
    // episode immediately, so a huge model value must not leak in.
    const Topology line = topology_from_spec("line3");
    LogicalCircuit c;
    c.num_qubits = 3;
    c.gates = {{0, 2}};
    const RoutingState s = init_state(c, line, trivial_mapping(3));
    const auto loud = [](const RoutingState&) { return 1000.0; };
    const SearchResult res = search(s, loud, {10, std::sqrt(2.0)});
    REQUIRE(res.children.size() == 2);
    for (const ChildStat& ch : res.children) {
        CHECK(ch.edge_reward == 0.0);
        CHECK(ch.mean_value == 0.0);
        CHECK(ch.leaf_value == 0.0);
    }
    // Equal estimates tie-break to the lowest edge index.
    CHECK(res.best_action_index == 0);
    CHECK(res.best_action == std::pair<int, int>{0, 1});
    // Root value: initial evaluation 1000 once, then ten rollouts backing
    // up 0 + edge reward 0.
    CHECK(res.root_value == doctest::Approx(1000.0 / 11.0).epsilon(1e-12));
}

TEST_CASE("search is a pure function of its inputs") {
    const SearchResult a = search(demo_state(), zero_value, {150, std::sqrt(2.0)});
    const SearchResult b = search(demo_state(), zero_value, {150, std::sqrt(2.0)});
    CHECK(a.best_action_index == b.best_action_index);
    CHECK(a.root_value == b.root_value);
    REQUIRE(a.children.size() == b.children.size());
    for (std::size_t i = 0; i < a.children.size(); ++i) {
        CHECK(a.children[i].visits == b.children[i].visits);
        CHECK(a.children[i].mean_value == b.children[i].mean_value);
        CHECK(a.children[i].edge_reward == b.children[i].edge_reward);
    }
}

TEST_CASE("search validates its inputs") {
    const LogicalCircuit ghz = generate_benchmark(BenchmarkKind::Ghz, 5, 0);
    const RoutingState done = init_state(ghz, ring_topology(5), trivial_mapping(5));
    REQUIRE(is_terminal(done));
    CHECK_THROWS_AS((void)search(done, zero_value), std::invalid_argument);
    CHECK_THROWS_AS((void)search(demo_state(), zero_value, {0, std::sqrt(2.0)}),
                    std::invalid_argument);
    CHECK_THROWS_AS((void)search(demo_state(), zero_value, {-5, std::sqrt(2.0)}),
                    std::invalid_argument);
}

TEST_CASE("deeper search keeps improving the value estimate on the demo") {
    // With zero leaf values the root value converges toward the true
    // optimum of the remaining-reward sum: 4 gates in 2 swaps = +2.
    const SearchResult res = search(demo_state(), zero_value, {2000, std::sqrt(2.0)});
    CHECK(res.root_value > 0.5);
    CHECK(res.root_value <= 2.0);
    CHECK(res.best_action_index == 2);
}
