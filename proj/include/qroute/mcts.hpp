#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "qroute/env.hpp"

namespace qroute {

struct SearchOptions {
    int rollouts = 200;
    double exploration = std::sqrt(2.0);
};

// Upper confidence bound for tree search: mean child value plus an
// exploration bonus; an unvisited child scores +infinity so it is tried
// first.
inline double ucb(int parent_visits, int child_visits, double child_value_sum,
                  double exploration) {
    if (child_visits == 0) return std::numeric_limits<double>::infinity();
    const double mean = child_value_sum / static_cast<double>(child_visits);
    return mean + exploration * std::sqrt(std::log(static_cast<double>(parent_visits)) /
                                          static_cast<double>(child_visits));
}

struct ChildStat {
    int action_index = -1;
    std::pair<int, int> edge{-1, -1};
    int visits = 0;
    double edge_reward = 0.0;
    double mean_value = 0.0;  // 0 when unvisited
    double leaf_value = 0.0;  // model value at first evaluation, 0 if never
};

struct SearchResult {
    int best_action_index = -1;
    std::pair<int, int> best_action{-1, -1};
    double root_value = 0.0;
    std::vector<ChildStat> children;
};

// Monte Carlo tree search over the routing MDP. Each rollout selects by
// UCB down to a leaf, expands every SWAP child of a non-terminal leaf,
// evaluates the leaf with value_fn (terminal leaves are worth 0), and adds
// leaf value plus the undiscounted rewards below each ancestor to that
// ancestor's total. The root is expanded and evaluated once up front as
// its initializing visit. Every tie breaks to the lowest edge index, so
// the search is a pure function of (root, value_fn, options). The best
// action maximizes edge reward plus mean child value.
template <typename ValueFn>
SearchResult search(const RoutingState& root, ValueFn&& value_fn, const SearchOptions& opt = {}) {
    if (is_terminal(root)) throw std::invalid_argument("mcts: root state is terminal");
    if (opt.rollouts < 1) throw std::invalid_argument("mcts: rollouts must be >= 1");

    struct Node {
        RoutingState state;
        int parent = -1;
        int action_index = -1;
        double edge_reward = 0.0;
        double value_sum = 0.0;
        int visits = 0;
        bool terminal = false;
        bool expanded = false;
        int first_child = -1;
        double first_eval = 0.0;
    };

    const auto& edges = root.ctx->topology.edges;
    const int edge_count = static_cast<int>(edges.size());

    std::vector<Node> nodes;
    nodes.reserve(static_cast<std::size_t>((opt.rollouts + 1) * edge_count + 1));

    auto expand = [&nodes, &edges, edge_count](int idx) {
        nodes[static_cast<std::size_t>(idx)].first_child = static_cast<int>(nodes.size());
        nodes[static_cast<std::size_t>(idx)].expanded = true;
        for (int e = 0; e < edge_count; ++e) {
            StepResult r = step(nodes[static_cast<std::size_t>(idx)].state,
                                edges[static_cast<std::size_t>(e)]);
            Node child;
            child.state = std::move(r.state);
            child.parent = idx;
            child.action_index = e;
            child.edge_reward = static_cast<double>(r.reward);
            child.terminal = is_terminal(child.state);
            nodes.push_back(std::move(child));
        }
    };

    auto evaluate = [&value_fn](Node& node) {
        if (node.terminal) return 0.0;
        const double v = static_cast<double>(value_fn(node.state));
        return v;
    };

    {
        Node root_node;
        root_node.state = root;
        nodes.push_back(std::move(root_node));
        expand(0);
        nodes[0].first_eval = evaluate(nodes[0]);
        nodes[0].value_sum = nodes[0].first_eval;
        nodes[0].visits = 1;
    }

    for (int rollout = 0; rollout < opt.rollouts; ++rollout) {
        int idx = 0;
        while (nodes[static_cast<std::size_t>(idx)].expanded) {
            const Node& parent = nodes[static_cast<std::size_t>(idx)];
            int best = parent.first_child;
            double best_score = -std::numeric_limits<double>::infinity();
            for (int e = 0; e < edge_count; ++e) {
                const Node& child = nodes[static_cast<std::size_t>(parent.first_child + e)];
                const double score =
                    ucb(parent.visits, child.visits, child.value_sum, opt.exploration);
                if (score > best_score) {
                    best_score = score;
                    best = parent.first_child + e;
                }
            }
            idx = best;
        }

        Node& leaf = nodes[static_cast<std::size_t>(idx)];
        const bool first_visit = leaf.visits == 0;
        if (!leaf.terminal) expand(idx);
        const double v = evaluate(nodes[static_cast<std::size_t>(idx)]);
        if (first_visit) nodes[static_cast<std::size_t>(idx)].first_eval = v;

        double value = v;
        for (int cur = idx; cur >= 0;) {
            Node& node = nodes[static_cast<std::size_t>(cur)];
            node.value_sum += value;
            node.visits += 1;
            value += node.edge_reward;
            cur = node.parent;
        }
    }

    SearchResult result;
    result.root_value = nodes[0].value_sum / static_cast<double>(nodes[0].visits);
    result.children.reserve(static_cast<std::size_t>(edge_count));
    double best_estimate = -std::numeric_limits<double>::infinity();
    for (int e = 0; e < edge_count; ++e) {
        const Node& child = nodes[static_cast<std::size_t>(nodes[0].first_child + e)];
        ChildStat stat;
        stat.action_index = e;
        stat.edge = edges[static_cast<std::size_t>(e)];
        stat.visits = child.visits;
        stat.edge_reward = child.edge_reward;
        stat.mean_value =
            child.visits > 0 ? child.value_sum / static_cast<double>(child.visits) : 0.0;
        stat.leaf_value = child.first_eval;
        result.children.push_back(stat);
        if (child.visits > 0) {
            const double estimate = child.edge_reward + stat.mean_value;
            if (estimate > best_estimate) {
                best_estimate = estimate;
                result.best_action_index = e;
                result.best_action = stat.edge;
            }
        }
    }
    return result;
}

inline double zero_value(const RoutingState&) {
    return 0.0;
}

}  // namespace qroute
