#pragma once

#include <cstdint>
#include <deque>
#include <string>
#include <vector>

#include "qroute/agent.hpp"
#include "qroute/circuit.hpp"
#include "qroute/env.hpp"
#include "qroute/topology.hpp"

namespace qroute {

enum class TrainMapping { kTrivial, kRandom };

// Search-guided policy-iteration loop: every episode rolls each live
// circuit to completion with actions sampled from the current policy,
// states land in a FIFO replay buffer, and once the buffer passes its
// threshold one batch per episode is re-searched with MCTS to produce
// (action, value) targets for a supervised update. The learning rate
// decays once per episode.
struct TrainConfig {
    Topology topology;
    BenchmarkKind kind = BenchmarkKind::Random;
    BenchmarkParams params;
    int circuit_qubits = -1;  // -1: use the full device
    int circuit_count = 8;
    int episodes = 100;
    int rollouts = 200;
    int batch_size = 32;
    int buffer_threshold = 320;
    int buffer_capacity = 10000;
    double alpha = 1.0;
    bool alpha_auto = false;
    double lr = 0.1;
    double lr_decay = 0.8;
    std::uint64_t seed = 0;
    // When a circuit finishes, generate a fresh one so all slots stay
    // live; disable to retire circuits permanently after their first run.
    bool regenerate = true;
    TrainMapping mapping = TrainMapping::kTrivial;

    void validate() const;
};

struct EpisodeLog {
    int episode = 0;  // 1-based
    bool has_loss = false;
    double mean_loss = 0.0;
    int updates = 0;
    std::size_t buffer_size = 0;
    double lr = 0.0;  // after this episode's decay
    bool has_swaps = false;
    double mean_episode_swaps = 0.0;
    double mean_reward = 0.0;
    int fallbacks = 0;
};

struct TrainResult {
    AgentModel<float> model;
    OptimizerState<float> opt;
    std::vector<EpisodeLog> log;
    double alpha_used = 1.0;
};

TrainResult train(const TrainConfig& cfg);

// One JSON object per line, in episode order; byte-stable given identical
// inputs.
std::string train_log_lines(const std::vector<EpisodeLog>& log);

}  // namespace qroute
