#include "qroute/trainer.hpp"

#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "json.hpp"

#include "qroute/mcts.hpp"
#include "qroute/rng.hpp"

namespace qroute {

namespace {

// Seed-stream purposes; every random draw in training comes from a stream
// derived as derive_seed(cfg.seed, purpose, ordinal).
constexpr std::uint64_t kSeedModelInit = 1;
constexpr std::uint64_t kSeedCircuitGen = 2;
constexpr std::uint64_t kSeedActionSampling = 3;
constexpr std::uint64_t kSeedBatchSampling = 4;
constexpr std::uint64_t kSeedMapping = 5;

struct Slot {
    RoutingState state;
    bool live = false;
};

int sample_index(const MatX<float>& policy, Rng& rng) {
    const double r = rng.uniform();
    double cum = 0.0;
    for (Eigen::Index i = 0; i < policy.rows(); ++i) {
        cum += static_cast<double>(policy(i, 0));
        if (r < cum) return static_cast<int>(i);
    }
    return static_cast<int>(policy.rows() - 1);
}

RoutingState fresh_state(const TrainConfig& cfg, std::uint64_t gen_ordinal) {
    const int n = cfg.circuit_qubits > 0 ? cfg.circuit_qubits : cfg.topology.num_qubits;
    const LogicalCircuit circuit = generate_benchmark(
        cfg.kind, n, derive_seed(cfg.seed, kSeedCircuitGen, gen_ordinal),
        resolve_benchmark_defaults(cfg.kind, n, cfg.params));
    Mapping m = cfg.mapping == TrainMapping::kRandom
                    ? random_mapping(cfg.topology.num_qubits,
                                     derive_seed(cfg.seed, kSeedMapping, gen_ordinal))
                    : trivial_mapping(cfg.topology.num_qubits);
    return init_state(circuit, cfg.topology, std::move(m));
}

}  // namespace

void TrainConfig::validate() const {
    if (topology.num_qubits < 2) throw std::invalid_argument("train: topology too small");
    if (circuit_count < 1) throw std::invalid_argument("train: circuit_count must be positive");
    if (episodes < 0) throw std::invalid_argument("train: episodes must be non-negative");
    if (rollouts < 1) throw std::invalid_argument("train: rollouts must be positive");
    if (batch_size < 1) throw std::invalid_argument("train: batch_size must be positive");
    if (buffer_threshold < batch_size) {
        throw std::invalid_argument("train: buffer_threshold must be at least batch_size");
    }
    if (buffer_capacity < buffer_threshold) {
        throw std::invalid_argument("train: buffer_capacity must be at least the threshold");
    }
    if (alpha < 0.0) throw std::invalid_argument("train: alpha must be non-negative");
    if (lr <= 0.0 || lr_decay <= 0.0) {
        throw std::invalid_argument("train: learning rate and decay must be positive");
    }
    if (circuit_qubits == 0 || circuit_qubits == 1 || circuit_qubits > topology.num_qubits) {
        throw std::invalid_argument("train: circuit_qubits must be in [2, device size]");
    }
}

TrainResult train(const TrainConfig& cfg) {
    cfg.validate();

    TrainResult result;
    result.model = init_model<float>(agent_config_for(cfg.topology),
                                     derive_seed(cfg.seed, kSeedModelInit));
    result.opt = make_optimizer(result.model, cfg.lr, cfg.lr_decay);
    result.alpha_used = cfg.alpha;

    AgentModel<float>& model = result.model;
    OptimizerState<float>& opt = result.opt;

    std::deque<RoutingState> buffer;
    std::vector<Slot> slots(static_cast<std::size_t>(cfg.circuit_count));
    std::uint64_t gen_ordinal = 0;
    for (auto& slot : slots) {
        slot.state = fresh_state(cfg, gen_ordinal++);
        slot.live = true;
    }

    bool alpha_frozen = !cfg.alpha_auto;
    std::uint64_t update_ordinal = 0;

    for (int episode = 1; episode <= cfg.episodes; ++episode) {
        double swap_total = 0.0;
        double reward_total = 0.0;
        int rollouts_done = 0;
        int fallbacks = 0;

        for (std::size_t si = 0; si < slots.size(); ++si) {
            Slot& slot = slots[si];
            if (!slot.live) continue;

            RoutingState state = slot.state;
            const int initial_remaining = static_cast<int>(state.remaining.size());
            const long cap =
                10L * static_cast<long>(state.ctx->circuit.gates.size()) + 50L;
            Rng action_rng(derive_seed(
                cfg.seed, kSeedActionSampling,
                (static_cast<std::uint64_t>(episode) << 32) | static_cast<std::uint64_t>(si)));

            long steps = 0;
            bool fell_back = false;
            while (!is_terminal(state)) {
                if (steps >= cap) {
                    // The untrained policy can wander; hand the rest to
                    // the deterministic walker and keep those states out
                    // of the buffer.
                    fell_back = true;
                    while (!is_terminal(state)) {
                        state = step(state, basic_next_swap(state)).state;
                    }
                    break;
                }
                buffer.push_back(state);
                if (buffer.size() > static_cast<std::size_t>(cfg.buffer_capacity)) {
                    buffer.pop_front();
                }
                const AgentOutput<float> out = forward(model, encode_state(state, model));
                const int action = sample_index(out.policy, action_rng);
                state = step(state, state.ctx->topology.edges[static_cast<std::size_t>(action)])
                            .state;
                ++steps;
            }

            swap_total += static_cast<double>(state.swaps_applied);
            reward_total += static_cast<double>(initial_remaining - state.swaps_applied);
            rollouts_done += 1;
            if (fell_back) fallbacks += 1;

            if (cfg.regenerate) {
                slot.state = fresh_state(cfg, gen_ordinal++);
            } else {
                slot.live = false;
            }
        }

        int updates = 0;
        double mean_loss = 0.0;
        if (buffer.size() > static_cast<std::size_t>(cfg.buffer_threshold)) {
            Rng batch_rng(derive_seed(cfg.seed, kSeedBatchSampling, update_ordinal++));
            std::vector<std::size_t> indices(buffer.size());
            std::iota(indices.begin(), indices.end(), std::size_t{0});
            const std::size_t take =
                std::min<std::size_t>(static_cast<std::size_t>(cfg.batch_size), indices.size());
            for (std::size_t i = 0; i < take; ++i) {
                const std::size_t j =
                    i + static_cast<std::size_t>(
                            batch_rng.below(static_cast<int>(indices.size() - i)));
                std::swap(indices[i], indices[j]);
            }

            std::vector<TrainingExample<float>> batch;
            batch.reserve(take);
            auto value_fn = agent_value_fn(model);
            for (std::size_t i = 0; i < take; ++i) {
                const RoutingState& s = buffer[indices[i]];
                SearchOptions opt_search;
                opt_search.rollouts = cfg.rollouts;
                const SearchResult sr = search(s, value_fn, opt_search);
                batch.push_back({encode_state(s, model), sr.best_action_index,
                                 static_cast<float>(sr.root_value)});
            }

            if (!alpha_frozen) {
                double l1_sum = 0.0, l2_sum = 0.0;
                for (const auto& ex : batch) {
                    const AgentOutput<float> out = forward(model, ex.features);
                    const double p = std::max(static_cast<double>(out.policy(ex.action, 0)),
                                              1e-12);
                    l1_sum += -std::log(p);
                    const double diff =
                        static_cast<double>(ex.mcts_value) - static_cast<double>(out.value);
                    l2_sum += diff * diff;
                }
                result.alpha_used = l2_sum > 1e-12 ? l1_sum / l2_sum : cfg.alpha;
                alpha_frozen = true;
            }

            const BatchGradients<float> bg =
                gradients(model, batch, static_cast<float>(result.alpha_used));
            if (!std::isfinite(static_cast<double>(bg.loss))) {
                throw std::runtime_error("train: non-finite loss at episode " +
                                         std::to_string(episode));
            }
            adam_step(model, bg.grads, opt);
            if (!all_finite(model.params)) {
                throw std::runtime_error("train: non-finite parameters after update at episode " +
                                         std::to_string(episode));
            }
            mean_loss = static_cast<double>(bg.loss);
            updates = 1;
        }

        opt.lr *= cfg.lr_decay;

        EpisodeLog entry;
        entry.episode = episode;
        entry.has_loss = updates > 0;
        entry.mean_loss = mean_loss;
        entry.updates = updates;
        entry.buffer_size = buffer.size();
        entry.lr = opt.lr;
        entry.has_swaps = rollouts_done > 0;
        entry.mean_episode_swaps = rollouts_done > 0 ? swap_total / rollouts_done : 0.0;
        entry.mean_reward = rollouts_done > 0 ? reward_total / rollouts_done : 0.0;
        entry.fallbacks = fallbacks;
        result.log.push_back(entry);
    }

    return result;
}

std::string train_log_lines(const std::vector<EpisodeLog>& log) {
    std::ostringstream out;
    for (const EpisodeLog& e : log) {
        nlohmann::ordered_json j;
        j["episode"] = e.episode;
        if (e.has_loss) {
            j["mean_loss"] = e.mean_loss;
        } else {
            j["mean_loss"] = nullptr;
        }
        j["updates"] = e.updates;
        j["buffer_size"] = e.buffer_size;
        j["lr"] = e.lr;
        if (e.has_swaps) {
            j["mean_episode_swaps"] = e.mean_episode_swaps;
            j["mean_reward"] = e.mean_reward;
        } else {
            j["mean_episode_swaps"] = nullptr;
            j["mean_reward"] = nullptr;
        }
        j["fallbacks"] = e.fallbacks;
        out << j.dump() << '\n';
    }
    return out.str();
}

}  // namespace qroute
