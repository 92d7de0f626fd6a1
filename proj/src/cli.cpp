#include "qroute/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>

#include "qroute/agent.hpp"
#include "qroute/checkpoint.hpp"
#include "qroute/circuit.hpp"
#include "qroute/mcts.hpp"
#include "qroute/rng.hpp"
#include "qroute/trainer.hpp"

namespace qroute::cli {

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open file for writing: " + path);
    out << content;
    if (!out) throw std::runtime_error("write failed: " + path);
}

BenchmarkParams params_from(int gate_count, int layers, double edge_prob,
                            const std::string& bitstring) {
    BenchmarkParams p;
    p.gate_count = gate_count;
    p.layers = layers;
    p.edge_prob = edge_prob;
    p.bitstring = bitstring;
    return p;
}

std::vector<std::string> split_csv(const std::string& s) {
    std::vector<std::string> parts;
    std::string item;
    std::istringstream ss(s);
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) parts.push_back(item);
    }
    return parts;
}

std::shared_ptr<AgentModel<float>> load_model(const std::string& path, const Topology& t) {
    auto model = std::make_shared<AgentModel<float>>(load_checkpoint(path).model);
    require_topology(model->cfg, t);
    return model;
}

}  // namespace

std::uint64_t default_seed() {
    const char* env = std::getenv("QROUTE_SEED");
    if (env == nullptr || *env == '\0') return 0;
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end == nullptr || *end != '\0') {
        throw std::runtime_error("QROUTE_SEED must be an unsigned integer");
    }
    return static_cast<std::uint64_t>(v);
}

std::string run_gen(const GenOptions& opt) {
    const BenchmarkKind kind = benchmark_kind_from_string(opt.kind);
    const BenchmarkParams params = resolve_benchmark_defaults(
        kind, opt.qubits,
        params_from(opt.gate_count, opt.layers, opt.edge_prob, opt.bitstring));
    const LogicalCircuit c = generate_benchmark(kind, opt.qubits, opt.seed, params);
    const std::string text = serialize_circuit(c);
    if (!opt.out.empty()) write_file(opt.out, text);
    return text;
}

Router make_router(const RouterOptions& opt, const Topology& t) {
    if (opt.name == "basic") {
        return [](const LogicalCircuit& c, const Topology& top, const Mapping& m) {
            return route_basic(c, top, m);
        };
    }
    if (opt.name == "stochastic") {
        StochasticConfig cfg;
        cfg.trials = opt.trials;
        cfg.seed = opt.seed;
        return [cfg](const LogicalCircuit& c, const Topology& top, const Mapping& m) {
            return route_stochastic(c, top, m, cfg);
        };
    }
    if (opt.name == "sabre") {
        return [](const LogicalCircuit& c, const Topology& top, const Mapping& m) {
            return route_sabre(c, top, m);
        };
    }
    if (opt.name == "oracle") {
        const long limit = opt.oracle_limit;
        return [limit](const LogicalCircuit& c, const Topology& top, const Mapping& m) {
            auto rc = optimal_route(c, top, m, limit);
            if (!rc) {
                throw std::runtime_error(
                    "oracle: state limit exhausted (instance too large for exact search)");
            }
            return *rc;
        };
    }
    if (opt.name == "mcts") {
        std::shared_ptr<AgentModel<float>> model;
        if (!opt.checkpoint.empty()) model = load_model(opt.checkpoint, t);
        const int rollouts = opt.rollouts;
        return [model, rollouts](const LogicalCircuit& c, const Topology& top, const Mapping& m) {
            Policy policy = [model, rollouts](const RoutingState& s) {
                SearchOptions so;
                so.rollouts = rollouts;
                if (model) {
                    auto value_fn = [&model](const RoutingState& leaf) {
                        return static_cast<double>(
                            forward(*model, encode_state(leaf, *model)).value);
                    };
                    return search(s, value_fn, so).best_action;
                }
                return search(s, zero_value, so).best_action;
            };
            return route(c, top, m, policy);
        };
    }
    if (opt.name == "agent") {
        if (opt.checkpoint.empty()) {
            throw std::runtime_error("agent router requires --checkpoint");
        }
        auto model = load_model(opt.checkpoint, t);
        return [model](const LogicalCircuit& c, const Topology& top, const Mapping& m) {
            Policy policy = [model](const RoutingState& s) {
                const AgentOutput<float> out = forward(*model, encode_state(s, *model));
                Eigen::Index best = 0;
                out.policy.col(0).maxCoeff(&best);
                return s.ctx->topology.edges[static_cast<std::size_t>(best)];
            };
            return route(c, top, m, policy);
        };
    }
    throw std::runtime_error("unknown router: " + opt.name);
}

std::string run_route(const RouteOptions& opt) {
    const LogicalCircuit c = parse_circuit(read_file(opt.circuit));
    const Topology t = topology_from_spec(opt.topology);
    RouterOptions router_opt = opt.router;
    router_opt.seed = opt.seed;
    const Router router = make_router(router_opt, t);

    Mapping m0 = trivial_mapping(t.num_qubits);
    const MappingMode mode = mapping_mode_from_string(opt.mapping);
    if (mode == MappingMode::kRandom) {
        m0 = random_mapping(t.num_qubits, opt.seed);
    } else if (mode == MappingMode::kBidirectional) {
        m0 = bidirectional_initial_mapping(c, t, router, m0);
    }

    const RoutedCircuit rc = router(c, t, m0);
    if (opt.verify) {
        const VerifyResult vr = verify(rc, c, t);
        if (!vr.ok) {
            std::string msg = "routing failed verification:";
            for (const auto& v : vr.violations) msg += "\n  " + v;
            throw std::runtime_error(msg);
        }
    }
    const std::string text = serialize_routed(rc);
    if (!opt.out.empty()) write_file(opt.out, text);
    return text;
}

VerifyResult run_verify(const VerifyOptions& opt) {
    const LogicalCircuit c = parse_circuit(read_file(opt.circuit));
    const Topology t = topology_from_spec(opt.topology);
    const RoutedCircuit rc = parse_routed(read_file(opt.routed));
    return verify(rc, c, t);
}

std::string run_train(const TrainOptions& opt) {
    TrainConfig cfg;
    cfg.topology = topology_from_spec(opt.topology);
    cfg.kind = benchmark_kind_from_string(opt.kind);
    cfg.params = params_from(opt.gate_count, opt.layers, opt.edge_prob, opt.bitstring);
    cfg.circuit_qubits = opt.qubits;
    cfg.circuit_count = opt.circuits;
    cfg.episodes = opt.episodes;
    cfg.rollouts = opt.rollouts;
    cfg.batch_size = opt.batch_size;
    cfg.buffer_threshold = opt.buffer_threshold;
    cfg.buffer_capacity = opt.buffer_capacity;
    cfg.alpha = opt.alpha;
    cfg.alpha_auto = opt.alpha_auto;
    cfg.lr = opt.lr;
    cfg.lr_decay = opt.lr_decay;
    cfg.seed = opt.seed;
    cfg.regenerate = opt.regenerate;
    if (opt.mapping == "trivial") {
        cfg.mapping = TrainMapping::kTrivial;
    } else if (opt.mapping == "random") {
        cfg.mapping = TrainMapping::kRandom;
    } else {
        throw std::runtime_error("train supports trivial or random mapping, got: " + opt.mapping);
    }

    const TrainResult result = train(cfg);
    if (!opt.out.empty()) save_checkpoint(result.model, result.opt, opt.out);
    const std::string log = train_log_lines(result.log);
    if (!opt.log.empty()) write_file(opt.log, log);
    return log;
}

BenchOutputs run_bench_cli(const BenchCliOptions& opt) {
    const Topology t = topology_from_spec(opt.topology);
    RouterOptions router_cfg = opt.router_cfg;
    router_cfg.seed = opt.seed;

    std::vector<NamedRouter> routers;
    for (const std::string& name : split_csv(opt.routers)) {
        RouterOptions ro = router_cfg;
        ro.name = name;
        routers.push_back({name, make_router(ro, t)});
    }

    BenchOutputs outputs;
    if (opt.plot_data) {
        PlotOptions po;
        po.topology = t;
        po.routers = std::move(routers);
        po.mapping = mapping_mode_from_string(opt.mapping);
        po.circuit_qubits = opt.qubits;
        po.min_gates = opt.min_gates;
        po.max_gates = opt.max_gates;
        po.step = opt.step;
        po.seeds = opt.seeds;
        po.seed = opt.seed;
        outputs.plot = plot_csv(run_plot_data(po));
        if (!opt.out_csv.empty()) write_file(opt.out_csv, outputs.plot);
        return outputs;
    }

    BenchOptions bo;
    bo.topology = t;
    bo.topology_name = opt.topology;
    if (opt.suite == "all") {
        bo.families = {BenchmarkKind::Regular, BenchmarkKind::Erdos, BenchmarkKind::Qft,
                       BenchmarkKind::Qv,      BenchmarkKind::Ghz,   BenchmarkKind::Bv,
                       BenchmarkKind::Hs,      BenchmarkKind::Random};
    } else {
        for (const std::string& name : split_csv(opt.suite)) {
            bo.families.push_back(benchmark_kind_from_string(name));
        }
    }
    bo.routers = std::move(routers);
    bo.mapping = mapping_mode_from_string(opt.mapping);
    bo.params.gate_count = opt.gate_count;
    bo.circuit_qubits = opt.qubits;
    bo.seeds = opt.seeds;
    bo.seed = opt.seed;
    bo.timings = opt.timings;

    const std::vector<BenchCell> cells = run_bench(bo);
    outputs.csv = bench_csv(cells);
    outputs.json = bench_json(cells);
    if (!opt.out_csv.empty()) write_file(opt.out_csv, outputs.csv);
    if (!opt.out_json.empty()) write_file(opt.out_json, outputs.json);
    return outputs;
}

}  // namespace qroute::cli
