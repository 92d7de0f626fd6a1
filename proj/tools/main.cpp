#include <cstdio>
#include <exception>
#include <iostream>

#include "CLI11.hpp"

#include "qroute/cli.hpp"

namespace {

void add_router_flags(CLI::App* cmd, qroute::cli::RouterOptions& opt, bool include_name) {
    if (include_name) {
        cmd->add_option("--router", opt.name,
                        "Router: basic|stochastic|sabre|mcts|agent|oracle");
    }
    cmd->add_option("--rollouts", opt.rollouts, "MCTS rollouts per decision");
    cmd->add_option("--trials", opt.trials, "Stochastic attempts per layer");
    cmd->add_option("--checkpoint", opt.checkpoint,
                    "Model checkpoint (required for agent, optional value net for mcts)");
    cmd->add_option("--oracle-limit", opt.oracle_limit, "Oracle state-count limit");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quantum circuit SWAP router: generate, route, train, verify, benchmark"};
    app.require_subcommand(1);

    std::uint64_t seed = 0;
    try {
        seed = qroute::cli::default_seed();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }

    qroute::cli::GenOptions gen;
    gen.seed = seed;
    CLI::App* cmd_gen = app.add_subcommand("gen", "Generate a benchmark circuit");
    cmd_gen->add_option("--kind", gen.kind,
                        "Family: regular|erdos|qft|qv|ghz|bv|hs|random");
    cmd_gen->add_option("--qubits", gen.qubits, "Logical qubit count");
    cmd_gen->add_option("--seed", gen.seed, "Seed");
    cmd_gen->add_option("--gates", gen.gate_count, "Gate count (random family)");
    cmd_gen->add_option("--layers", gen.layers, "Layer count (regular/erdos)");
    cmd_gen->add_option("--edge-prob", gen.edge_prob, "Edge probability (erdos)");
    cmd_gen->add_option("--bitstring", gen.bitstring, "Hidden string (bv)");
    cmd_gen->add_option("--out", gen.out, "Output path (stdout if omitted)");

    qroute::cli::RouteOptions route;
    route.seed = seed;
    CLI::App* cmd_route = app.add_subcommand("route", "Route a circuit onto a topology");
    cmd_route->add_option("--circuit", route.circuit, "Circuit JSON path")->required();
    cmd_route->add_option("--topology", route.topology,
                          "Topology spec (ring5, grid3x4, guadalupe, ...) or JSON path");
    add_router_flags(cmd_route, route.router, true);
    cmd_route->add_option("--mapping", route.mapping, "trivial|random|bidirectional");
    cmd_route->add_flag("--verify,!--no-verify", route.verify,
                        "Re-check the routed circuit (default on)");
    cmd_route->add_option("--seed", route.seed, "Seed");
    cmd_route->add_option("--out", route.out, "Output path (stdout if omitted)");

    qroute::cli::VerifyOptions verify;
    CLI::App* cmd_verify = app.add_subcommand("verify", "Verify a routed circuit");
    cmd_verify->add_option("--circuit", verify.circuit, "Circuit JSON path")->required();
    cmd_verify->add_option("--topology", verify.topology, "Topology spec or JSON path")
        ->required();
    cmd_verify->add_option("--routed", verify.routed, "Routed JSON path")->required();

    qroute::cli::TrainOptions train;
    train.seed = seed;
    CLI::App* cmd_train = app.add_subcommand("train", "Train the routing agent");
    cmd_train->add_option("--topology", train.topology, "Topology spec or JSON path");
    cmd_train->add_option("--kind", train.kind, "Benchmark family for training circuits");
    cmd_train->add_option("--qubits", train.qubits, "Circuit width (default: device size)");
    cmd_train->add_option("--gates", train.gate_count, "Gate count (random family)");
    cmd_train->add_option("--layers", train.layers, "Layer count (regular/erdos)");
    cmd_train->add_option("--edge-prob", train.edge_prob, "Edge probability (erdos)");
    cmd_train->add_option("--bitstring", train.bitstring, "Hidden string (bv)");
    cmd_train->add_option("--circuits", train.circuits, "Parallel circuit slots N");
    cmd_train->add_option("--episodes", train.episodes, "Episode count");
    cmd_train->add_option("--rollouts", train.rollouts, "MCTS rollouts per target");
    cmd_train->add_option("--batch-size", train.batch_size, "Update batch size");
    cmd_train->add_option("--buffer-threshold", train.buffer_threshold,
                          "Buffer size that enables updates");
    cmd_train->add_option("--buffer-capacity", train.buffer_capacity, "Replay buffer capacity");
    cmd_train->add_option("--alpha", train.alpha, "Value-loss weight");
    cmd_train->add_flag("--alpha-auto", train.alpha_auto,
                        "Balance alpha on the first batch");
    cmd_train->add_option("--lr", train.lr, "Learning rate");
    cmd_train->add_option("--lr-decay", train.lr_decay, "Per-episode learning-rate decay");
    cmd_train->add_option("--seed", train.seed, "Seed");
    cmd_train->add_flag("--regenerate,!--no-regenerate", train.regenerate,
                        "Replace finished circuits with fresh ones (default on)");
    cmd_train->add_option("--mapping", train.mapping, "trivial|random");
    cmd_train->add_option("--out", train.out, "Checkpoint output path");
    cmd_train->add_option("--log", train.log, "Training log path (JSON lines)");

    qroute::cli::BenchCliOptions bench;
    bench.seed = seed;
    CLI::App* cmd_bench = app.add_subcommand("bench", "Compare routers across families");
    cmd_bench->add_option("--topology", bench.topology, "Topology spec or JSON path");
    cmd_bench->add_option("--suite", bench.suite, "\"all\" or comma-separated families");
    cmd_bench->add_option("--routers", bench.routers, "Comma-separated router names");
    cmd_bench->add_option("--mapping", bench.mapping, "trivial|random|bidirectional");
    cmd_bench->add_option("--seeds", bench.seeds, "Instances per cell");
    cmd_bench->add_option("--seed", bench.seed, "Base seed");
    cmd_bench->add_option("--qubits", bench.qubits, "Circuit width (default: device size)");
    cmd_bench->add_option("--gates", bench.gate_count, "Gate count override (random family)");
    cmd_bench->add_flag("--timings", bench.timings, "Measure wall-clock routing time");
    cmd_bench->add_option("--out-csv", bench.out_csv, "CSV output path");
    cmd_bench->add_option("--out-json", bench.out_json, "JSON output path");
    cmd_bench->add_flag("--plot-data", bench.plot_data,
                        "Emit a swaps-vs-gates series (random family) instead of the table");
    cmd_bench->add_option("--min-gates", bench.min_gates, "Series start (plot-data)");
    cmd_bench->add_option("--max-gates", bench.max_gates, "Series end (plot-data)");
    cmd_bench->add_option("--step", bench.step, "Series step (plot-data)");
    add_router_flags(cmd_bench, bench.router_cfg, false);

    CLI11_PARSE(app, argc, argv);

    try {
        if (cmd_gen->parsed()) {
            const std::string text = qroute::cli::run_gen(gen);
            if (gen.out.empty()) std::cout << text;
            return 0;
        }
        if (cmd_route->parsed()) {
            const std::string text = qroute::cli::run_route(route);
            if (route.out.empty()) std::cout << text;
            return 0;
        }
        if (cmd_verify->parsed()) {
            const qroute::VerifyResult vr = qroute::cli::run_verify(verify);
            if (vr.ok) {
                std::cout << "OK\n";
                return 0;
            }
            for (const auto& v : vr.violations) std::cout << "VIOLATION: " << v << '\n';
            return 1;
        }
        if (cmd_train->parsed()) {
            const std::string log = qroute::cli::run_train(train);
            if (train.log.empty()) std::cout << log;
            return 0;
        }
        if (cmd_bench->parsed()) {
            const qroute::cli::BenchOutputs out = qroute::cli::run_bench_cli(bench);
            if (bench.plot_data) {
                if (bench.out_csv.empty()) std::cout << out.plot;
            } else if (bench.out_csv.empty() && bench.out_json.empty()) {
                std::cout << out.csv;
            }
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
