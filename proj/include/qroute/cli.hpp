#pragma once

#include <cstdint>
#include <string>

#include "qroute/baselines.hpp"
#include "qroute/bench.hpp"
#include "qroute/env.hpp"
#include "qroute/topology.hpp"

namespace qroute::cli {

// Default seed for all subcommands: QROUTE_SEED from the environment, else 0.
std::uint64_t default_seed();

// The run_* entry points do the real work and return the primary output as
// a string (also writing any requested files), so determinism can be
// checked by invoking them twice and comparing bytes.

struct GenOptions {
    std::string kind = "random";
    int qubits = 5;
    std::uint64_t seed = 0;
    int gate_count = -1;
    int layers = 1;
    double edge_prob = 0.5;
    std::string bitstring;
    std::string out;
};
std::string run_gen(const GenOptions& opt);

struct RouterOptions {
    std::string name = "basic";  // basic|stochastic|sabre|mcts|agent|oracle
    int rollouts = 200;          // mcts
    int trials = 20;             // stochastic
    std::string checkpoint;      // agent (required), mcts (optional value net)
    long oracle_limit = kOracleDefaultLimit;
    std::uint64_t seed = 0;
};
Router make_router(const RouterOptions& opt, const Topology& t);

struct RouteOptions {
    std::string circuit;            // path to circuit JSON
    std::string topology = "ring5"; // named spec or topology JSON path
    RouterOptions router;
    std::string mapping = "trivial";  // trivial|random|bidirectional
    bool verify = true;
    std::uint64_t seed = 0;
    std::string out;
};
std::string run_route(const RouteOptions& opt);

struct VerifyOptions {
    std::string circuit;
    std::string topology;
    std::string routed;  // path to routed JSON
};
VerifyResult run_verify(const VerifyOptions& opt);

struct TrainOptions {
    std::string topology = "ring5";
    std::string kind = "random";
    int qubits = -1;
    int gate_count = -1;
    int layers = 1;
    double edge_prob = 0.5;
    std::string bitstring;
    int circuits = 8;
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
    bool regenerate = true;
    std::string mapping = "trivial";  // trivial|random
    std::string out = "model.ckpt";
    std::string log;
};
std::string run_train(const TrainOptions& opt);  // returns the JSON-lines log

struct BenchCliOptions {
    std::string topology = "grid3x4";
    std::string suite = "all";  // "all" or comma-separated family names
    std::string routers = "basic,stochastic,sabre";
    std::string mapping = "trivial";
    int seeds = 10;
    std::uint64_t seed = 0;
    int qubits = -1;
    int gate_count = -1;
    bool timings = false;
    std::string out_csv;
    std::string out_json;
    bool plot_data = false;  // emit the swaps-vs-gates series instead
    int min_gates = 20;
    int max_gates = 120;
    int step = 10;
    RouterOptions router_cfg;  // shared knobs for mcts/agent entries
};
struct BenchOutputs {
    std::string csv;
    std::string json;
    std::string plot;
};
BenchOutputs run_bench_cli(const BenchCliOptions& opt);

}  // namespace qroute::cli
