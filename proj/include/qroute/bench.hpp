#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "qroute/circuit.hpp"
#include "qroute/env.hpp"
#include "qroute/topology.hpp"

namespace qroute {

enum class MappingMode { kTrivial, kRandom, kBidirectional };

MappingMode mapping_mode_from_string(const std::string& name);
std::string to_string(MappingMode mode);

struct NamedRouter {
    std::string name;
    Router router;
};

// One aggregate row: a (benchmark family, router) cell over `n_samples`
// seeded instances.
struct BenchCell {
    std::string benchmark;
    std::string topology;
    std::string router;
    std::string mapping;
    double mean_gates = 0.0;
    double mean_swaps = 0.0;
    double std_swaps = 0.0;  // population standard deviation
    int n_samples = 0;
    double mean_ms = 0.0;  // 0 unless timings were requested
};

struct BenchOptions {
    Topology topology;
    std::string topology_name;
    std::vector<BenchmarkKind> families;
    std::vector<NamedRouter> routers;
    MappingMode mapping = MappingMode::kTrivial;
    BenchmarkParams params;    // family defaults applied per family
    int circuit_qubits = -1;   // -1: full device
    int seeds = 10;
    std::uint64_t seed = 0;
    // Wall-clock timing makes output runs differ byte for byte, so it is
    // opt-in; mean_ms stays 0 otherwise.
    bool timings = false;
};

// Routes every (family, seed, router) instance, verifies each routed
// circuit, and aggregates. Throws if any routed circuit fails
// verification. Rows come back sorted by (benchmark, router).
std::vector<BenchCell> run_bench(const BenchOptions& opt);

std::string bench_csv(const std::vector<BenchCell>& cells);
std::string bench_json(const std::vector<BenchCell>& cells);

// Swaps-versus-gates series on the random family, for scaling analysis.
struct PlotPoint {
    std::string router;
    int n_gates = 0;
    double mean_swaps = 0.0;
    double std_swaps = 0.0;
    int n_samples = 0;
};

struct PlotOptions {
    Topology topology;
    std::vector<NamedRouter> routers;
    MappingMode mapping = MappingMode::kTrivial;
    int circuit_qubits = -1;
    int min_gates = 20;
    int max_gates = 120;
    int step = 10;
    int seeds = 10;
    std::uint64_t seed = 0;
};

std::vector<PlotPoint> run_plot_data(const PlotOptions& opt);
std::string plot_csv(const std::vector<PlotPoint>& points);

}  // namespace qroute
