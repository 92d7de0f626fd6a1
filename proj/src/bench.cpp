#include "qroute/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "qroute/rng.hpp"

namespace qroute {

namespace {

// Seed-stream tags for bench: circuits and mappings get independent
// streams per (family, sample).
constexpr std::uint64_t kSeedCircuit = 1;
constexpr std::uint64_t kSeedMapping = 2;

std::string fmt6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

struct SampleStats {
    double mean = 0.0;
    double stddev = 0.0;
};

SampleStats stats_of(const std::vector<double>& xs) {
    SampleStats s;
    if (xs.empty()) return s;
    double sum = 0.0;
    for (double x : xs) sum += x;
    s.mean = sum / static_cast<double>(xs.size());
    double sq = 0.0;
    for (double x : xs) sq += (x - s.mean) * (x - s.mean);
    s.stddev = std::sqrt(sq / static_cast<double>(xs.size()));
    return s;
}

Mapping initial_mapping_for(MappingMode mode, const LogicalCircuit& c, const Topology& t,
                            const Router& router, std::uint64_t mapping_seed) {
    switch (mode) {
        case MappingMode::kTrivial:
            return trivial_mapping(t.num_qubits);
        case MappingMode::kRandom:
            return random_mapping(t.num_qubits, mapping_seed);
        case MappingMode::kBidirectional:
            return bidirectional_initial_mapping(c, t, router, trivial_mapping(t.num_qubits));
    }
    throw std::logic_error("unreachable mapping mode");
}

}  // namespace

MappingMode mapping_mode_from_string(const std::string& name) {
    if (name == "trivial") return MappingMode::kTrivial;
    if (name == "random") return MappingMode::kRandom;
    if (name == "bidirectional") return MappingMode::kBidirectional;
    throw std::runtime_error("unknown mapping mode: " + name);
}

std::string to_string(MappingMode mode) {
    switch (mode) {
        case MappingMode::kTrivial: return "trivial";
        case MappingMode::kRandom: return "random";
        case MappingMode::kBidirectional: return "bidirectional";
    }
    throw std::logic_error("unreachable mapping mode");
}

std::vector<BenchCell> run_bench(const BenchOptions& opt) {
    if (opt.seeds < 1) throw std::invalid_argument("bench: seeds must be positive");
    if (opt.families.empty()) throw std::invalid_argument("bench: no benchmark families");
    if (opt.routers.empty()) throw std::invalid_argument("bench: no routers");
    const int n =
        opt.circuit_qubits > 0 ? opt.circuit_qubits : opt.topology.num_qubits;

    std::vector<BenchCell> cells;
    for (std::size_t fi = 0; fi < opt.families.size(); ++fi) {
        const BenchmarkKind kind = opt.families[fi];
        const BenchmarkParams params = resolve_benchmark_defaults(kind, n, opt.params);

        for (const NamedRouter& nr : opt.routers) {
            std::vector<double> swaps, gates, millis;
            for (int s = 0; s < opt.seeds; ++s) {
                const std::uint64_t tag = (static_cast<std::uint64_t>(fi) << 32) |
                                          static_cast<std::uint64_t>(s);
                const LogicalCircuit c = generate_benchmark(
                    kind, n, derive_seed(opt.seed, kSeedCircuit, tag), params);
                const Mapping m0 = initial_mapping_for(opt.mapping, c, opt.topology, nr.router,
                                                       derive_seed(opt.seed, kSeedMapping, tag));

                const auto t0 = std::chrono::steady_clock::now();
                const RoutedCircuit rc = nr.router(c, opt.topology, m0);
                const auto t1 = std::chrono::steady_clock::now();

                const VerifyResult vr = verify(rc, c, opt.topology);
                if (!vr.ok) {
                    throw std::runtime_error("bench: router '" + nr.name + "' produced an " +
                                             "invalid routing on " + to_string(kind) + " seed " +
                                             std::to_string(s) + ": " + vr.violations.front());
                }
                swaps.push_back(static_cast<double>(rc.swap_count));
                gates.push_back(static_cast<double>(c.gates.size()));
                if (opt.timings) {
                    millis.push_back(
                        std::chrono::duration<double, std::milli>(t1 - t0).count());
                }
            }

            BenchCell cell;
            cell.benchmark = to_string(kind);
            cell.topology = opt.topology_name;
            cell.router = nr.name;
            cell.mapping = to_string(opt.mapping);
            cell.mean_gates = stats_of(gates).mean;
            const SampleStats ss = stats_of(swaps);
            cell.mean_swaps = ss.mean;
            cell.std_swaps = ss.stddev;
            cell.n_samples = opt.seeds;
            cell.mean_ms = opt.timings ? stats_of(millis).mean : 0.0;
            cells.push_back(std::move(cell));
        }
    }

    std::sort(cells.begin(), cells.end(), [](const BenchCell& a, const BenchCell& b) {
        if (a.benchmark != b.benchmark) return a.benchmark < b.benchmark;
        return a.router < b.router;
    });
    return cells;
}

std::string bench_csv(const std::vector<BenchCell>& cells) {
    std::ostringstream out;
    out << "benchmark,topology,router,mapping,n_gates,mean_swaps,std_swaps,n_samples,mean_ms\n";
    for (const BenchCell& c : cells) {
        out << c.benchmark << ',' << c.topology << ',' << c.router << ',' << c.mapping << ','
            << fmt6(c.mean_gates) << ',' << fmt6(c.mean_swaps) << ',' << fmt6(c.std_swaps) << ','
            << c.n_samples << ',' << fmt6(c.mean_ms) << '\n';
    }
    return out.str();
}

std::string bench_json(const std::vector<BenchCell>& cells) {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const BenchCell& c : cells) {
        nlohmann::ordered_json row;
        row["benchmark"] = c.benchmark;
        row["topology"] = c.topology;
        row["router"] = c.router;
        row["mapping"] = c.mapping;
        row["n_gates"] = c.mean_gates;
        row["mean_swaps"] = c.mean_swaps;
        row["std_swaps"] = c.std_swaps;
        row["n_samples"] = c.n_samples;
        row["mean_ms"] = c.mean_ms;
        rows.push_back(std::move(row));
    }
    return rows.dump(2) + "\n";
}

std::vector<PlotPoint> run_plot_data(const PlotOptions& opt) {
    if (opt.seeds < 1) throw std::invalid_argument("plot-data: seeds must be positive");
    if (opt.routers.empty()) throw std::invalid_argument("plot-data: no routers");
    if (opt.min_gates < 1 || opt.max_gates < opt.min_gates || opt.step < 1) {
        throw std::invalid_argument("plot-data: bad gate-count range");
    }
    const int n =
        opt.circuit_qubits > 0 ? opt.circuit_qubits : opt.topology.num_qubits;

    std::vector<PlotPoint> points;
    for (const NamedRouter& nr : opt.routers) {
        for (int g = opt.min_gates; g <= opt.max_gates; g += opt.step) {
            BenchmarkParams params;
            params.gate_count = g;
            std::vector<double> swaps;
            for (int s = 0; s < opt.seeds; ++s) {
                const std::uint64_t tag = (static_cast<std::uint64_t>(g) << 32) |
                                          static_cast<std::uint64_t>(s);
                const LogicalCircuit c = generate_benchmark(
                    BenchmarkKind::Random, n, derive_seed(opt.seed, kSeedCircuit, tag), params);
                const Mapping m0 = initial_mapping_for(opt.mapping, c, opt.topology, nr.router,
                                                       derive_seed(opt.seed, kSeedMapping, tag));
                const RoutedCircuit rc = nr.router(c, opt.topology, m0);
                const VerifyResult vr = verify(rc, c, opt.topology);
                if (!vr.ok) {
                    throw std::runtime_error("plot-data: router '" + nr.name +
                                             "' produced an invalid routing: " +
                                             vr.violations.front());
                }
                swaps.push_back(static_cast<double>(rc.swap_count));
            }
            const SampleStats ss = stats_of(swaps);
            points.push_back({nr.name, g, ss.mean, ss.stddev, opt.seeds});
        }
    }
    return points;
}

std::string plot_csv(const std::vector<PlotPoint>& points) {
    std::ostringstream out;
    out << "router,n_gates,mean_swaps,std_swaps,n_samples\n";
    for (const PlotPoint& p : points) {
        out << p.router << ',' << p.n_gates << ',' << fmt6(p.mean_swaps) << ','
            << fmt6(p.std_swaps) << ',' << p.n_samples << '\n';
    }
    return out.str();
}

}  // namespace qroute
