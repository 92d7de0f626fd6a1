#include "qroute/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace qroute {

namespace {

constexpr char kMagic[8] = {'Q', 'R', 'C', 'K', 'P', 'T', '0', '1'};
constexpr std::uint32_t kByteOrderMark = 0x01020304u;
constexpr std::uint32_t kVersion = 1;

void ensure_little_endian() {
    const std::uint32_t probe = kByteOrderMark;
    unsigned char bytes[4];
    std::memcpy(bytes, &probe, 4);
    if (bytes[0] != 0x04 || bytes[3] != 0x01) {
        throw std::runtime_error("checkpoint: only little-endian hosts are supported");
    }
}

template <typename T>
void write_pod(std::ofstream& out, const T& value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::ifstream& in) {
    T value{};
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!in) throw std::runtime_error("checkpoint: truncated file");
    return value;
}

void write_string(std::ofstream& out, const std::string& s) {
    write_pod(out, static_cast<std::uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::ifstream& in) {
    const auto len = read_pod<std::uint32_t>(in);
    if (len > 4096) throw std::runtime_error("checkpoint: implausible tensor name length");
    std::string s(len, '\0');
    in.read(s.data(), static_cast<std::streamsize>(len));
    if (!in) throw std::runtime_error("checkpoint: truncated file");
    return s;
}

// The persisted tensor order: model parameters, then the first and second
// Adam moments, each in the canonical enumeration order.
std::vector<ConstTensorView<float>> persisted_views(const AgentModel<float>& model,
                                                    const OptimizerState<float>& opt) {
    std::vector<ConstTensorView<float>> all;
    for (const auto& v : tensor_views(model.params)) all.push_back(v);
    for (const auto& v : tensor_views(opt.m)) all.push_back({"opt.m." + v.name, v.mat});
    for (const auto& v : tensor_views(opt.v)) all.push_back({"opt.v." + v.name, v.mat});
    return all;
}

std::vector<TensorView<float>> persisted_views_mut(AgentModel<float>& model,
                                                   OptimizerState<float>& opt) {
    std::vector<TensorView<float>> all;
    for (const auto& v : tensor_views(model.params)) all.push_back(v);
    for (const auto& v : tensor_views(opt.m)) all.push_back({"opt.m." + v.name, v.mat});
    for (const auto& v : tensor_views(opt.v)) all.push_back({"opt.v." + v.name, v.mat});
    return all;
}

}  // namespace

void save_checkpoint(const AgentModel<float>& model, const OptimizerState<float>& opt,
                     const std::string& path) {
    ensure_little_endian();
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("checkpoint: cannot open for writing: " + path);

    const AgentConfig& cfg = model.cfg;
    out.write(kMagic, sizeof(kMagic));
    write_pod(out, kByteOrderMark);
    write_pod(out, kVersion);
    write_pod(out, static_cast<std::int32_t>(cfg.num_phys));
    write_pod(out, static_cast<std::int32_t>(cfg.num_actions));
    write_pod(out, static_cast<std::uint64_t>(cfg.topo_fingerprint));
    write_pod(out, static_cast<std::int32_t>(cfg.emb_dim));
    write_pod(out, static_cast<std::int32_t>(cfg.d_model));
    write_pod(out, static_cast<std::int32_t>(cfg.n_layers));
    write_pod(out, static_cast<std::int32_t>(cfg.n_heads));
    write_pod(out, static_cast<std::int32_t>(cfg.d_ff));
    write_pod(out, static_cast<std::int32_t>(cfg.lookahead));
    write_pod(out, static_cast<std::uint64_t>(opt.step));
    write_pod(out, static_cast<double>(opt.lr));
    write_pod(out, static_cast<double>(opt.lr_decay));

    const auto views = persisted_views(model, opt);
    write_pod(out, static_cast<std::uint32_t>(views.size()));
    std::uint64_t offset = 0;
    for (const auto& v : views) {
        write_string(out, v.name);
        write_pod(out, static_cast<std::int64_t>(v.mat->rows()));
        write_pod(out, static_cast<std::int64_t>(v.mat->cols()));
        write_pod(out, offset);
        offset += static_cast<std::uint64_t>(v.mat->size()) * sizeof(float);
    }
    for (const auto& v : views) {
        out.write(reinterpret_cast<const char*>(v.mat->data()),
                  static_cast<std::streamsize>(v.mat->size() * sizeof(float)));
    }
    if (!out) throw std::runtime_error("checkpoint: write failed: " + path);
}

CheckpointData load_checkpoint(const std::string& path) {
    ensure_little_endian();
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("checkpoint: cannot open for reading: " + path);

    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
        throw std::runtime_error("checkpoint: bad magic (not a checkpoint file): " + path);
    }
    if (read_pod<std::uint32_t>(in) != kByteOrderMark) {
        throw std::runtime_error("checkpoint: byte-order mismatch: " + path);
    }
    if (read_pod<std::uint32_t>(in) != kVersion) {
        throw std::runtime_error("checkpoint: unsupported format version: " + path);
    }

    AgentConfig cfg;
    cfg.num_phys = read_pod<std::int32_t>(in);
    cfg.num_actions = read_pod<std::int32_t>(in);
    cfg.topo_fingerprint = read_pod<std::uint64_t>(in);
    cfg.emb_dim = read_pod<std::int32_t>(in);
    cfg.d_model = read_pod<std::int32_t>(in);
    cfg.n_layers = read_pod<std::int32_t>(in);
    cfg.n_heads = read_pod<std::int32_t>(in);
    cfg.d_ff = read_pod<std::int32_t>(in);
    cfg.lookahead = read_pod<std::int32_t>(in);
    cfg.validate();

    CheckpointData data;
    data.model.cfg = cfg;
    data.model.params = zeros_like<float>(cfg);
    data.opt.m = zeros_like<float>(cfg);
    data.opt.v = zeros_like<float>(cfg);
    data.opt.step = static_cast<long>(read_pod<std::uint64_t>(in));
    data.opt.lr = read_pod<double>(in);
    data.opt.lr_decay = read_pod<double>(in);

    const auto views = persisted_views_mut(data.model, data.opt);
    const auto count = read_pod<std::uint32_t>(in);
    if (count != views.size()) {
        throw std::runtime_error("checkpoint: tensor manifest size mismatch: " + path);
    }
    std::uint64_t expected_offset = 0;
    for (const auto& v : views) {
        const std::string name = read_string(in);
        const auto rows = read_pod<std::int64_t>(in);
        const auto cols = read_pod<std::int64_t>(in);
        const auto offset = read_pod<std::uint64_t>(in);
        if (name != v.name || rows != v.mat->rows() || cols != v.mat->cols() ||
            offset != expected_offset) {
            throw std::runtime_error("checkpoint: manifest entry mismatch at tensor '" + name +
                                     "': " + path);
        }
        expected_offset += static_cast<std::uint64_t>(v.mat->size()) * sizeof(float);
    }
    for (const auto& v : views) {
        in.read(reinterpret_cast<char*>(v.mat->data()),
                static_cast<std::streamsize>(v.mat->size() * sizeof(float)));
        if (!in) throw std::runtime_error("checkpoint: truncated payload: " + path);
    }
    return data;
}

void require_topology(const AgentConfig& cfg, const Topology& t) {
    if (cfg.num_phys != t.num_qubits ||
        cfg.num_actions != static_cast<int>(t.edges.size()) ||
        cfg.topo_fingerprint != topology_fingerprint(t)) {
        throw std::runtime_error(
            "checkpoint: model was trained for a different topology (qubits=" +
            std::to_string(cfg.num_phys) + ", actions=" + std::to_string(cfg.num_actions) + ")");
    }
}

}  // namespace qroute
