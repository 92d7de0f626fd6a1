#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qroute/env.hpp"
#include "qroute/rng.hpp"
#include "qroute/topology.hpp"

namespace qroute {

template <typename Scalar>
using MatX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

// Transformer actor-critic over the routing state. The gate window is
// embedded via a physical-qubit embedding table, projected to the model
// width, tagged with sinusoidal positions, passed through post-norm
// attention blocks, mean-pooled, and read out by a SWAP policy head (one
// logit per topology edge) and a scalar value head.
//
// Everything is templated on the scalar: float matches the checkpoint
// payload bit for bit, double is used where finite-difference comparisons
// need the headroom.
struct AgentConfig {
    int num_phys = 0;
    int num_actions = 0;
    std::uint64_t topo_fingerprint = 0;
    int emb_dim = 20;
    int d_model = 24;
    int n_layers = 4;
    int n_heads = 6;
    int d_ff = 96;
    int lookahead = 48;

    [[nodiscard]] int feature_dim() const { return emb_dim + 1; }

    void validate() const {
        if (num_phys < 1 || num_actions < 1) {
            throw std::invalid_argument("agent config: empty device");
        }
        if (emb_dim < 1 || d_model < 1 || n_layers < 1 || d_ff < 1 || lookahead < 1) {
            throw std::invalid_argument("agent config: dimensions must be positive");
        }
        if (n_heads < 1 || d_model % n_heads != 0) {
            throw std::invalid_argument("agent config: n_heads must divide d_model");
        }
        if (d_model % 2 != 0) {
            throw std::invalid_argument("agent config: d_model must be even");
        }
    }

    friend bool operator==(const AgentConfig&, const AgentConfig&) = default;
};

inline AgentConfig agent_config_for(const Topology& t) {
    AgentConfig cfg;
    cfg.num_phys = t.num_qubits;
    cfg.num_actions = static_cast<int>(t.edges.size());
    cfg.topo_fingerprint = topology_fingerprint(t);
    return cfg;
}

template <typename Scalar>
struct AgentLayerParams {
    MatX<Scalar> wq, bq, wk, bk, wv, bv, wo, bo;
    MatX<Scalar> ln1_gain, ln1_bias;
    MatX<Scalar> w_ff1, b_ff1, w_ff2, b_ff2;
    MatX<Scalar> ln2_gain, ln2_bias;
};

template <typename Scalar>
struct AgentParams {
    MatX<Scalar> embedding;  // num_phys x emb_dim
    MatX<Scalar> w_in, b_in;
    std::vector<AgentLayerParams<Scalar>> layers;
    MatX<Scalar> w_policy, b_policy;
    MatX<Scalar> w_value, b_value;
};

template <typename Scalar>
struct AgentModel {
    AgentConfig cfg;
    AgentParams<Scalar> params;
};

template <typename Scalar>
struct TensorView {
    std::string name;
    MatX<Scalar>* mat;
};

// Canonical tensor enumeration; parameter init, Adam, checkpoints and the
// finite-difference harness all walk this order.
template <typename Scalar>
std::vector<TensorView<Scalar>> tensor_views(AgentParams<Scalar>& p) {
    std::vector<TensorView<Scalar>> v;
    v.push_back({"embedding", &p.embedding});
    v.push_back({"w_in", &p.w_in});
    v.push_back({"b_in", &p.b_in});
    for (std::size_t i = 0; i < p.layers.size(); ++i) {
        const std::string prefix = "layers." + std::to_string(i) + ".";
        AgentLayerParams<Scalar>& l = p.layers[i];
        v.push_back({prefix + "wq", &l.wq});
        v.push_back({prefix + "bq", &l.bq});
        v.push_back({prefix + "wk", &l.wk});
        v.push_back({prefix + "bk", &l.bk});
        v.push_back({prefix + "wv", &l.wv});
        v.push_back({prefix + "bv", &l.bv});
        v.push_back({prefix + "wo", &l.wo});
        v.push_back({prefix + "bo", &l.bo});
        v.push_back({prefix + "ln1_gain", &l.ln1_gain});
        v.push_back({prefix + "ln1_bias", &l.ln1_bias});
        v.push_back({prefix + "w_ff1", &l.w_ff1});
        v.push_back({prefix + "b_ff1", &l.b_ff1});
        v.push_back({prefix + "w_ff2", &l.w_ff2});
        v.push_back({prefix + "b_ff2", &l.b_ff2});
        v.push_back({prefix + "ln2_gain", &l.ln2_gain});
        v.push_back({prefix + "ln2_bias", &l.ln2_bias});
    }
    v.push_back({"w_policy", &p.w_policy});
    v.push_back({"b_policy", &p.b_policy});
    v.push_back({"w_value", &p.w_value});
    v.push_back({"b_value", &p.b_value});
    return v;
}

template <typename Scalar>
struct ConstTensorView {
    std::string name;
    const MatX<Scalar>* mat;
};

template <typename Scalar>
std::vector<ConstTensorView<Scalar>> tensor_views(const AgentParams<Scalar>& p) {
    std::vector<ConstTensorView<Scalar>> out;
    for (const auto& view : tensor_views(const_cast<AgentParams<Scalar>&>(p))) {
        out.push_back({view.name, view.mat});
    }
    return out;
}

template <typename Scalar>
AgentParams<Scalar> zeros_like(const AgentConfig& cfg) {
    AgentParams<Scalar> p;
    const int d = cfg.d_model;
    p.embedding = MatX<Scalar>::Zero(cfg.num_phys, cfg.emb_dim);
    p.w_in = MatX<Scalar>::Zero(cfg.feature_dim(), d);
    p.b_in = MatX<Scalar>::Zero(d, 1);
    p.layers.resize(static_cast<std::size_t>(cfg.n_layers));
    for (auto& l : p.layers) {
        l.wq = l.wk = l.wv = l.wo = MatX<Scalar>::Zero(d, d);
        l.bq = l.bk = l.bv = l.bo = MatX<Scalar>::Zero(d, 1);
        l.ln1_gain = l.ln1_bias = l.ln2_gain = l.ln2_bias = MatX<Scalar>::Zero(d, 1);
        l.w_ff1 = MatX<Scalar>::Zero(d, cfg.d_ff);
        l.b_ff1 = MatX<Scalar>::Zero(cfg.d_ff, 1);
        l.w_ff2 = MatX<Scalar>::Zero(cfg.d_ff, d);
        l.b_ff2 = MatX<Scalar>::Zero(d, 1);
    }
    p.w_policy = MatX<Scalar>::Zero(d, cfg.num_actions);
    p.b_policy = MatX<Scalar>::Zero(cfg.num_actions, 1);
    p.w_value = MatX<Scalar>::Zero(d, 1);
    p.b_value = MatX<Scalar>::Zero(1, 1);
    return p;
}

// Uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)) init, seeded; layer-norm gains
// start at one and biases at zero.
template <typename Scalar>
AgentModel<Scalar> init_model(const AgentConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    AgentModel<Scalar> model;
    model.cfg = cfg;
    model.params = zeros_like<Scalar>(cfg);
    Rng rng(seed);

    auto fill = [&rng](MatX<Scalar>& mat, int fan_in) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
        Scalar* data = mat.data();
        for (Eigen::Index i = 0; i < mat.size(); ++i) {
            data[i] = static_cast<Scalar>((2.0 * rng.uniform() - 1.0) * bound);
        }
    };

    AgentParams<Scalar>& p = model.params;
    fill(p.embedding, cfg.emb_dim);
    fill(p.w_in, cfg.feature_dim());
    fill(p.b_in, cfg.feature_dim());
    for (auto& l : p.layers) {
        fill(l.wq, cfg.d_model);
        fill(l.bq, cfg.d_model);
        fill(l.wk, cfg.d_model);
        fill(l.bk, cfg.d_model);
        fill(l.wv, cfg.d_model);
        fill(l.bv, cfg.d_model);
        fill(l.wo, cfg.d_model);
        fill(l.bo, cfg.d_model);
        l.ln1_gain.setOnes();
        l.ln1_bias.setZero();
        fill(l.w_ff1, cfg.d_model);
        fill(l.b_ff1, cfg.d_model);
        fill(l.w_ff2, cfg.d_ff);
        fill(l.b_ff2, cfg.d_ff);
        l.ln2_gain.setOnes();
        l.ln2_bias.setZero();
    }
    fill(p.w_policy, cfg.d_model);
    fill(p.b_policy, cfg.d_model);
    fill(p.w_value, cfg.d_model);
    fill(p.b_value, cfg.d_model);
    return model;
}

// Sinusoidal positions: column 2i carries sin(pos / 10000^(2i/d)), column
// 2i+1 the matching cosine.
template <typename Scalar>
MatX<Scalar> positional_encoding(int length, int d_model) {
    MatX<Scalar> pe(length, d_model);
    for (int pos = 0; pos < length; ++pos) {
        for (int i = 0; 2 * i < d_model; ++i) {
            const double angle =
                pos / std::pow(10000.0, (2.0 * i) / static_cast<double>(d_model));
            pe(pos, 2 * i) = static_cast<Scalar>(std::sin(angle));
            if (2 * i + 1 < d_model) pe(pos, 2 * i + 1) = static_cast<Scalar>(std::cos(angle));
        }
    }
    return pe;
}

// Fixed-height feature block for one state: row i describes the i-th
// remaining gate (program order) as the mean of its two mapped qubit
// embeddings plus a normalized depth column; rows past valid_len stay
// zero. phys_pairs remembers which embedding rows built each feature row
// so gradients can reach the table.
template <typename Scalar>
struct FeatureMatrix {
    MatX<Scalar> rows;
    int valid_len = 0;
    std::vector<std::array<int, 2>> phys_pairs;
};

// Depth of each remaining gate within the remaining sub-DAG: 1 + max depth
// over still-unscheduled predecessors.
inline std::vector<int> remaining_depths(const RoutingState& s) {
    std::vector<int> depth(s.ctx->circuit.gates.size(), 0);
    for (int g : s.remaining) {
        int d = 1;
        for (int p : s.ctx->dag.predecessors[static_cast<std::size_t>(g)]) {
            if (s.in_remaining[static_cast<std::size_t>(p)]) {
                d = std::max(d, depth[static_cast<std::size_t>(p)] + 1);
            }
        }
        depth[static_cast<std::size_t>(g)] = d;
    }
    return depth;
}

template <typename Scalar>
FeatureMatrix<Scalar> encode_state(const RoutingState& s, const AgentModel<Scalar>& model,
                                   int lookahead = -1) {
    if (lookahead < 0) lookahead = model.cfg.lookahead;
    const EnvContext& ctx = *s.ctx;
    if (model.cfg.num_phys != ctx.topology.num_qubits ||
        model.cfg.num_actions != static_cast<int>(ctx.topology.edges.size())) {
        throw std::runtime_error("agent: model was built for a different topology");
    }

    FeatureMatrix<Scalar> f;
    f.rows = MatX<Scalar>::Zero(lookahead, model.cfg.feature_dim());
    f.valid_len = std::min<int>(lookahead, static_cast<int>(s.remaining.size()));
    f.phys_pairs.reserve(static_cast<std::size_t>(f.valid_len));

    const std::vector<int> depth = remaining_depths(s);
    for (int i = 0; i < f.valid_len; ++i) {
        const int g = s.remaining[static_cast<std::size_t>(i)];
        const Gate& gate = ctx.circuit.gates[static_cast<std::size_t>(g)];
        const int a = s.mapping.log_to_phys[static_cast<std::size_t>(gate.q1)];
        const int b = s.mapping.log_to_phys[static_cast<std::size_t>(gate.q2)];
        f.rows.row(i).head(model.cfg.emb_dim) =
            Scalar(0.5) * (model.params.embedding.row(a) + model.params.embedding.row(b));
        f.rows(i, model.cfg.emb_dim) = static_cast<Scalar>(depth[static_cast<std::size_t>(g)]) /
                                       static_cast<Scalar>(lookahead);
        f.phys_pairs.push_back({a, b});
    }
    return f;
}

template <typename Scalar>
struct AgentOutput {
    MatX<Scalar> policy;  // num_actions x 1, sums to one
    Scalar value = Scalar(0);
};

namespace detail {

inline constexpr double kLnEps = 1e-5;
inline constexpr double kPolicyClamp = 1e-12;

template <typename Scalar>
Scalar gelu(Scalar x) {
    return Scalar(0.5) * x * (Scalar(1) + std::erf(x / std::sqrt(Scalar(2))));
}

template <typename Scalar>
Scalar gelu_grad(Scalar x) {
    const Scalar cdf = Scalar(0.5) * (Scalar(1) + std::erf(x / std::sqrt(Scalar(2))));
    const Scalar pdf = std::exp(Scalar(-0.5) * x * x) /
                       std::sqrt(Scalar(2) * std::numbers::pi_v<Scalar>);
    return cdf + x * pdf;
}

template <typename Scalar>
void softmax_rows(MatX<Scalar>& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        const Scalar mx = m.row(r).maxCoeff();
        m.row(r) = (m.row(r).array() - mx).exp();
        m.row(r) /= m.row(r).sum();
    }
}

// Row-wise layer norm; returns y and stores the normalized rows and the
// per-row 1/std needed by the backward pass.
template <typename Scalar>
MatX<Scalar> layer_norm(const MatX<Scalar>& x, const MatX<Scalar>& gain, const MatX<Scalar>& bias,
                        MatX<Scalar>& xhat, MatX<Scalar>& inv_std) {
    const Eigen::Index rows = x.rows();
    const Eigen::Index d = x.cols();
    xhat.resize(rows, d);
    inv_std.resize(rows, 1);
    MatX<Scalar> y(rows, d);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const Scalar mu = x.row(r).mean();
        const Scalar var = (x.row(r).array() - mu).square().mean();
        const Scalar is = Scalar(1) / std::sqrt(var + static_cast<Scalar>(kLnEps));
        inv_std(r, 0) = is;
        xhat.row(r) = (x.row(r).array() - mu) * is;
        y.row(r) = xhat.row(r).cwiseProduct(gain.col(0).transpose()) + bias.col(0).transpose();
    }
    return y;
}

template <typename Scalar>
MatX<Scalar> layer_norm_backward(const MatX<Scalar>& dy, const MatX<Scalar>& xhat,
                                 const MatX<Scalar>& inv_std, const MatX<Scalar>& gain,
                                 MatX<Scalar>& dgain, MatX<Scalar>& dbias) {
    const Eigen::Index rows = dy.rows();
    const Eigen::Index d = dy.cols();
    MatX<Scalar> dx(rows, d);
    for (Eigen::Index r = 0; r < rows; ++r) {
        dgain.col(0).transpose() += dy.row(r).cwiseProduct(xhat.row(r));
        dbias.col(0).transpose() += dy.row(r);
        const auto dxhat = dy.row(r).cwiseProduct(gain.col(0).transpose());
        const Scalar m1 = dxhat.mean();
        const Scalar m2 = dxhat.cwiseProduct(xhat.row(r)).mean();
        dx.row(r) = (dxhat.array() - m1 - xhat.row(r).array() * m2) * inv_std(r, 0);
    }
    return dx;
}

template <typename Scalar>
struct LayerTrace {
    MatX<Scalar> x_in;
    MatX<Scalar> q, k, v;
    std::vector<MatX<Scalar>> attn;
    MatX<Scalar> concat;
    MatX<Scalar> xhat1, inv_std1, x_mid;
    MatX<Scalar> u, gelu_u;
    MatX<Scalar> xhat2, inv_std2, x_out;
};

template <typename Scalar>
struct ForwardTrace {
    MatX<Scalar> features;  // valid slice, L x feature_dim
    MatX<Scalar> x1;
    std::vector<LayerTrace<Scalar>> layers;
    MatX<Scalar> pooled;  // d x 1
    MatX<Scalar> policy;
    Scalar value = Scalar(0);
};

template <typename Scalar>
AgentOutput<Scalar> forward_impl(const AgentModel<Scalar>& model, const FeatureMatrix<Scalar>& f,
                                 ForwardTrace<Scalar>* trace) {
    const AgentConfig& cfg = model.cfg;
    const AgentParams<Scalar>& p = model.params;
    if (f.rows.cols() != cfg.feature_dim()) {
        throw std::invalid_argument("agent: feature width does not match the model");
    }
    const int L = f.valid_len;
    const int d = cfg.d_model;
    const int heads = cfg.n_heads;
    const int dh = d / heads;
    const Scalar scale = Scalar(1) / std::sqrt(static_cast<Scalar>(dh));

    MatX<Scalar> pooled = MatX<Scalar>::Zero(d, 1);
    if (trace) trace->layers.clear();

    if (L > 0) {
        const MatX<Scalar> features = f.rows.topRows(L);
        MatX<Scalar> x = features * p.w_in;
        x.rowwise() += p.b_in.col(0).transpose();
        x += positional_encoding<Scalar>(L, d);
        if (trace) {
            trace->features = features;
            trace->x1 = x;
        }

        for (const AgentLayerParams<Scalar>& layer : p.layers) {
            LayerTrace<Scalar> lt;
            lt.x_in = x;

            lt.q = x * layer.wq;
            lt.q.rowwise() += layer.bq.col(0).transpose();
            lt.k = x * layer.wk;
            lt.k.rowwise() += layer.bk.col(0).transpose();
            lt.v = x * layer.wv;
            lt.v.rowwise() += layer.bv.col(0).transpose();

            lt.concat.resize(L, d);
            lt.attn.reserve(static_cast<std::size_t>(heads));
            for (int h = 0; h < heads; ++h) {
                const auto qh = lt.q.middleCols(h * dh, dh);
                const auto kh = lt.k.middleCols(h * dh, dh);
                const auto vh = lt.v.middleCols(h * dh, dh);
                MatX<Scalar> scores = qh * kh.transpose() * scale;
                softmax_rows(scores);
                lt.concat.middleCols(h * dh, dh) = scores * vh;
                lt.attn.push_back(std::move(scores));
            }
            MatX<Scalar> mha = lt.concat * layer.wo;
            mha.rowwise() += layer.bo.col(0).transpose();

            const MatX<Scalar> r1 = x + mha;
            lt.x_mid = layer_norm(r1, layer.ln1_gain, layer.ln1_bias, lt.xhat1, lt.inv_std1);

            lt.u = lt.x_mid * layer.w_ff1;
            lt.u.rowwise() += layer.b_ff1.col(0).transpose();
            lt.gelu_u = lt.u.unaryExpr([](Scalar v) { return gelu(v); });
            MatX<Scalar> ffn = lt.gelu_u * layer.w_ff2;
            ffn.rowwise() += layer.b_ff2.col(0).transpose();

            const MatX<Scalar> r2 = lt.x_mid + ffn;
            lt.x_out = layer_norm(r2, layer.ln2_gain, layer.ln2_bias, lt.xhat2, lt.inv_std2);

            x = lt.x_out;
            if (trace) trace->layers.push_back(std::move(lt));
        }
        pooled = x.colwise().mean().transpose();
    }

    AgentOutput<Scalar> out;
    out.policy = p.w_policy.transpose() * pooled + p.b_policy;
    {
        const Scalar mx = out.policy.maxCoeff();
        out.policy = (out.policy.array() - mx).exp();
        out.policy /= out.policy.sum();
    }
    out.value = (pooled.transpose() * p.w_value)(0, 0) + p.b_value(0, 0);
    if (trace) {
        trace->pooled = pooled;
        trace->policy = out.policy;
        trace->value = out.value;
    }
    return out;
}

}  // namespace detail

template <typename Scalar>
AgentOutput<Scalar> forward(const AgentModel<Scalar>& model, const FeatureMatrix<Scalar>& f) {
    return detail::forward_impl<Scalar>(model, f, nullptr);
}

// Per-sample loss: cross-entropy of the searched action plus alpha times
// the squared value error, normalized by the action count.
template <typename Scalar>
Scalar loss(const MatX<Scalar>& policy, Scalar value, int a_star, Scalar mcts_value,
            Scalar alpha) {
    const int actions = static_cast<int>(policy.rows());
    if (a_star < 0 || a_star >= actions) throw std::invalid_argument("loss: action out of range");
    const Scalar p = std::max(policy(a_star, 0), static_cast<Scalar>(detail::kPolicyClamp));
    const Scalar l1 = -std::log(p);
    const Scalar diff = mcts_value - value;
    return (l1 + alpha * diff * diff) / static_cast<Scalar>(actions);
}

template <typename Scalar>
struct TrainingExample {
    FeatureMatrix<Scalar> features;
    int action = 0;
    Scalar mcts_value = Scalar(0);
};

template <typename Scalar>
struct BatchGradients {
    Scalar loss = Scalar(0);
    AgentParams<Scalar> grads;
};

// Exact gradients of the mean batch loss with respect to every parameter,
// embedding table included.
template <typename Scalar>
BatchGradients<Scalar> gradients(const AgentModel<Scalar>& model,
                                 const std::vector<TrainingExample<Scalar>>& batch, Scalar alpha) {
    if (batch.empty()) throw std::invalid_argument("gradients: empty batch");
    const AgentConfig& cfg = model.cfg;
    const AgentParams<Scalar>& p = model.params;
    const int d = cfg.d_model;
    const int heads = cfg.n_heads;
    const int dh = d / heads;
    const Scalar scale = Scalar(1) / std::sqrt(static_cast<Scalar>(dh));
    const Scalar actions = static_cast<Scalar>(cfg.num_actions);

    BatchGradients<Scalar> out;
    out.grads = zeros_like<Scalar>(cfg);
    AgentParams<Scalar>& g = out.grads;

    for (const TrainingExample<Scalar>& ex : batch) {
        detail::ForwardTrace<Scalar> tr;
        detail::forward_impl(model, ex.features, &tr);
        out.loss += loss(tr.policy, tr.value, ex.action, ex.mcts_value, alpha);

        // Heads.
        MatX<Scalar> dlogits = tr.policy / actions;
        const Scalar p_star = tr.policy(ex.action, 0);
        if (p_star > static_cast<Scalar>(detail::kPolicyClamp)) {
            dlogits(ex.action, 0) -= Scalar(1) / actions;
        } else {
            dlogits.setZero();  // clamped cross-entropy is locally constant
        }
        const Scalar dvalue = alpha * Scalar(2) * (tr.value - ex.mcts_value) / actions;

        g.w_policy += tr.pooled * dlogits.transpose();
        g.b_policy += dlogits;
        g.w_value += tr.pooled * dvalue;
        g.b_value(0, 0) += dvalue;

        const int L = ex.features.valid_len;
        if (L == 0) continue;  // no rows: heads see a zero pooled vector

        MatX<Scalar> dpooled = p.w_policy * dlogits + p.w_value * dvalue;
        MatX<Scalar> dx =
            (dpooled.col(0).transpose() / static_cast<Scalar>(L)).replicate(L, 1);

        for (int li = cfg.n_layers - 1; li >= 0; --li) {
            const AgentLayerParams<Scalar>& layer = p.layers[static_cast<std::size_t>(li)];
            AgentLayerParams<Scalar>& gl = g.layers[static_cast<std::size_t>(li)];
            const detail::LayerTrace<Scalar>& lt = tr.layers[static_cast<std::size_t>(li)];

            // Add & norm after the feed-forward block.
            MatX<Scalar> dr2 = detail::layer_norm_backward(dx, lt.xhat2, lt.inv_std2,
                                                           layer.ln2_gain, gl.ln2_gain,
                                                           gl.ln2_bias);
            MatX<Scalar> dx_mid = dr2;
            {
                const MatX<Scalar>& dffn = dr2;
                gl.w_ff2 += lt.gelu_u.transpose() * dffn;
                gl.b_ff2.col(0).transpose() += dffn.colwise().sum();
                MatX<Scalar> dgelu = dffn * layer.w_ff2.transpose();
                MatX<Scalar> du =
                    dgelu.cwiseProduct(lt.u.unaryExpr([](Scalar v) {
                        return detail::gelu_grad(v);
                    }));
                gl.w_ff1 += lt.x_mid.transpose() * du;
                gl.b_ff1.col(0).transpose() += du.colwise().sum();
                dx_mid += du * layer.w_ff1.transpose();
            }

            // Add & norm after attention.
            MatX<Scalar> dr1 = detail::layer_norm_backward(dx_mid, lt.xhat1, lt.inv_std1,
                                                           layer.ln1_gain, gl.ln1_gain,
                                                           gl.ln1_bias);
            MatX<Scalar> dx_in = dr1;
            {
                const MatX<Scalar>& dmha = dr1;
                gl.wo += lt.concat.transpose() * dmha;
                gl.bo.col(0).transpose() += dmha.colwise().sum();
                const MatX<Scalar> dconcat = dmha * layer.wo.transpose();

                MatX<Scalar> dq = MatX<Scalar>::Zero(L, d);
                MatX<Scalar> dk = MatX<Scalar>::Zero(L, d);
                MatX<Scalar> dv = MatX<Scalar>::Zero(L, d);
                for (int h = 0; h < heads; ++h) {
                    const auto qh = lt.q.middleCols(h * dh, dh);
                    const auto kh = lt.k.middleCols(h * dh, dh);
                    const auto vh = lt.v.middleCols(h * dh, dh);
                    const MatX<Scalar>& ah = lt.attn[static_cast<std::size_t>(h)];
                    const auto doh = dconcat.middleCols(h * dh, dh);

                    MatX<Scalar> da = doh * vh.transpose();
                    dv.middleCols(h * dh, dh) = ah.transpose() * doh;

                    MatX<Scalar> ds(L, L);
                    for (int r = 0; r < L; ++r) {
                        const Scalar dot = da.row(r).cwiseProduct(ah.row(r)).sum();
                        ds.row(r) = (da.row(r).array() - dot) * ah.row(r).array();
                    }
                    dq.middleCols(h * dh, dh) = ds * kh * scale;
                    dk.middleCols(h * dh, dh) = ds.transpose() * qh * scale;
                }

                gl.wq += lt.x_in.transpose() * dq;
                gl.bq.col(0).transpose() += dq.colwise().sum();
                gl.wk += lt.x_in.transpose() * dk;
                gl.bk.col(0).transpose() += dk.colwise().sum();
                gl.wv += lt.x_in.transpose() * dv;
                gl.bv.col(0).transpose() += dv.colwise().sum();
                dx_in += dq * layer.wq.transpose() + dk * layer.wk.transpose() +
                         dv * layer.wv.transpose();
            }
            dx = std::move(dx_in);
        }

        // Projection and embedding table. The positional encoding is
        // additive and constant, so dx passes through it unchanged.
        g.w_in += tr.features.transpose() * dx;
        g.b_in.col(0).transpose() += dx.colwise().sum();
        const MatX<Scalar> df = dx * p.w_in.transpose();
        for (int i = 0; i < L; ++i) {
            const auto [a, b] = ex.features.phys_pairs[static_cast<std::size_t>(i)];
            g.embedding.row(a) += Scalar(0.5) * df.row(i).head(cfg.emb_dim);
            g.embedding.row(b) += Scalar(0.5) * df.row(i).head(cfg.emb_dim);
        }
    }

    const Scalar inv_b = Scalar(1) / static_cast<Scalar>(batch.size());
    out.loss *= inv_b;
    for (auto& view : tensor_views(g)) *view.mat *= inv_b;
    return out;
}

template <typename Scalar>
struct OptimizerState {
    AgentParams<Scalar> m, v;
    long step = 0;
    double lr = 0.1;
    double lr_decay = 0.8;
};

template <typename Scalar>
OptimizerState<Scalar> make_optimizer(const AgentModel<Scalar>& model, double lr = 0.1,
                                      double lr_decay = 0.8) {
    OptimizerState<Scalar> opt;
    opt.m = zeros_like<Scalar>(model.cfg);
    opt.v = zeros_like<Scalar>(model.cfg);
    opt.lr = lr;
    opt.lr_decay = lr_decay;
    return opt;
}

inline constexpr double kAdamBeta1 = 0.9;
inline constexpr double kAdamBeta2 = 0.999;
inline constexpr double kAdamEps = 1e-8;

template <typename Scalar>
void adam_step(AgentModel<Scalar>& model, const AgentParams<Scalar>& grads,
               OptimizerState<Scalar>& opt) {
    auto params = tensor_views(model.params);
    auto gview = tensor_views(grads);
    auto mview = tensor_views(opt.m);
    auto vview = tensor_views(opt.v);
    if (gview.size() != params.size() || mview.size() != params.size() ||
        vview.size() != params.size()) {
        throw std::invalid_argument("adam: parameter set shape mismatch");
    }
    opt.step += 1;
    const Scalar b1 = static_cast<Scalar>(kAdamBeta1);
    const Scalar b2 = static_cast<Scalar>(kAdamBeta2);
    const Scalar bc1 = Scalar(1) - static_cast<Scalar>(std::pow(kAdamBeta1, opt.step));
    const Scalar bc2 = Scalar(1) - static_cast<Scalar>(std::pow(kAdamBeta2, opt.step));
    const Scalar lr = static_cast<Scalar>(opt.lr);
    const Scalar eps = static_cast<Scalar>(kAdamEps);

    for (std::size_t i = 0; i < params.size(); ++i) {
        MatX<Scalar>& theta = *params[i].mat;
        const MatX<Scalar>& grad = *gview[i].mat;
        MatX<Scalar>& m = *mview[i].mat;
        MatX<Scalar>& v = *vview[i].mat;
        if (theta.rows() != grad.rows() || theta.cols() != grad.cols()) {
            throw std::invalid_argument("adam: gradient shape mismatch at " + params[i].name);
        }
        m = b1 * m + (Scalar(1) - b1) * grad;
        v = b2 * v + (Scalar(1) - b2) * grad.cwiseProduct(grad);
        theta.array() -= lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + eps);
    }
}

template <typename Scalar>
bool all_finite(const AgentParams<Scalar>& p) {
    for (const auto& view : tensor_views(p)) {
        if (!view.mat->allFinite()) return false;
    }
    return true;
}

// Leaf evaluator for tree search.
template <typename Scalar>
auto agent_value_fn(const AgentModel<Scalar>& model) {
    return [&model](const RoutingState& s) {
        return static_cast<double>(forward(model, encode_state(s, model)).value);
    };
}

// Deterministic inference: highest-probability SWAP, first index on ties.
template <typename Scalar>
Policy greedy_agent_policy(const AgentModel<Scalar>& model) {
    return [&model](const RoutingState& s) {
        const AgentOutput<Scalar> out = forward(model, encode_state(s, model));
        Eigen::Index best = 0;
        out.policy.col(0).maxCoeff(&best);
        return s.ctx->topology.edges[static_cast<std::size_t>(best)];
    };
}

}  // namespace qroute
