#include "toolgap/mlp.hpp"

#include <cmath>
#include <stdexcept>

#include "toolgap/kernels.hpp"
#include "toolgap/rng.hpp"

namespace toolgap {

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

constexpr double kEps = 1e-12;  // probability clamp inside the log loss
constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;

}  // namespace

Mlp::Mlp(int input_dim, const std::vector<int>& hidden_dims, std::uint64_t seed)
    : input_dim_(input_dim) {
    Rng rng(seed);
    int in = input_dim;
    std::vector<int> dims = hidden_dims;
    dims.push_back(1);
    for (int out : dims) {
        Layer layer;
        layer.in = in;
        layer.out = out;
        layer.w.resize(static_cast<std::size_t>(in) * out);
        layer.b.assign(static_cast<std::size_t>(out), 0.0);
        // He initialization for the ReLU stack.
        const double scale = std::sqrt(2.0 / in);
        for (double& w : layer.w) w = rng.normal() * scale;
        layers_.push_back(std::move(layer));
        in = out;
    }
}

Mlp Mlp::zeros(int input_dim, const std::vector<int>& hidden_dims) {
    Mlp mlp(input_dim, hidden_dims, 0);
    for (Layer& layer : mlp.layers_) {
        std::fill(layer.w.begin(), layer.w.end(), 0.0);
        std::fill(layer.b.begin(), layer.b.end(), 0.0);
    }
    return mlp;
}

namespace {

struct ForwardCache {
    // activations[0] is the input; activations[i] the output of layer i-1
    // (ReLU applied on hidden layers, raw logits for the last).
    std::vector<std::vector<double>> activations;
};

ForwardCache forward_pass(const std::vector<Mlp::Layer>& layers, const std::vector<double>& x,
                          int rows) {
    ForwardCache cache;
    cache.activations.push_back(x);
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const Mlp::Layer& layer = layers[l];
        std::vector<double> z(static_cast<std::size_t>(rows) * layer.out);
        matmul(cache.activations.back().data(), layer.w.data(), z.data(), rows, layer.in,
               layer.out);
        const bool last = l + 1 == layers.size();
        if (last) {
            for (int i = 0; i < rows; ++i)
                for (int j = 0; j < layer.out; ++j) z[static_cast<std::size_t>(i) * layer.out + j] += layer.b[static_cast<std::size_t>(j)];
        } else {
            std::vector<double> a(z.size());
            add_bias_relu(z.data(), layer.b.data(), a.data(), rows, layer.out);
            z = std::move(a);
        }
        cache.activations.push_back(std::move(z));
    }
    return cache;
}

}  // namespace

std::vector<double> Mlp::predict(const std::vector<double>& x, int rows) const {
    if (x.size() != static_cast<std::size_t>(rows) * input_dim_)
        throw std::runtime_error("mlp: input size mismatch");
    const ForwardCache cache = forward_pass(layers_, x, rows);
    std::vector<double> probs(static_cast<std::size_t>(rows));
    const std::vector<double>& logits = cache.activations.back();
    for (int i = 0; i < rows; ++i) probs[static_cast<std::size_t>(i)] = sigmoid(logits[static_cast<std::size_t>(i)]);
    return probs;
}

double Mlp::predict_one(const std::vector<double>& x) const {
    return predict(x, 1)[0];
}

Mlp::LossGrads Mlp::evaluate(const std::vector<double>& x, int rows,
                             const std::vector<double>& y,
                             const std::vector<double>& sample_weights, double l2) const {
    if (rows <= 0) throw std::runtime_error("mlp: empty batch");
    const ForwardCache cache = forward_pass(layers_, x, rows);
    const std::vector<double>& logits = cache.activations.back();

    double weight_sum = 0.0;
    for (int i = 0; i < rows; ++i) weight_sum += sample_weights[static_cast<std::size_t>(i)];
    if (weight_sum <= 0.0) throw std::runtime_error("mlp: nonpositive weight sum");

    LossGrads out;
    std::vector<double> dz(static_cast<std::size_t>(rows));
    for (int i = 0; i < rows; ++i) {
        const std::size_t idx = static_cast<std::size_t>(i);
        const double p = sigmoid(logits[idx]);
        const double pc = std::min(std::max(p, kEps), 1.0 - kEps);
        out.loss -= sample_weights[idx] *
                    (y[idx] * std::log(pc) + (1.0 - y[idx]) * std::log(1.0 - pc));
        dz[idx] = sample_weights[idx] * (p - y[idx]) / weight_sum;
    }
    out.loss /= weight_sum;

    // L2 penalty on weights only.
    double l2_term = 0.0;
    for (const Layer& layer : layers_)
        for (double w : layer.w) l2_term += w * w;
    out.loss += 0.5 * l2 * l2_term;

    out.grads.resize(layers_.size());
    std::vector<double> grad_out = dz;  // rows x out of the current layer
    for (int l = static_cast<int>(layers_.size()) - 1; l >= 0; --l) {
        const Layer& layer = layers_[static_cast<std::size_t>(l)];
        Layer& grad = out.grads[static_cast<std::size_t>(l)];
        grad.in = layer.in;
        grad.out = layer.out;
        grad.w.resize(layer.w.size());
        grad.b.resize(layer.b.size());

        const std::vector<double>& input = cache.activations[static_cast<std::size_t>(l)];
        matmul_at_b(input.data(), grad_out.data(), grad.w.data(), layer.in, rows, layer.out);
        column_sums(grad_out.data(), grad.b.data(), rows, layer.out);
        for (std::size_t i = 0; i < grad.w.size(); ++i) grad.w[i] += l2 * layer.w[i];

        if (l > 0) {
            std::vector<double> grad_in(static_cast<std::size_t>(rows) * layer.in);
            matmul_a_bt(grad_out.data(), layer.w.data(), grad_in.data(), rows, layer.out,
                        layer.in);
            std::vector<double> masked(grad_in.size());
            relu_backward(grad_in.data(), cache.activations[static_cast<std::size_t>(l)].data(),
                          masked.data(), rows, layer.in);
            grad_out = std::move(masked);
        }
    }
    return out;
}

double Mlp::loss_only(const std::vector<double>& x, int rows, const std::vector<double>& y,
                      const std::vector<double>& sample_weights, double l2) const {
    const ForwardCache cache = forward_pass(layers_, x, rows);
    const std::vector<double>& logits = cache.activations.back();
    double weight_sum = 0.0;
    for (int i = 0; i < rows; ++i) weight_sum += sample_weights[static_cast<std::size_t>(i)];
    double loss = 0.0;
    for (int i = 0; i < rows; ++i) {
        const std::size_t idx = static_cast<std::size_t>(i);
        const double p = sigmoid(logits[idx]);
        const double pc = std::min(std::max(p, kEps), 1.0 - kEps);
        loss -= sample_weights[idx] *
                (y[idx] * std::log(pc) + (1.0 - y[idx]) * std::log(1.0 - pc));
    }
    loss /= weight_sum;
    double l2_term = 0.0;
    for (const Layer& layer : layers_)
        for (double w : layer.w) l2_term += w * w;
    return loss + 0.5 * l2 * l2_term;
}

Mlp::AdamState Mlp::make_adam_state() const {
    AdamState state;
    state.m.resize(layers_.size());
    state.v.resize(layers_.size());
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        for (auto* s : {&state.m[l], &state.v[l]}) {
            s->in = layers_[l].in;
            s->out = layers_[l].out;
            s->w.assign(layers_[l].w.size(), 0.0);
            s->b.assign(layers_[l].b.size(), 0.0);
        }
    }
    return state;
}

void Mlp::adam_step(const LossGrads& grads, AdamState& state, double learning_rate) {
    state.t += 1;
    const double bc1 = 1.0 - std::pow(kAdamBeta1, state.t);
    const double bc2 = 1.0 - std::pow(kAdamBeta2, state.t);
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        auto update = [&](std::vector<double>& param, const std::vector<double>& g,
                          std::vector<double>& m, std::vector<double>& v) {
            for (std::size_t i = 0; i < param.size(); ++i) {
                m[i] = kAdamBeta1 * m[i] + (1.0 - kAdamBeta1) * g[i];
                v[i] = kAdamBeta2 * v[i] + (1.0 - kAdamBeta2) * g[i] * g[i];
                const double mhat = m[i] / bc1;
                const double vhat = v[i] / bc2;
                param[i] -= learning_rate * mhat / (std::sqrt(vhat) + kAdamEps);
            }
        };
        update(layers_[l].w, grads.grads[l].w, state.m[l].w, state.v[l].w);
        update(layers_[l].b, grads.grads[l].b, state.m[l].b, state.v[l].b);
    }
}

MlpTrainReport train_mlp(Mlp& mlp, const std::vector<double>& x_train, int train_rows,
                         const std::vector<double>& y_train,
                         const std::vector<double>& w_train, const std::vector<double>& x_val,
                         int val_rows, const std::vector<double>& y_val,
                         const std::vector<double>& w_val, const MlpTrainConfig& config) {
    MlpTrainReport report;
    const bool has_val = val_rows > 0;
    double best_val = 0.0;
    std::vector<Mlp::Layer> best_layers;
    int stale = 0;

    Mlp::AdamState adam = mlp.make_adam_state();
    for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
        const Mlp::LossGrads grads =
            mlp.evaluate(x_train, train_rows, y_train, w_train, config.l2);
        mlp.adam_step(grads, adam, config.learning_rate);
        report.epochs_run = epoch + 1;
        report.final_train_loss = grads.loss;

        if (!has_val) continue;
        const double val_loss = mlp.loss_only(x_val, val_rows, y_val, w_val, config.l2);
        if (best_layers.empty() || val_loss < best_val - 1e-12) {
            best_val = val_loss;
            best_layers = mlp.layers();
            stale = 0;
        } else if (++stale >= config.patience) {
            break;
        }
    }
    if (has_val && !best_layers.empty()) {
        mlp.layers() = best_layers;
        report.best_val_loss = best_val;
    }
    return report;
}

}  // namespace toolgap
