#pragma once

#include <cstdint>
#include <vector>

namespace toolgap {

// Small feedforward binary classifier: ReLU hidden layers, sigmoid output,
// trained full-batch with Adam and weighted cross-entropy. Built on the
// OpenMP kernels; results are bit-identical for any thread count.
class Mlp {
public:
    struct Layer {
        int in = 0;
        int out = 0;
        std::vector<double> w;  // row-major, in x out
        std::vector<double> b;  // out
    };

    Mlp(int input_dim, const std::vector<int>& hidden_dims, std::uint64_t seed);
    // Zero-initialized network of the given shape (deserialization target).
    static Mlp zeros(int input_dim, const std::vector<int>& hidden_dims);

    int input_dim() const { return input_dim_; }
    std::vector<Layer>& layers() { return layers_; }
    const std::vector<Layer>& layers() const { return layers_; }

    // Sigmoid probabilities for a row-major batch x of shape rows x input_dim.
    std::vector<double> predict(const std::vector<double>& x, int rows) const;
    double predict_one(const std::vector<double>& x) const;

    struct LossGrads {
        double loss = 0.0;
        std::vector<Layer> grads;  // same shapes as the layers
    };

    // Weighted binary cross-entropy (weights normalized internally) plus an
    // L2 penalty on the weight matrices (biases excluded).
    LossGrads evaluate(const std::vector<double>& x, int rows, const std::vector<double>& y,
                       const std::vector<double>& sample_weights, double l2) const;

    double loss_only(const std::vector<double>& x, int rows, const std::vector<double>& y,
                     const std::vector<double>& sample_weights, double l2) const;

    // One Adam update from precomputed gradients.
    struct AdamState {
        std::vector<Layer> m;
        std::vector<Layer> v;
        int t = 0;
    };
    AdamState make_adam_state() const;
    void adam_step(const LossGrads& grads, AdamState& state, double learning_rate);

private:
    int input_dim_ = 0;
    std::vector<Layer> layers_;
};

struct MlpTrainConfig {
    double learning_rate = 1e-3;
    double l2 = 1e-4;
    int max_epochs = 500;
    int patience = 20;  // early-stopping epochs without validation improvement
};

struct MlpTrainReport {
    int epochs_run = 0;
    double best_val_loss = 0.0;
    double final_train_loss = 0.0;
};

// Full-batch training with early stopping on the validation split. When the
// validation set is empty, runs max_epochs without early stopping.
MlpTrainReport train_mlp(Mlp& mlp, const std::vector<double>& x_train, int train_rows,
                         const std::vector<double>& y_train,
                         const std::vector<double>& w_train, const std::vector<double>& x_val,
                         int val_rows, const std::vector<double>& y_val,
                         const std::vector<double>& w_val, const MlpTrainConfig& config);

}  // namespace toolgap
