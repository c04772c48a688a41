#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "toolgap/harness.hpp"
#include "toolgap/mlp.hpp"

namespace toolgap {

inline constexpr int kNumericFeatures = 24;
inline constexpr int kReasoningBins = 64;
inline constexpr int kToolOutputBins = 32;
inline constexpr int kFeatureDim = kNumericFeatures + kReasoningBins + kToolOutputBins;

// Hashing trick: MD5 of each case-folded token, low 64 bits mod bins, then
// L2 normalization. Empty text maps to the zero vector.
std::vector<double> hash_text(const std::string& text, int bins);

// State captured at a termination attempt of the FC loop (the assistant
// produced text with no tool calls).
struct GateState {
    const Trajectory* so_far = nullptr;
    int max_turns = 8;
    Prediction candidate;
    std::optional<Prediction> previous;
};

// 120-dimensional inference-safe feature vector. Gold fields are never read.
std::vector<double> extract_features(const GateState& state, const Sample& sample);

struct GateLabel {
    bool continue_decision = false;
    int weight = 1;    // 1..3 confidence weight
    int priority = 4;  // Table-style rule priority 1..4
};

// Priority rules: tool correct -> commit; tool wrong but CoT right ->
// continue; tool wrong with <2 calls -> continue; otherwise commit.
GateLabel label_sample(bool tool_correct, bool cot_correct, int tool_calls);

struct Standardizer {
    std::vector<double> mean;
    std::vector<double> stddev;        // 1.0 where the feature is constant
    std::vector<std::uint8_t> constant;  // constant features standardize to 0

    std::vector<double> apply(const std::vector<double>& x) const;
};

Standardizer fit_standardizer(const std::vector<std::vector<double>>& rows);

struct GateModel {
    Standardizer standardizer;
    Mlp mlp = Mlp::zeros(kFeatureDim, {128, 64});
    double tau = 0.05;
    nlohmann::ordered_json metadata;

    void save(const std::filesystem::path& path) const;
    static GateModel load(const std::filesystem::path& path);
};

double predict_continue(const GateModel& model, const std::vector<double>& features);

struct FoldMetrics {
    int fold = 0;
    int train_rows = 0;
    int test_rows = 0;
    double accuracy = 0.0;
    std::optional<double> auc;  // absent for single-class test folds
};

struct CVReport {
    std::vector<FoldMetrics> folds;
};

struct GateTrainConfig {
    std::vector<int> hidden_dims = {128, 64};
    MlpTrainConfig mlp;
    int folds = 5;
    double val_fraction = 0.10;  // group-level early-stopping split
    std::uint64_t seed = 0;
    double tau = 0.05;
    double p3_boost = 1.0;  // extra multiplier on priority-3 rows
};

// Standardizes features, runs group-partitioned cross-validation (diagnostic
// only), then trains the deployed model on all rows with an internal
// group-level validation split for early stopping. Deterministic under seed.
GateModel train_gate(const std::vector<std::vector<double>>& features,
                     const std::vector<GateLabel>& labels,
                     const std::vector<std::string>& groups, const GateTrainConfig& config,
                     CVReport* cv_report = nullptr);

// Fold assignment by group; no group appears on both sides of any fold.
std::vector<int> group_kfold_assignment(const std::vector<std::string>& groups, int folds,
                                        std::uint64_t seed);

struct GateRunConfig {
    double tau = 0.05;
    int max_extra_turns = 3;
    bool critic = false;
};

// AgentFull loop with the gate consulted at every termination attempt.
// Safety: no-progress and duplicate-expression guards, and at most
// max_extra_turns continuations (total turns <= max_turns + max_extra_turns).
Trajectory gated_inference(const Sample& s, const Sample* base_sibling, Backend& backend,
                           const GateModel& model, const RunConfig& run_config,
                           const GateRunConfig& gate_config);

}  // namespace toolgap
