#include "toolgap/gate.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <stdexcept>

#include "toolgap/md5.hpp"
#include "toolgap/prompts.hpp"
#include "toolgap/rng.hpp"
#include "toolgap/text.hpp"
#include "toolgap/toolbox.hpp"

namespace toolgap {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::vector<double> hash_text(const std::string& text, int bins) {
    if (bins < 1) throw std::runtime_error("hash_text: bins must be >= 1");
    std::vector<double> v(static_cast<std::size_t>(bins), 0.0);
    const auto tokens = tokenize(text);
    if (tokens.empty()) return v;
    for (const auto& tok : tokens) {
        v[static_cast<std::size_t>(md5_low64(tok) % static_cast<std::uint64_t>(bins))] += 1.0;
    }
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    for (double& x : v) x /= norm;
    return v;
}

namespace {

std::string calculator_expression(const ToolCall& call) {
    if (call.name != kCalculateTool) return {};
    const json args = json::parse(call.arguments.empty() ? "{}" : call.arguments, nullptr, false);
    if (!args.is_discarded() && args.is_object() && args.contains("expression") &&
        args["expression"].is_string())
        return trim(args["expression"].get<std::string>());
    return trim(call.arguments);
}

}  // namespace

std::vector<double> extract_features(const GateState& state, const Sample& sample) {
    const Trajectory& t = *state.so_far;
    const Prediction& cand = state.candidate;

    int total_calls = 0;
    int ok_calls = 0;
    int failed_calls = 0;
    std::map<std::string, int> expr_counts;
    const std::string* last_output = nullptr;
    for (const auto& [call, result] : t.tool_calls) {
        ++total_calls;
        if (result.ok) ++ok_calls;
        else ++failed_calls;
        last_output = &result.output;
        if (call.name == kCalculateTool) {
            const std::string expr = calculator_expression(call);
            if (!expr.empty()) expr_counts[expr] += 1;
        }
    }
    bool any_duplicate_expr = false;
    for (const auto& [expr, n] : expr_counts) {
        if (n >= 2) any_duplicate_expr = true;
    }

    const std::string last_output_text = last_output ? *last_output : std::string();
    const auto last_numeric = parse_number(last_output_text);

    std::vector<double> f;
    f.reserve(static_cast<std::size_t>(kFeatureDim));

    // Numeric block; fixed slot order.
    f.push_back(static_cast<double>(t.turns_used));
    const double remaining =
        state.max_turns > 0
            ? std::max(0.0, static_cast<double>(state.max_turns - t.turns_used) /
                                static_cast<double>(state.max_turns))
            : 0.0;
    f.push_back(remaining);
    f.push_back(static_cast<double>(total_calls));
    f.push_back(static_cast<double>(ok_calls));
    f.push_back(static_cast<double>(failed_calls));
    f.push_back(static_cast<double>(expr_counts.size()));
    f.push_back(any_duplicate_expr ? 1.0 : 0.0);
    f.push_back(last_numeric ? 1.0 : 0.0);
    f.push_back(last_numeric ? std::log1p(std::fabs(*last_numeric)) : 0.0);
    f.push_back(cand.final_answer.empty() ? 0.0 : 1.0);
    f.push_back(parse_number(cand.final_answer) ? 1.0 : 0.0);
    f.push_back(!cand.final_answer.empty() && last_output != nullptr &&
                        values_equal(cand.final_answer, last_output_text, 1e-6)
                    ? 1.0
                    : 0.0);
    const std::string reasoning_lower = to_lower(cand.reasoning);
    f.push_back(!cand.final_answer.empty() &&
                        reasoning_lower.find(to_lower(cand.final_answer)) != std::string::npos
                    ? 1.0
                    : 0.0);
    f.push_back(std::log1p(static_cast<double>(cand.reasoning.size())));
    f.push_back(static_cast<double>(count_numerals(cand.reasoning)));
    f.push_back(static_cast<double>(hedging_marker_count(cand.reasoning)));
    f.push_back(static_cast<double>(cand.evidence_ids.size()));

    const int n_chunks = static_cast<int>(sample.chunks.size());
    int in_range = 0;
    for (int id : cand.evidence_ids) {
        if (id >= 0 && id < n_chunks) ++in_range;
    }
    f.push_back(cand.evidence_ids.empty()
                    ? 0.0
                    : static_cast<double>(in_range) /
                          static_cast<double>(cand.evidence_ids.size()));

    // Fraction of predicted evidence chunks that share a numeral with the
    // reasoning text.
    const auto reasoning_numerals = extract_numerals(cand.reasoning);
    int sharing = 0;
    for (int id : cand.evidence_ids) {
        if (id < 0 || id >= n_chunks) continue;
        bool shares = false;
        for (const auto& cn : extract_numerals(sample.chunks[static_cast<std::size_t>(id)].text)) {
            for (const auto& rn : reasoning_numerals) {
                if (values_equal(cn, rn, 1e-9)) {
                    shares = true;
                    break;
                }
            }
            if (shares) break;
        }
        if (shares) ++sharing;
    }
    f.push_back(in_range > 0 ? static_cast<double>(sharing) / static_cast<double>(in_range)
                             : 0.0);
    f.push_back(cand.parse_ok ? 1.0 : 0.0);
    f.push_back(state.previous && state.previous->final_answer != cand.final_answer ? 1.0 : 0.0);
    f.push_back(static_cast<double>(t.messages.size()));
    f.push_back(static_cast<double>(count_numerals(sample.question)));
    f.push_back(static_cast<double>(n_chunks));

    const auto reasoning_hash = hash_text(cand.reasoning, kReasoningBins);
    const auto tool_hash = hash_text(last_output_text, kToolOutputBins);
    f.insert(f.end(), reasoning_hash.begin(), reasoning_hash.end());
    f.insert(f.end(), tool_hash.begin(), tool_hash.end());
    return f;
}

GateLabel label_sample(bool tool_correct, bool cot_correct, int tool_calls) {
    if (tool_correct) return {false, 1, 1};
    if (cot_correct) return {true, 3, 2};
    if (tool_calls < 2) return {true, 2, 3};
    return {false, 1, 4};
}

std::vector<double> Standardizer::apply(const std::vector<double>& x) const {
    if (x.size() != mean.size()) throw std::runtime_error("standardizer: dimension mismatch");
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        out[i] = constant[i] ? 0.0 : (x[i] - mean[i]) / stddev[i];
    }
    return out;
}

Standardizer fit_standardizer(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) throw std::runtime_error("standardizer: no rows");
    const std::size_t dim = rows[0].size();
    Standardizer s;
    s.mean.assign(dim, 0.0);
    s.stddev.assign(dim, 1.0);
    s.constant.assign(dim, 0);
    for (const auto& row : rows)
        for (std::size_t i = 0; i < dim; ++i) s.mean[i] += row[i];
    for (std::size_t i = 0; i < dim; ++i) s.mean[i] /= static_cast<double>(rows.size());
    for (std::size_t i = 0; i < dim; ++i) {
        double var = 0.0;
        for (const auto& row : rows) {
            const double d = row[i] - s.mean[i];
            var += d * d;
        }
        var /= static_cast<double>(rows.size());
        const double sd = std::sqrt(var);
        if (sd < 1e-12) {
            s.constant[i] = 1;
            s.stddev[i] = 1.0;
        } else {
            s.stddev[i] = sd;
        }
    }
    return s;
}

void GateModel::save(const std::filesystem::path& path) const {
    ordered_json j;
    j["format"] = "toolgap-gate";
    j["version"] = 1;
    j["input_dim"] = mlp.input_dim();
    std::vector<int> hidden;
    for (std::size_t l = 0; l + 1 < mlp.layers().size(); ++l) hidden.push_back(mlp.layers()[l].out);
    j["hidden_dims"] = hidden;
    j["mean"] = standardizer.mean;
    j["stddev"] = standardizer.stddev;
    j["constant"] = standardizer.constant;
    ordered_json layers = ordered_json::array();
    for (const Mlp::Layer& layer : mlp.layers()) {
        layers.push_back({{"in", layer.in}, {"out", layer.out}, {"w", layer.w}, {"b", layer.b}});
    }
    j["layers"] = std::move(layers);
    j["tau"] = tau;
    j["metadata"] = metadata;

    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write gate model: " + path.string());
    out << j.dump(2) << "\n";
}

GateModel GateModel::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open gate model: " + path.string());
    json j;
    in >> j;
    if (j.value("format", "") != "toolgap-gate")
        throw std::runtime_error("not a gate model file: " + path.string());

    GateModel model;
    model.standardizer.mean = j.at("mean").get<std::vector<double>>();
    model.standardizer.stddev = j.at("stddev").get<std::vector<double>>();
    model.standardizer.constant = j.at("constant").get<std::vector<std::uint8_t>>();
    const int input_dim = j.at("input_dim").get<int>();
    const auto hidden = j.at("hidden_dims").get<std::vector<int>>();
    model.mlp = Mlp::zeros(input_dim, hidden);
    const json& layers = j.at("layers");
    if (layers.size() != model.mlp.layers().size())
        throw std::runtime_error("gate model: layer count mismatch");
    for (std::size_t l = 0; l < model.mlp.layers().size(); ++l) {
        Mlp::Layer& layer = model.mlp.layers()[l];
        if (layers[l].at("in").get<int>() != layer.in ||
            layers[l].at("out").get<int>() != layer.out)
            throw std::runtime_error("gate model: layer shape mismatch");
        layer.w = layers[l].at("w").get<std::vector<double>>();
        layer.b = layers[l].at("b").get<std::vector<double>>();
    }
    model.tau = j.at("tau").get<double>();
    if (j.contains("metadata")) model.metadata = j["metadata"];
    return model;
}

double predict_continue(const GateModel& model, const std::vector<double>& features) {
    if (static_cast<int>(features.size()) != model.mlp.input_dim())
        throw std::runtime_error("predict_continue: expected " +
                                 std::to_string(model.mlp.input_dim()) + " features, got " +
                                 std::to_string(features.size()));
    return model.mlp.predict_one(model.standardizer.apply(features));
}

std::vector<int> group_kfold_assignment(const std::vector<std::string>& groups, int folds,
                                        std::uint64_t seed) {
    std::vector<std::string> distinct;
    std::set<std::string> seen;
    for (const auto& g : groups) {
        if (seen.insert(g).second) distinct.push_back(g);
    }
    std::sort(distinct.begin(), distinct.end());
    Rng rng(seed);
    rng.shuffle(distinct);

    const int usable_folds = std::min<int>(folds, static_cast<int>(distinct.size()));
    std::map<std::string, int> fold_of;
    for (std::size_t i = 0; i < distinct.size(); ++i)
        fold_of[distinct[i]] = static_cast<int>(i) % usable_folds;

    std::vector<int> assignment(groups.size());
    for (std::size_t i = 0; i < groups.size(); ++i) assignment[i] = fold_of[groups[i]];
    return assignment;
}

namespace {

std::vector<double> flatten(const std::vector<std::vector<double>>& rows,
                            const std::vector<std::size_t>& idx) {
    std::vector<double> out;
    if (idx.empty()) return out;
    out.reserve(idx.size() * rows[0].size());
    for (std::size_t i : idx)
        out.insert(out.end(), rows[i].begin(), rows[i].end());
    return out;
}

std::optional<double> rank_auc(const std::vector<double>& probs, const std::vector<double>& ys) {
    int pos = 0;
    int neg = 0;
    for (double y : ys) {
        if (y > 0.5) ++pos;
        else ++neg;
    }
    if (pos == 0 || neg == 0) return std::nullopt;

    std::vector<std::size_t> order(probs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return probs[a] < probs[b]; });

    // Average ranks over ties, then Mann-Whitney U.
    std::vector<double> rank(probs.size());
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && probs[order[j + 1]] == probs[order[i]]) ++j;
        const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) rank[order[k]] = avg;
        i = j + 1;
    }
    double pos_rank_sum = 0.0;
    for (std::size_t k = 0; k < ys.size(); ++k) {
        if (ys[k] > 0.5) pos_rank_sum += rank[k];
    }
    const double u = pos_rank_sum - static_cast<double>(pos) * (pos + 1) / 2.0;
    return u / (static_cast<double>(pos) * static_cast<double>(neg));
}

// Group-level split of row indices for early stopping.
void split_for_validation(const std::vector<std::string>& groups,
                          const std::vector<std::size_t>& rows, double val_fraction,
                          std::uint64_t seed, std::vector<std::size_t>& train_rows,
                          std::vector<std::size_t>& val_rows) {
    std::vector<std::string> distinct;
    std::set<std::string> seen;
    for (std::size_t i : rows) {
        if (seen.insert(groups[i]).second) distinct.push_back(groups[i]);
    }
    std::sort(distinct.begin(), distinct.end());
    Rng rng(seed);
    rng.shuffle(distinct);

    std::size_t n_val_groups = static_cast<std::size_t>(
        std::ceil(val_fraction * static_cast<double>(distinct.size())));
    if (distinct.size() >= 2 && n_val_groups == 0) n_val_groups = 1;
    if (n_val_groups >= distinct.size()) n_val_groups = distinct.size() - 1;

    std::set<std::string> val_groups(distinct.begin(),
                                     distinct.begin() + static_cast<long>(n_val_groups));
    for (std::size_t i : rows) {
        if (val_groups.count(groups[i])) val_rows.push_back(i);
        else train_rows.push_back(i);
    }
}

}  // namespace

GateModel train_gate(const std::vector<std::vector<double>>& features,
                     const std::vector<GateLabel>& labels,
                     const std::vector<std::string>& groups, const GateTrainConfig& config,
                     CVReport* cv_report) {
    if (features.empty() || features.size() != labels.size() || features.size() != groups.size())
        throw std::runtime_error("train_gate: inconsistent inputs");
    for (const auto& row : features) {
        if (static_cast<int>(row.size()) != kFeatureDim)
            throw std::runtime_error("train_gate: feature rows must have length " +
                                     std::to_string(kFeatureDim));
    }
    std::set<std::string> distinct_groups(groups.begin(), groups.end());
    if (distinct_groups.size() < 2)
        throw std::runtime_error("train_gate: need at least 2 distinct groups");

    bool any_pos = false;
    bool any_neg = false;
    for (const GateLabel& l : labels) {
        (l.continue_decision ? any_pos : any_neg) = true;
    }
    if (!any_pos || !any_neg)
        throw std::runtime_error("train_gate: degenerate single-class training set");

    const Standardizer standardizer = fit_standardizer(features);
    std::vector<std::vector<double>> standardized;
    standardized.reserve(features.size());
    for (const auto& row : features) standardized.push_back(standardizer.apply(row));

    std::vector<double> ys(labels.size());
    std::vector<double> ws(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        ys[i] = labels[i].continue_decision ? 1.0 : 0.0;
        ws[i] = static_cast<double>(labels[i].weight) *
                (labels[i].priority == 3 ? config.p3_boost : 1.0);
    }

    const auto subset = [&](const std::vector<std::size_t>& idx, const std::vector<double>& src) {
        std::vector<double> out;
        out.reserve(idx.size());
        for (std::size_t i : idx) out.push_back(src[i]);
        return out;
    };

    // Diagnostic cross-validation, grouped by question id.
    if (cv_report) {
        const std::vector<int> fold_of = group_kfold_assignment(groups, config.folds, config.seed);
        const int n_folds = *std::max_element(fold_of.begin(), fold_of.end()) + 1;
        for (int fold = 0; fold < n_folds; ++fold) {
            std::vector<std::size_t> train_idx, test_idx;
            for (std::size_t i = 0; i < fold_of.size(); ++i) {
                (fold_of[i] == fold ? test_idx : train_idx).push_back(i);
            }
            if (train_idx.empty() || test_idx.empty()) continue;

            std::vector<std::size_t> fit_idx, stop_idx;
            split_for_validation(groups, train_idx, config.val_fraction,
                                 config.seed + 1000 + static_cast<std::uint64_t>(fold), fit_idx,
                                 stop_idx);

            Mlp fold_mlp(kFeatureDim, config.hidden_dims,
                         config.seed + static_cast<std::uint64_t>(fold));
            train_mlp(fold_mlp, flatten(standardized, fit_idx), static_cast<int>(fit_idx.size()),
                      subset(fit_idx, ys), subset(fit_idx, ws), flatten(standardized, stop_idx),
                      static_cast<int>(stop_idx.size()), subset(stop_idx, ys),
                      subset(stop_idx, ws), config.mlp);

            const std::vector<double> probs = fold_mlp.predict(
                flatten(standardized, test_idx), static_cast<int>(test_idx.size()));
            const std::vector<double> test_ys = subset(test_idx, ys);
            int correct = 0;
            for (std::size_t i = 0; i < probs.size(); ++i) {
                if ((probs[i] >= 0.5) == (test_ys[i] > 0.5)) ++correct;
            }
            FoldMetrics m;
            m.fold = fold;
            m.train_rows = static_cast<int>(train_idx.size());
            m.test_rows = static_cast<int>(test_idx.size());
            m.accuracy = static_cast<double>(correct) / static_cast<double>(probs.size());
            m.auc = rank_auc(probs, test_ys);
            cv_report->folds.push_back(m);
        }
    }

    // Deployed model: all rows, group-level validation split for early stop.
    std::vector<std::size_t> all_idx(features.size());
    for (std::size_t i = 0; i < all_idx.size(); ++i) all_idx[i] = i;
    std::vector<std::size_t> fit_idx, stop_idx;
    split_for_validation(groups, all_idx, config.val_fraction, config.seed + 7, fit_idx,
                         stop_idx);

    GateModel model;
    model.standardizer = standardizer;
    model.mlp = Mlp(kFeatureDim, config.hidden_dims, config.seed);
    const MlpTrainReport report = train_mlp(
        model.mlp, flatten(standardized, fit_idx), static_cast<int>(fit_idx.size()),
        subset(fit_idx, ys), subset(fit_idx, ws), flatten(standardized, stop_idx),
        static_cast<int>(stop_idx.size()), subset(stop_idx, ys), subset(stop_idx, ws),
        config.mlp);
    model.tau = config.tau;
    model.metadata["seed"] = config.seed;
    model.metadata["epochs_run"] = report.epochs_run;
    model.metadata["folds"] = config.folds;
    model.metadata["rows"] = features.size();
    model.metadata["groups"] = distinct_groups.size();
    return model;
}

namespace {

// Drives gate-augmented inference inside the shared agent loop.
class GateDriver : public LoopDriver {
public:
    GateDriver(const GateModel& model, const Sample& sample, const RunConfig& run_config,
               const GateRunConfig& gate_config)
        : model_(model), sample_(sample), run_config_(run_config), gate_config_(gate_config) {}

    std::optional<std::string> on_termination_attempt(const Trajectory& so_far,
                                                      const Prediction& candidate) override {
        GateState state;
        state.so_far = &so_far;
        state.max_turns = run_config_.max_turns;
        state.candidate = candidate;
        state.previous = previous_;

        const double p = predict_continue(model_, extract_features(state, sample_));

        const bool no_progress =
            previous_.has_value() && previous_->final_answer == candidate.final_answer;
        previous_ = candidate;

        if (p < gate_config_.tau) return std::nullopt;
        if (continues_used_ >= gate_config_.max_extra_turns) return std::nullopt;
        if (no_progress) return std::nullopt;

        // A third identical calculator expression commits unconditionally.
        const auto [dup_expr, dup_count] = most_repeated_expression(so_far);
        if (dup_count >= 3) return std::nullopt;

        ++continues_used_;
        return select_prompt(so_far, candidate, dup_expr, dup_count);
    }

    std::optional<std::string> after_tool_round(const Trajectory& so_far) override {
        if (!gate_config_.critic) return std::nullopt;
        if (so_far.tool_calls.empty()) return std::nullopt;
        const auto& [call, result] = so_far.tool_calls.back();
        if (call.name != kCalculateTool) return std::nullopt;
        return prompts::render(
            prompts::continuation_template(prompts::Continuation::Verification),
            {{"prev_output", render_tool_message(result)}});
    }

    int extra_turns_granted() const override { return continues_used_; }

private:
    static std::pair<std::string, int> most_repeated_expression(const Trajectory& t) {
        std::map<std::string, int> counts;
        std::string top;
        int top_count = 0;
        for (const auto& [call, result] : t.tool_calls) {
            if (call.name != kCalculateTool) continue;
            const std::string expr = calculator_expression(call);
            if (expr.empty()) continue;
            const int n = ++counts[expr];
            if (n > top_count) {
                top_count = n;
                top = expr;
            }
        }
        return {top, top_count};
    }

    std::string select_prompt(const Trajectory& so_far, const Prediction& candidate,
                              const std::string& dup_expr, int dup_count) {
        std::string last_output;
        const ToolResult* last_result = nullptr;
        if (!so_far.tool_calls.empty()) {
            last_result = &so_far.tool_calls.back().second;
            last_output = render_tool_message(*last_result);
        }

        if (dup_count >= 2) {
            return prompts::render(
                prompts::continuation_template(prompts::Continuation::RepeatedError),
                {{"repeated_expression", dup_expr}, {"prev_output", last_output}});
        }
        if (last_result != nullptr && !last_result->ok) {
            return prompts::render(
                prompts::continuation_template(prompts::Continuation::ErrorCorrection),
                {{"prev_output", last_output}});
        }
        const bool sense_check = !alternate_;
        alternate_ = !alternate_;
        if (sense_check)
            return prompts::continuation_template(prompts::Continuation::SenseCheck);
        return prompts::render(
            prompts::continuation_template(prompts::Continuation::Rederivation),
            {{"prev_output", last_output.empty() ? candidate.final_answer : last_output}});
    }

    const GateModel& model_;
    const Sample& sample_;
    const RunConfig& run_config_;
    const GateRunConfig& gate_config_;
    std::optional<Prediction> previous_;
    int continues_used_ = 0;
    bool alternate_ = false;
};

}  // namespace

Trajectory gated_inference(const Sample& s, const Sample* base_sibling, Backend& backend,
                           const GateModel& model, const RunConfig& run_config,
                           const GateRunConfig& gate_config) {
    GateDriver driver(model, s, run_config, gate_config);
    return run_condition(Condition::AgentFull, s, base_sibling, backend, run_config, &driver);
}

}  // namespace toolgap
