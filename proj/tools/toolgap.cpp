#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include "toolgap/backend.hpp"
#include "toolgap/corpus.hpp"
#include "toolgap/distractor.hpp"
#include "toolgap/gate.hpp"
#include "toolgap/harness.hpp"
#include "toolgap/md5.hpp"
#include "toolgap/prompts.hpp"
#include "toolgap/report.hpp"
#include "toolgap/text.hpp"

namespace {

using namespace toolgap;
using ordered_json = nlohmann::ordered_json;
namespace fs = std::filesystem;

std::vector<std::string> split_list(const std::string& csv) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : csv) {
        if (c == ',') {
            if (!trim(cur).empty()) out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!trim(cur).empty()) out.push_back(trim(cur));
    return out;
}

struct BackendArgs {
    std::string backend = "scripted:demo";
    std::string endpoint = "http://localhost:8000/v1/chat/completions";
    std::string model = "default";
};

void add_backend_flags(CLI::App* cmd, BackendArgs& args) {
    cmd->add_option("--backend", args.backend,
                    "Backend: scripted:demo or http (default scripted:demo)");
    cmd->add_option("--endpoint", args.endpoint, "Chat-completions endpoint URL for http");
    cmd->add_option("--model", args.model, "Model name for http");
}

std::unique_ptr<Backend> make_backend(const BackendArgs& args) {
    if (args.backend == "scripted:demo") return make_demo_backend();
    if (args.backend == "http") {
        const char* key = std::getenv("TOOLGAP_API_KEY");
        return std::make_unique<HttpBackend>(args.endpoint, args.model, key ? key : "");
    }
    throw std::runtime_error("unknown backend: " + args.backend +
                             " (expected scripted:demo or http)");
}

void write_run_meta(const fs::path& out_dir, const std::string& corpus_path,
                    const BackendArgs& backend, const RunConfig& config,
                    const std::vector<std::string>& conditions) {
    ordered_json meta;
    meta["corpus"] = corpus_path;
    {
        std::ifstream in(corpus_path, std::ios::binary);
        const std::string bytes((std::istreambuf_iterator<char>(in)),
                                std::istreambuf_iterator<char>());
        meta["corpus_md5"] = md5_hex(bytes);
    }
    meta["backend"] = backend.backend;
    if (backend.backend == "http") {
        meta["endpoint"] = backend.endpoint;
        meta["model"] = backend.model;
    }
    meta["task"] = to_string(config.task);
    meta["conditions"] = conditions;
    meta["matcher"] = to_string(config.matcher);
    meta["seed"] = config.seed;
    meta["temperature"] = config.temperature;
    meta["max_turns"] = config.max_turns;
    meta["force_first_tool_call"] = config.force_first_tool_call;
    meta["template_bundle_md5"] = prompts::bundle_hash();
    std::ofstream out(out_dir / "run_meta.json", std::ios::binary);
    out << meta.dump(2) << "\n";
}

ordered_json load_run_meta(const fs::path& results_dir) {
    ordered_json meta;
    const fs::path path = results_dir / "run_meta.json";
    if (fs::exists(path)) {
        std::ifstream in(path);
        in >> meta;
    }
    return meta;
}

int cmd_augment(const std::string& corpus_path, const std::string& out_path,
                const std::string& variants_csv, int before, int after, int retries,
                const std::string& task_name, const BackendArgs& backend_args) {
    const Corpus corpus = load_corpus(corpus_path, task_from_string(task_name));
    std::set<Variant> variants;
    for (const auto& v : split_list(variants_csv)) variants.insert(variant_from_string(v));
    auto backend = make_backend(backend_args);
    const AugmentResult result =
        augment_corpus(corpus, variants, *backend, before, after, retries);
    write_corpus(result.corpus, out_path);
    for (const auto& entry : result.skip_log) std::cerr << "skipped: " << entry << "\n";
    std::cout << "augmented corpus: " << result.corpus.samples.size() << " samples ("
              << result.skip_log.size() << " skipped) -> " << out_path << "\n";
    return 0;
}

int cmd_split(const std::string& corpus_path, const std::string& train_out,
              const std::string& test_out, int train_n, int test_n, std::uint64_t seed,
              const std::string& task_name) {
    const Corpus corpus = load_corpus(corpus_path, task_from_string(task_name));
    const auto [train, test] = split_corpus(corpus, train_n, test_n, seed);
    write_corpus(train, train_out);
    write_corpus(test, test_out);
    std::cout << "split " << corpus.samples.size() << " samples into " << train.samples.size()
              << " train / " << test.samples.size() << " test\n";
    return 0;
}

int cmd_run(const std::string& corpus_path, const std::string& out_dir,
            const std::string& conditions_csv, const std::string& matcher_name,
            const std::string& task_name, std::uint64_t seed, double temperature, int max_turns,
            int jobs, bool force_first, const BackendArgs& backend_args) {
    RunConfig config;
    config.task = task_from_string(task_name);
    config.matcher = matcher_from_string(matcher_name);
    config.seed = seed;
    config.temperature = temperature;
    config.max_turns = max_turns;
    config.force_first_tool_call = force_first;

    const Corpus corpus = load_corpus(corpus_path, config.task);
    std::vector<Condition> conditions;
    for (const auto& c : split_list(conditions_csv)) conditions.push_back(condition_from_string(c));

    auto backend = make_backend(backend_args);
    const SuiteOutcome outcome = run_suite(corpus, conditions, *backend, config, out_dir, jobs);
    write_run_meta(out_dir, corpus_path, backend_args, config, split_list(conditions_csv));
    std::cout << "ran " << outcome.pairs_run << " pairs (" << outcome.pairs_resumed
              << " resumed) -> " << out_dir << "\n";
    return 0;
}

int cmd_diagnose(const std::string& results_dir, const std::string& out_path) {
    const ResultSet results = load_result_csv(fs::path(results_dir) / "results.csv");
    const std::vector<Trajectory> trajectories = load_trajectories(results_dir);
    const ordered_json report =
        build_report(results, trajectories, load_run_meta(results_dir));
    write_report_files(report, out_path);
    std::cout << render_report_text(report);
    std::cout << "report -> " << out_path << "\n";
    return 0;
}

int cmd_gate_train(const std::string& train_results, const std::string& corpus_path,
                   const std::string& out_path, const std::string& task_name, std::uint64_t seed,
                   int folds, double tau, double p3_boost, int max_turns, int epochs) {
    const Corpus corpus = load_corpus(corpus_path, task_from_string(task_name));
    const ResultSet results = load_result_csv(fs::path(train_results) / "results.csv");
    const std::vector<Trajectory> trajectories = load_trajectories(train_results);

    std::map<std::pair<std::string, Variant>, const Sample*> samples;
    for (const Sample& s : corpus.samples) samples[{s.question_id, s.variant}] = &s;

    std::vector<std::vector<double>> features;
    std::vector<GateLabel> labels;
    std::vector<std::string> groups;
    int priority_counts[5] = {0, 0, 0, 0, 0};
    for (const Trajectory& t : trajectories) {
        if (t.condition != Condition::AgentFull || t.failed) continue;
        const auto sample_it = samples.find({t.question_id, t.variant});
        if (sample_it == samples.end()) continue;
        const ResultRow* full = results.find(t.question_id, t.variant, "AgentFull");
        const ResultRow* cot = results.find(t.question_id, t.variant, "NoToolCoT");
        if (full == nullptr || cot == nullptr) continue;

        GateState state;
        state.so_far = &t;
        state.max_turns = max_turns;
        state.candidate = t.prediction;
        features.push_back(extract_features(state, *sample_it->second));
        const GateLabel label = label_sample(full->correct, cot->correct, full->tool_calls);
        ++priority_counts[label.priority];
        labels.push_back(label);
        groups.push_back(t.question_id);
    }
    if (features.empty())
        throw std::runtime_error("no gate training rows; need AgentFull and NoToolCoT results");

    GateTrainConfig config;
    config.seed = seed;
    config.folds = folds;
    config.tau = tau;
    config.p3_boost = p3_boost;
    config.mlp.max_epochs = epochs;

    CVReport cv;
    GateModel model = train_gate(features, labels, groups, config, &cv);
    model.metadata["max_turns"] = max_turns;
    model.metadata["priority_counts"] = {{"p1", priority_counts[1]},
                                         {"p2", priority_counts[2]},
                                         {"p3", priority_counts[3]},
                                         {"p4", priority_counts[4]}};
    model.save(out_path);

    ordered_json cv_json = ordered_json::array();
    for (const FoldMetrics& fold : cv.folds) {
        ordered_json f;
        f["fold"] = fold.fold;
        f["train_rows"] = fold.train_rows;
        f["test_rows"] = fold.test_rows;
        f["accuracy"] = fold.accuracy;
        if (fold.auc) f["auc"] = *fold.auc;
        cv_json.push_back(std::move(f));
    }
    const fs::path cv_path = fs::path(out_path).replace_extension(".cv.json");
    std::ofstream cv_out(cv_path, std::ios::binary);
    cv_out << cv_json.dump(2) << "\n";

    std::cout << "trained gate on " << features.size() << " rows ("
              << ordered_json(model.metadata["priority_counts"]).dump() << ") -> " << out_path
              << "\n";
    return 0;
}

int cmd_gate_run(const std::string& corpus_path, const std::string& gate_path,
                 const std::string& out_dir, const std::string& matcher_name,
                 const std::string& task_name, std::uint64_t seed, double temperature,
                 int max_turns, bool critic, double tau, int max_extra_turns,
                 const std::string& baseline_results, const BackendArgs& backend_args) {
    RunConfig config;
    config.task = task_from_string(task_name);
    config.matcher = matcher_from_string(matcher_name);
    config.seed = seed;
    config.temperature = temperature;
    config.max_turns = max_turns;

    GateRunConfig gate_config;
    gate_config.critic = critic;
    gate_config.max_extra_turns = max_extra_turns;

    const Corpus corpus = load_corpus(corpus_path, config.task);
    const GateModel model = GateModel::load(gate_path);
    gate_config.tau = tau >= 0.0 ? tau : model.tau;

    auto backend = make_backend(backend_args);
    const std::string condition_name = critic ? "AgentGatedCritic" : "AgentGated";

    fs::create_directories(fs::path(out_dir) / "trajectories");
    std::vector<Trajectory> trajectories;
    ResultSet rows;
    for (const Sample& s : corpus.samples) {
        const Sample* base = find_base_sibling(corpus, s.question_id);
        Trajectory t = gated_inference(s, base, *backend, model, config, gate_config);
        ResultRow row;
        row.question_id = s.question_id;
        row.variant = s.variant;
        row.condition = condition_name;
        row.correct = !t.failed &&
                      answers_match(t.prediction.final_answer, s.gold_answer, config.matcher);
        row.evidence_f1 = evidence_f1(t.prediction.evidence_ids, s.gold_evidence_ids);
        row.tool_calls = static_cast<int>(t.tool_calls.size());
        row.turns = t.turns_used;
        rows.rows.push_back(std::move(row));
        trajectories.push_back(std::move(t));
    }

    std::sort(trajectories.begin(), trajectories.end(),
              [](const Trajectory& a, const Trajectory& b) {
                  if (a.question_id != b.question_id) return a.question_id < b.question_id;
                  return static_cast<int>(a.variant) < static_cast<int>(b.variant);
              });
    std::sort(rows.rows.begin(), rows.rows.end(), [](const ResultRow& a, const ResultRow& b) {
        if (a.question_id != b.question_id) return a.question_id < b.question_id;
        return static_cast<int>(a.variant) < static_cast<int>(b.variant);
    });

    std::ofstream traj_out(fs::path(out_dir) / "trajectories" / (condition_name + ".jsonl"),
                           std::ios::binary);
    for (const Trajectory& t : trajectories) traj_out << trajectory_to_json(t).dump() << "\n";
    write_result_csv(rows, fs::path(out_dir) / "results.csv");
    write_run_meta(out_dir, corpus_path, backend_args, config, {condition_name});

    int correct = 0;
    for (const ResultRow& r : rows.rows) correct += r.correct ? 1 : 0;
    std::cout << condition_name << ": " << correct << "/" << rows.rows.size() << " correct -> "
              << out_dir << "\n";

    if (!baseline_results.empty()) {
        const ResultSet baseline =
            load_result_csv(fs::path(baseline_results) / "results.csv");
        ordered_json cmp =
            gate_comparison(baseline, rows, critic ? &rows : nullptr);
        std::ofstream cmp_out(fs::path(out_dir) / "comparison.json", std::ios::binary);
        cmp_out << cmp.dump(2) << "\n";
        ordered_json wrapper;
        wrapper["gate_comparison"] = cmp;
        std::cout << render_report_text(wrapper);
    }
    return 0;
}

int cmd_report(const std::string& results_dir, const std::string& gate_results,
               const std::string& critic_results, const std::string& accuracy_fixture,
               const std::string& out_dir) {
    ordered_json report;
    if (!accuracy_fixture.empty()) {
        report = report_from_accuracy_fixture(accuracy_fixture);
    } else if (!results_dir.empty()) {
        const ResultSet results = load_result_csv(fs::path(results_dir) / "results.csv");
        const std::vector<Trajectory> trajectories = load_trajectories(results_dir);
        report = build_report(results, trajectories, load_run_meta(results_dir));
        if (!gate_results.empty()) {
            const ResultSet gated = load_result_csv(fs::path(gate_results) / "results.csv");
            std::optional<ResultSet> critic;
            if (!critic_results.empty())
                critic = load_result_csv(fs::path(critic_results) / "results.csv");
            report["gate_comparison"] =
                gate_comparison(results, gated, critic ? &*critic : nullptr);
        }
    } else {
        throw std::runtime_error("report needs --results or --accuracy-fixture");
    }

    std::cout << render_report_text(report);
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        write_report_files(report, fs::path(out_dir) / "report.json");
        std::cout << "report -> " << (fs::path(out_dir) / "report.json").string() << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"toolgap: diagnosis harness for the CoT vs tool-protocol gap"};
    app.require_subcommand(1);

    // augment
    auto* augment = app.add_subcommand("augment", "Generate distractor variants for a corpus");
    std::string aug_corpus, aug_out, aug_variants = "tb,sp,ped,hu", aug_task = "gsm8k";
    int aug_before = 2, aug_after = 2, aug_retries = 2;
    BackendArgs aug_backend;
    augment->add_option("--corpus", aug_corpus, "Input corpus (JSONL)")->required();
    augment->add_option("--out", aug_out, "Output corpus path")->required();
    augment->add_option("--variants", aug_variants, "Comma list of tb,sp,ped,hu");
    augment->add_option("--before", aug_before, "Distractor sentences before the context");
    augment->add_option("--after", aug_after, "Distractor sentences after the context");
    augment->add_option("--retries", aug_retries, "Retries per generation request");
    augment->add_option("--task", aug_task, "gsm8k or hotpotqa");
    add_backend_flags(augment, aug_backend);

    // split
    auto* split = app.add_subcommand("split", "Split a corpus by question id");
    std::string sp_corpus, sp_train_out, sp_test_out, sp_task = "gsm8k";
    int sp_train_n = 0, sp_test_n = 0;
    std::uint64_t sp_seed = 0;
    split->add_option("--corpus", sp_corpus, "Input corpus")->required();
    split->add_option("--train-out", sp_train_out, "Train split path")->required();
    split->add_option("--test-out", sp_test_out, "Test split path")->required();
    split->add_option("--train-n", sp_train_n, "Questions in the train split")->required();
    split->add_option("--test-n", sp_test_n, "Questions in the test split")->required();
    split->add_option("--seed", sp_seed, "Shuffle seed");
    split->add_option("--task", sp_task, "gsm8k or hotpotqa");

    // run
    auto* run = app.add_subcommand("run", "Run intervention conditions over a corpus");
    std::string run_corpus, run_out;
    std::string run_conditions = "cot,fcstyle,noop,full,max1,oraclecalc,oracleevid";
    std::string run_matcher = "exact", run_task = "gsm8k";
    std::uint64_t run_seed = 0;
    double run_temperature = 0.0;
    int run_max_turns = 8;
    int run_jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    bool run_force_first = false;
    BackendArgs run_backend;
    run->add_option("--corpus", run_corpus, "Corpus path")->required();
    run->add_option("--out", run_out, "Output directory")->required();
    run->add_option("--conditions", run_conditions, "Comma list of conditions");
    run->add_option("--matcher", run_matcher, "exact or contains");
    run->add_option("--task", run_task, "gsm8k or hotpotqa");
    run->add_option("--seed", run_seed, "Seed recorded in requests");
    run->add_option("--temperature", run_temperature, "Sampling temperature");
    run->add_option("--max-turns", run_max_turns, "Agent loop budget");
    run->add_option("--jobs", run_jobs, "Parallel workers");
    run->add_flag("--force-first-tool-call", run_force_first,
                  "Require a tool call on the first turn (gate data collection)");
    add_backend_flags(run, run_backend);

    // diagnose
    auto* diagnose = app.add_subcommand("diagnose", "Compute diagnostics for stored results");
    std::string diag_results, diag_out;
    diagnose->add_option("--results", diag_results, "Results directory from `run`")->required();
    diagnose->add_option("--out", diag_out, "Report JSON path (default <results>/report.json)");

    // gate-train
    auto* gate_train = app.add_subcommand("gate-train", "Train the termination gate");
    std::string gt_results, gt_corpus, gt_out = "gate.json", gt_task = "gsm8k";
    std::uint64_t gt_seed = 0;
    int gt_folds = 5, gt_max_turns = 8, gt_epochs = 500;
    double gt_tau = 0.05, gt_boost = 1.0;
    gate_train->add_option("--train-results", gt_results, "Results dir with AgentFull + CoT runs")
        ->required();
    gate_train->add_option("--corpus", gt_corpus, "Corpus the results were produced from")
        ->required();
    gate_train->add_option("--out", gt_out, "Gate model output path");
    gate_train->add_option("--task", gt_task, "gsm8k or hotpotqa");
    gate_train->add_option("--seed", gt_seed, "Training seed");
    gate_train->add_option("--folds", gt_folds, "Group cross-validation folds");
    gate_train->add_option("--tau", gt_tau, "Decision threshold stored in the model");
    gate_train->add_option("--p3-boost", gt_boost, "Extra weight multiplier on priority-3 rows");
    gate_train->add_option("--max-turns", gt_max_turns, "Loop budget used during collection");
    gate_train->add_option("--epochs", gt_epochs, "Max training epochs");

    // gate-run
    auto* gate_run = app.add_subcommand("gate-run", "Run gate-augmented inference");
    std::string gr_corpus, gr_gate, gr_out, gr_matcher = "exact", gr_task = "gsm8k";
    std::string gr_baseline;
    std::uint64_t gr_seed = 0;
    double gr_temperature = 0.0, gr_tau = -1.0;
    int gr_max_turns = 8, gr_extra = 3;
    bool gr_critic = false;
    BackendArgs gr_backend;
    gate_run->add_option("--corpus", gr_corpus, "Corpus path")->required();
    gate_run->add_option("--gate", gr_gate, "Trained gate model (gate.json)")->required();
    gate_run->add_option("--out", gr_out, "Output directory")->required();
    gate_run->add_option("--matcher", gr_matcher, "exact or contains");
    gate_run->add_option("--task", gr_task, "gsm8k or hotpotqa");
    gate_run->add_option("--seed", gr_seed, "Seed recorded in requests");
    gate_run->add_option("--temperature", gr_temperature, "Sampling temperature");
    gate_run->add_option("--max-turns", gr_max_turns, "Agent loop budget");
    gate_run->add_flag("--critic", gr_critic, "Insert reflection prompts after calculator calls");
    gate_run->add_option("--tau", gr_tau, "Decision threshold (default: model's)");
    gate_run->add_option("--max-extra-turns", gr_extra, "Continuation budget");
    gate_run->add_option("--baseline-results", gr_baseline,
                         "Baseline results dir for the comparison table");
    add_backend_flags(gate_run, gr_backend);

    // report
    auto* report = app.add_subcommand("report", "Render tables from stored results");
    std::string rep_results, rep_gate, rep_critic, rep_fixture, rep_out;
    report->add_option("--results", rep_results, "Results directory");
    report->add_option("--gate-results", rep_gate, "Gate results directory");
    report->add_option("--critic-results", rep_critic, "Gate+CRITIC results directory");
    report->add_option("--accuracy-fixture", rep_fixture,
                       "Accuracy fixture JSON (delta tables only)");
    report->add_option("--out", rep_out, "Directory for report.json + CSV mirrors");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n" << app.help();
        return 2;
    }

    try {
        if (augment->parsed())
            return cmd_augment(aug_corpus, aug_out, aug_variants, aug_before, aug_after,
                               aug_retries, aug_task, aug_backend);
        if (split->parsed())
            return cmd_split(sp_corpus, sp_train_out, sp_test_out, sp_train_n, sp_test_n,
                             sp_seed, sp_task);
        if (run->parsed())
            return cmd_run(run_corpus, run_out, run_conditions, run_matcher, run_task, run_seed,
                           run_temperature, run_max_turns, run_jobs, run_force_first,
                           run_backend);
        if (diagnose->parsed()) {
            const std::string out =
                diag_out.empty() ? (std::filesystem::path(diag_results) / "report.json").string()
                                 : diag_out;
            return cmd_diagnose(diag_results, out);
        }
        if (gate_train->parsed())
            return cmd_gate_train(gt_results, gt_corpus, gt_out, gt_task, gt_seed, gt_folds,
                                  gt_tau, gt_boost, gt_max_turns, gt_epochs);
        if (gate_run->parsed())
            return cmd_gate_run(gr_corpus, gr_gate, gr_out, gr_matcher, gr_task, gr_seed,
                                gr_temperature, gr_max_turns, gr_critic, gr_tau, gr_extra,
                                gr_baseline, gr_backend);
        if (report->parsed())
            return cmd_report(rep_results, rep_gate, rep_critic, rep_fixture, rep_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
