#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "toolgap/backend.hpp"
#include "toolgap/corpus.hpp"
#include "toolgap/toolbox.hpp"

namespace toolgap {

enum class Condition {
    NoToolCoT,
    NoToolFCStyle,
    AgentNoopTool,
    AgentFull,
    AgentMax1Turn,
    AgentOracleCalc,
    AgentOracleEvid,
};

std::string to_string(Condition c);
Condition condition_from_string(const std::string& s);  // accepts CLI short names too
bool is_agent_condition(Condition c);

struct Prediction {
    std::string final_answer;
    std::set<int> evidence_ids;
    std::string reasoning;  // calc_chain or reasoning field
    bool parse_ok = false;
};

struct Trajectory {
    Condition condition = Condition::NoToolCoT;
    std::string question_id;
    Variant variant = Variant::Base;
    std::vector<ChatMessage> messages;
    std::vector<std::pair<ToolCall, ToolResult>> tool_calls;
    int turns_used = 0;        // assistant protocol turns
    int extra_turns_used = 0;  // gate continuations taken
    Prediction prediction;
    std::string raw_final;
    bool failed = false;
    std::string error;
    // Carried for downstream failure classification.
    std::string gold_answer;
    std::optional<int> gold_step_count;
};

enum class Matcher { Exact, Contains };
std::string to_string(Matcher m);
Matcher matcher_from_string(const std::string& s);

struct RunConfig {
    Task task = Task::GSM8K;  // selects the toolset and solver templates
    int max_turns = 8;
    Matcher matcher = Matcher::Exact;
    std::uint64_t seed = 0;
    double temperature = 0.0;
    // Require a tool call on the first turn (gate stage-1 data collection
    // only; the seven-condition suite leaves this off).
    bool force_first_tool_call = false;
};

// JSON-first extraction with angle-bracket and last-number fallbacks.
// Never throws; parse_ok records which tier succeeded.
Prediction extract_prediction(const std::string& raw);

// Exact: canonical numeric comparison (tolerance 1e-6), string equality
// otherwise. Contains: normalized prediction must contain the gold span.
bool answers_match(const std::string& prediction, const std::string& gold, Matcher m);

std::string render_user_prompt(const Sample& s);

// Hook driving gate-augmented inference; run_condition uses none.
class LoopDriver {
public:
    virtual ~LoopDriver() = default;
    // Called at a termination attempt. Returning a prompt injects it and
    // forces at least one further tool-conditioned step; nullopt commits.
    virtual std::optional<std::string> on_termination_attempt(const Trajectory& so_far,
                                                              const Prediction& candidate) = 0;
    // Called after a tool round; a returned prompt is injected as a user
    // message before the next action (CRITIC-style reflection).
    virtual std::optional<std::string> after_tool_round(const Trajectory& so_far) = 0;
    // Additional protocol turns granted so far (extends the hard stop).
    virtual int extra_turns_granted() const = 0;
};

// Runs one condition on one sample. base_sibling supplies the clean chunks
// for AgentOracleEvid and may be null otherwise. Backend failures mark the
// trajectory failed instead of throwing.
Trajectory run_condition(Condition cond, const Sample& s, const Sample* base_sibling,
                         Backend& backend, const RunConfig& config,
                         LoopDriver* driver = nullptr);

struct ResultRow {
    std::string question_id;
    Variant variant = Variant::Base;
    std::string condition;
    bool correct = false;
    double evidence_f1 = 0.0;
    int tool_calls = 0;
    int turns = 0;
};

struct ResultSet {
    std::vector<ResultRow> rows;

    const ResultRow* find(const std::string& question_id, Variant variant,
                          const std::string& condition) const;
};

void write_result_csv(const ResultSet& results, const std::filesystem::path& path);
ResultSet load_result_csv(const std::filesystem::path& path);

nlohmann::ordered_json trajectory_to_json(const Trajectory& t);
Trajectory trajectory_from_json(const nlohmann::json& j);

// Loads every trajectories/<condition>.jsonl under a results directory.
std::vector<Trajectory> load_trajectories(const std::filesystem::path& results_dir);

std::string pair_fingerprint(const std::string& question_id, Variant variant, Condition cond,
                             const std::string& backend_name, const RunConfig& config);

struct SuiteOutcome {
    ResultSet results;
    int pairs_run = 0;
    int pairs_resumed = 0;
};

// Runs every (sample, condition) pair, journaling trajectories incrementally
// so interrupted runs resume, then writes canonical sorted outputs:
// trajectories/<condition>.jsonl and results.csv under out_dir. Output bytes
// are independent of the jobs setting.
SuiteOutcome run_suite(const Corpus& c, const std::vector<Condition>& conds, Backend& backend,
                       const RunConfig& config, const std::filesystem::path& out_dir, int jobs);

}  // namespace toolgap
