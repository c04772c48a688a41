#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "toolgap/diagnostics.hpp"
#include "toolgap/harness.hpp"

using namespace toolgap;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

Sample natalia_tb() {
    Sample s;
    s.question_id = "gsm-natalia";
    s.variant = Variant::TB;
    s.question = "How many clips did Natalia sell altogether in April and May?";
    s.chunks = {
        {0, "Sales can fluctuate from month to month.", ChunkRole::Noise},
        {1, "Tracking sales helps in understanding trends.", ChunkRole::Noise},
        {2,
         "Natalia sold clips to 48 of her friends in April, and then she sold half as many "
         "clips in May.",
         ChunkRole::Evidence},
        {3, "Analyzing sales data can reveal patterns.", ChunkRole::Noise},
        {4, "Effective strategies can boost future sales.", ChunkRole::Noise},
    };
    s.gold_answer = "72";
    s.gold_evidence_ids = {2};
    s.gold_step_count = 2;
    return s;
}

Sample natalia_base() {
    Sample s = natalia_tb();
    s.variant = Variant::Base;
    s.chunks = {{0, s.chunks[2].text, ChunkRole::Evidence}};
    s.gold_evidence_ids = {0};
    return s;
}

ChatMessage assistant(const std::string& content) {
    ChatMessage m;
    m.role = Role::Assistant;
    m.content = content;
    return m;
}

ChatMessage calc_msg(const std::string& expr, const std::string& id) {
    ChatMessage m;
    m.role = Role::Assistant;
    m.tool_calls.push_back({id, "calculate", json{{"expression", expr}}.dump()});
    return m;
}

std::vector<ChatMessage> natalia_agent_script() {
    return {calc_msg("48/2", "c1"), calc_msg("48+24", "c2"),
            assistant(R"({"evidence_ids":[2],"final_answer":"72","reasoning":"48/2=24, 48+24=72"})")};
}

}  // namespace

TEST_CASE("extract_prediction parses the JSON tier") {
    const Prediction p =
        extract_prediction(R"({"calc_chain":"48/2=24, 48+24=<72>","evidence_ids":[2],"final_answer":"72"})");
    CHECK(p.final_answer == "72");
    CHECK(p.evidence_ids == std::set<int>{2});
    CHECK(p.parse_ok);
    CHECK(p.reasoning.find("48/2") != std::string::npos);
}

TEST_CASE("extract_prediction falls back to angle brackets, then last number") {
    const Prediction p1 = extract_prediction("the answer is <24>");
    CHECK(p1.final_answer == "24");
    CHECK_FALSE(p1.parse_ok);
    CHECK(p1.evidence_ids.empty());

    const Prediction p2 = extract_prediction("first 42 then 54 happened");
    CHECK(p2.final_answer == "54");
    CHECK_FALSE(p2.parse_ok);

    const Prediction p3 = extract_prediction("");
    CHECK(p3.final_answer.empty());
    CHECK_FALSE(p3.parse_ok);
}

TEST_CASE("extract_prediction handles prose around JSON and numeric answers") {
    const Prediction p = extract_prediction(
        R"(Sure thing: {"final_answer": 72, "reasoning": "done"} hope it helps)");
    CHECK(p.final_answer == "72");
    CHECK(p.parse_ok);
    CHECK(p.reasoning == "done");
}

TEST_CASE("matchers") {
    CHECK(answers_match("72", "72.0", Matcher::Exact));
    CHECK(answers_match("72.0000005", "72", Matcher::Exact));
    CHECK_FALSE(answers_match("71", "72", Matcher::Exact));
    CHECK(answers_match("Paris", " paris", Matcher::Exact));
    CHECK(answers_match("The answer is Paris, France.", "paris", Matcher::Contains));
    CHECK_FALSE(answers_match("Lyon", "Paris", Matcher::Contains));
    CHECK_FALSE(answers_match("anything", "", Matcher::Contains));
}

TEST_CASE("NoToolCoT: one chat call, no tool schemas") {
    ScriptedBackend backend(std::vector<ChatMessage>{
        assistant(R"({"calc_chain":"<72>","evidence_ids":[2],"final_answer":"72"})")});
    RunConfig config;
    const Trajectory t =
        run_condition(Condition::NoToolCoT, natalia_tb(), nullptr, backend, config);
    CHECK(t.turns_used == 1);
    CHECK(t.tool_calls.empty());
    CHECK(t.prediction.final_answer == "72");
    CHECK(t.prediction.parse_ok);
    REQUIRE(backend.request_log().size() == 1);
    CHECK(backend.request_log()[0].tool_schemas.empty());
    for (const ChatMessage& m : t.messages) CHECK(m.role != Role::Tool);
}

TEST_CASE("NoToolFCStyle: schemas offered, tools unusable") {
    ScriptedBackend backend(std::vector<ChatMessage>{
        assistant(R"({"calc_chain":"<72>","evidence_ids":[2],"final_answer":"72"})")});
    RunConfig config;
    const Trajectory t =
        run_condition(Condition::NoToolFCStyle, natalia_tb(), nullptr, backend, config);
    CHECK(t.tool_calls.empty());
    REQUIRE(backend.request_log().size() == 1);
    CHECK(backend.request_log()[0].tool_schemas.size() == 1);
    CHECK(backend.request_log()[0].tool_choice == ToolChoice::None);
}

TEST_CASE("AgentFull runs the loop and records tool calls") {
    ScriptedBackend backend(natalia_agent_script());
    RunConfig config;
    const Trajectory t =
        run_condition(Condition::AgentFull, natalia_tb(), nullptr, backend, config);
    CHECK(t.turns_used == 3);
    REQUIRE(t.tool_calls.size() == 2);
    CHECK(t.tool_calls[0].second.ok);
    CHECK(t.tool_calls[0].second.output == "24");
    CHECK(t.tool_calls[1].second.output == "72");
    CHECK(t.prediction.final_answer == "72");
    int tool_msgs = 0;
    for (const ChatMessage& m : t.messages) {
        if (m.role == Role::Tool) {
            ++tool_msgs;
            CHECK(!m.tool_call_id.empty());
        }
    }
    CHECK(tool_msgs == 2);
}

TEST_CASE("AgentNoopTool stubs every result") {
    ScriptedBackend backend(natalia_agent_script());
    RunConfig config;
    const Trajectory t =
        run_condition(Condition::AgentNoopTool, natalia_tb(), nullptr, backend, config);
    REQUIRE(t.tool_calls.size() == 2);
    for (const auto& [call, result] : t.tool_calls) {
        CHECK(result.ok);
        CHECK(result.output == kNoopStubOutput);
    }
}

TEST_CASE("AgentOracleCalc returns gold from the calculator") {
    ScriptedBackend backend(natalia_agent_script());
    RunConfig config;
    const Trajectory t =
        run_condition(Condition::AgentOracleCalc, natalia_tb(), nullptr, backend, config);
    REQUIRE(t.tool_calls.size() == 2);
    CHECK(t.tool_calls[0].second.output == "72");
    CHECK(t.tool_calls[1].second.output == "72");
}

TEST_CASE("AgentMax1Turn forces the answer after one tool round") {
    // The script attempts a second tool round; the forcing request (tool
    // choice none) drops it and the content is parsed as the final text.
    ScriptedBackend backend(std::vector<ChatMessage>{calc_msg("48/2", "c1"),
                                                     calc_msg("48+24", "c2"), assistant("x")});
    RunConfig config;
    const Trajectory t =
        run_condition(Condition::AgentMax1Turn, natalia_tb(), nullptr, backend, config);
    CHECK(t.turns_used == 2);
    CHECK(t.tool_calls.size() == 1);
    CHECK_FALSE(t.prediction.parse_ok);
    REQUIRE(backend.request_log().size() == 2);
    CHECK(backend.request_log()[1].tool_choice == ToolChoice::None);
}

TEST_CASE("AgentMax1Turn allows multiple calls within the single round") {
    ChatMessage multi;
    multi.role = Role::Assistant;
    multi.tool_calls.push_back({"c1", "calculate", json{{"expression", "48/2"}}.dump()});
    multi.tool_calls.push_back({"c2", "calculate", json{{"expression", "48+24"}}.dump()});
    ScriptedBackend backend(std::vector<ChatMessage>{
        multi, assistant(R"({"evidence_ids":[2],"final_answer":"72","reasoning":"r"})")});
    RunConfig config;
    const Trajectory t =
        run_condition(Condition::AgentMax1Turn, natalia_tb(), nullptr, backend, config);
    CHECK(t.tool_calls.size() == 2);
    CHECK(t.prediction.final_answer == "72");
    CHECK(t.turns_used == 2);
}

TEST_CASE("AgentOracleEvid runs on the Base chunks") {
    const Sample tb = natalia_tb();
    const Sample base = natalia_base();
    ScriptedBackend backend(natalia_agent_script());
    RunConfig config;
    const Trajectory t = run_condition(Condition::AgentOracleEvid, tb, &base, backend, config);
    CHECK(t.variant == Variant::TB);  // keyed by the original sample
    const std::string& user = t.messages[1].content;
    CHECK(user.find("Sales can fluctuate") == std::string::npos);
    CHECK(user.find("Natalia sold clips to 48") != std::string::npos);

    CHECK_THROWS(run_condition(Condition::AgentOracleEvid, tb, nullptr, backend, config));
}

TEST_CASE("hard stop at max_turns parses the last text") {
    std::vector<ChatMessage> endless;
    for (int i = 0; i < 5; ++i) endless.push_back(calc_msg("1+1", "c" + std::to_string(i)));
    ScriptedBackend backend(endless);
    RunConfig config;
    config.max_turns = 3;
    const Trajectory t =
        run_condition(Condition::AgentFull, natalia_tb(), nullptr, backend, config);
    CHECK(t.turns_used == 3);
    CHECK(t.tool_calls.size() == 3);
    CHECK_FALSE(t.prediction.parse_ok);
    CHECK_FALSE(t.failed);
}

TEST_CASE("force_first_tool_call sets required on the first request only") {
    ScriptedBackend backend(natalia_agent_script());
    RunConfig config;
    config.force_first_tool_call = true;
    run_condition(Condition::AgentFull, natalia_tb(), nullptr, backend, config);
    REQUIRE(backend.request_log().size() == 3);
    CHECK(backend.request_log()[0].tool_choice == ToolChoice::Required);
    CHECK(backend.request_log()[1].tool_choice == ToolChoice::Auto);
}

TEST_CASE("backend failure marks the trajectory failed") {
    ScriptedBackend backend(std::vector<ChatMessage>{});  // exhausted immediately
    RunConfig config;
    const Trajectory t =
        run_condition(Condition::AgentFull, natalia_tb(), nullptr, backend, config);
    CHECK(t.failed);
    CHECK(!t.error.empty());
}

TEST_CASE("trajectory JSON round-trip") {
    ScriptedBackend backend(natalia_agent_script());
    RunConfig config;
    const Trajectory t =
        run_condition(Condition::AgentFull, natalia_tb(), nullptr, backend, config);
    const Trajectory back = trajectory_from_json(trajectory_to_json(t));
    CHECK(trajectory_to_json(back) == trajectory_to_json(t));
    CHECK(back.gold_answer == "72");
    CHECK(back.gold_step_count == 2);
    CHECK(back.tool_calls.size() == t.tool_calls.size());
}

TEST_CASE("run_suite produces one row per (sample, condition) and resumes") {
    const fs::path out_dir = fs::temp_directory_path() / "toolgap_suite_test";
    fs::remove_all(out_dir);

    Corpus c;
    c.samples = {natalia_base(), natalia_tb()};
    const std::vector<Condition> conds = {Condition::NoToolCoT, Condition::NoToolFCStyle};
    RunConfig config;

    // jobs=1 visits pairs in (sample, condition) order.
    const auto reply =
        assistant(R"({"calc_chain":"<72>","evidence_ids":[0],"final_answer":"72"})");
    {
        ScriptedBackend backend(std::vector<ChatMessage>{reply, reply, reply, reply});
        const SuiteOutcome outcome = run_suite(c, conds, backend, config, out_dir, 1);
        CHECK(outcome.results.rows.size() == 4);
        CHECK(outcome.pairs_run == 4);
        CHECK(outcome.pairs_resumed == 0);
        CHECK(fs::exists(out_dir / "results.csv"));
        CHECK(fs::exists(out_dir / "trajectories" / "NoToolCoT.jsonl"));
        CHECK_FALSE(fs::exists(out_dir / "journal.jsonl"));
    }

    // Simulate an interrupted run: the journal holds two completed pairs and
    // the scripted backend only has replies for the remaining two.
    {
        std::ofstream journal(out_dir / "journal.jsonl");
        ScriptedBackend pre(std::vector<ChatMessage>{reply, reply});
        for (const Sample* s : {&c.samples[0], &c.samples[1]}) {
            Trajectory t = run_condition(Condition::NoToolCoT, *s, nullptr, pre, config);
            nlohmann::ordered_json entry;
            entry["fingerprint"] = pair_fingerprint(s->question_id, s->variant,
                                                    Condition::NoToolCoT, "scripted", config);
            entry["trajectory"] = trajectory_to_json(t);
            journal << entry.dump() << "\n";
        }
    }
    {
        ScriptedBackend backend(std::vector<ChatMessage>{reply, reply});
        const SuiteOutcome outcome = run_suite(c, conds, backend, config, out_dir, 1);
        CHECK(outcome.pairs_resumed == 2);
        CHECK(outcome.pairs_run == 2);
        CHECK(backend.calls() == 2);  // journaled pairs were not re-run
        CHECK(outcome.results.rows.size() == 4);
    }

    const ResultSet results = load_result_csv(out_dir / "results.csv");
    for (const ResultRow& row : results.rows) {
        CHECK(row.tool_calls == 0);
        CHECK(row.turns == 1);
    }
    const ResultRow* base_row = results.find("gsm-natalia", Variant::Base, "NoToolCoT");
    REQUIRE(base_row != nullptr);
    CHECK(base_row->correct);
    CHECK(base_row->evidence_f1 == 1.0);

    fs::remove_all(out_dir);
}

TEST_CASE("per-pair errors never abort the suite") {
    const fs::path out_dir = fs::temp_directory_path() / "toolgap_suite_err";
    fs::remove_all(out_dir);
    Corpus c;
    c.samples = {natalia_base()};
    ScriptedBackend backend(std::vector<ChatMessage>{});  // always exhausted
    RunConfig config;
    const SuiteOutcome outcome =
        run_suite(c, {Condition::NoToolCoT, Condition::AgentFull}, backend, config, out_dir, 1);
    CHECK(outcome.results.rows.size() == 2);
    for (const ResultRow& row : outcome.results.rows) CHECK_FALSE(row.correct);
    fs::remove_all(out_dir);
}
