#include "toolgap/harness.hpp"

#include <algorithm>
#include <cstdio>
#include <atomic>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "toolgap/diagnostics.hpp"
#include "toolgap/md5.hpp"
#include "toolgap/prompts.hpp"
#include "toolgap/text.hpp"

namespace toolgap {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::string to_string(Condition c) {
    switch (c) {
        case Condition::NoToolCoT: return "NoToolCoT";
        case Condition::NoToolFCStyle: return "NoToolFCStyle";
        case Condition::AgentNoopTool: return "AgentNoopTool";
        case Condition::AgentFull: return "AgentFull";
        case Condition::AgentMax1Turn: return "AgentMax1Turn";
        case Condition::AgentOracleCalc: return "AgentOracleCalc";
        case Condition::AgentOracleEvid: return "AgentOracleEvid";
    }
    return "NoToolCoT";
}

Condition condition_from_string(const std::string& s) {
    const std::string v = to_lower(s);
    if (v == "cot" || v == "notoolcot") return Condition::NoToolCoT;
    if (v == "fcstyle" || v == "notoolfcstyle") return Condition::NoToolFCStyle;
    if (v == "noop" || v == "agentnooptool") return Condition::AgentNoopTool;
    if (v == "full" || v == "agentfull") return Condition::AgentFull;
    if (v == "max1" || v == "agentmax1turn") return Condition::AgentMax1Turn;
    if (v == "oraclecalc" || v == "agentoraclecalc") return Condition::AgentOracleCalc;
    if (v == "oracleevid" || v == "agentoracleevid") return Condition::AgentOracleEvid;
    throw std::runtime_error("unknown condition: " + s);
}

bool is_agent_condition(Condition c) {
    return c != Condition::NoToolCoT && c != Condition::NoToolFCStyle;
}

std::string to_string(Matcher m) {
    return m == Matcher::Exact ? "exact" : "contains";
}

Matcher matcher_from_string(const std::string& s) {
    const std::string v = to_lower(s);
    if (v == "exact") return Matcher::Exact;
    if (v == "contains") return Matcher::Contains;
    throw std::runtime_error("unknown matcher: " + s);
}

namespace {

std::string answer_to_text(const json& v) {
    if (v.is_string()) return v.get<std::string>();
    return v.dump();
}

// Balanced-brace candidates, string literals respected.
std::optional<std::string> json_object_at(const std::string& raw, std::size_t start) {
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    for (std::size_t i = start; i < raw.size(); ++i) {
        const char c = raw[i];
        if (in_string) {
            if (escaped) escaped = false;
            else if (c == '\\') escaped = true;
            else if (c == '"') in_string = false;
            continue;
        }
        if (c == '"') in_string = true;
        else if (c == '{') ++depth;
        else if (c == '}') {
            --depth;
            if (depth == 0) return raw.substr(start, i - start + 1);
        }
    }
    return std::nullopt;
}

}  // namespace

Prediction extract_prediction(const std::string& raw) {
    Prediction p;

    // Tier 1: first well-formed JSON object carrying a final_answer.
    for (std::size_t i = 0; i < raw.size(); ++i) {
        if (raw[i] != '{') continue;
        const auto candidate = json_object_at(raw, i);
        if (!candidate) continue;
        json parsed = json::parse(*candidate, nullptr, false);
        if (parsed.is_discarded() || !parsed.is_object()) continue;
        if (!parsed.contains("final_answer")) continue;
        p.final_answer = trim(answer_to_text(parsed["final_answer"]));
        if (parsed.contains("evidence_ids") && parsed["evidence_ids"].is_array()) {
            for (const auto& id : parsed["evidence_ids"]) {
                if (id.is_number_integer()) p.evidence_ids.insert(id.get<int>());
            }
        }
        if (parsed.contains("calc_chain") && parsed["calc_chain"].is_string())
            p.reasoning = parsed["calc_chain"].get<std::string>();
        else if (parsed.contains("reasoning") && parsed["reasoning"].is_string())
            p.reasoning = parsed["reasoning"].get<std::string>();
        p.parse_ok = true;
        return p;
    }

    p.reasoning = raw;

    // Tier 2: last angle-bracket capture, per the CoT calc_chain rule.
    std::optional<std::string> bracket;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        if (raw[i] != '<') continue;
        const std::size_t close = raw.find('>', i + 1);
        if (close == std::string::npos) break;
        const std::string inner = trim(raw.substr(i + 1, close - i - 1));
        if (!inner.empty() && inner.find('<') == std::string::npos &&
            inner.find('\n') == std::string::npos)
            bracket = inner;
        i = close;
    }
    if (bracket) {
        p.final_answer = *bracket;
        return p;
    }

    // Tier 3: last number mentioned.
    const auto numerals = extract_numerals(raw);
    if (!numerals.empty()) p.final_answer = numerals.back();
    return p;
}

bool answers_match(const std::string& prediction, const std::string& gold, Matcher m) {
    if (m == Matcher::Exact) {
        const auto np = parse_number(prediction);
        const auto ng = parse_number(gold);
        if (np && ng) return numeric_equal(*np, *ng, 1e-6);
        return to_lower(trim(prediction)) == to_lower(trim(gold));
    }
    const std::string pred_norm = normalize_for_contains(prediction);
    const std::string gold_norm = normalize_for_contains(gold);
    if (gold_norm.empty()) return false;
    return pred_norm.find(gold_norm) != std::string::npos;
}

std::string render_user_prompt(const Sample& s) {
    std::string out = "Question: " + s.question + "\n\nChunks:\n";
    for (const Chunk& ch : s.chunks) {
        out += std::to_string(ch.id) + ": " + ch.text + "\n";
    }
    return out;
}

Trajectory run_condition(Condition cond, const Sample& s, const Sample* base_sibling,
                         Backend& backend, const RunConfig& config, LoopDriver* driver) {
    // AgentOracleEvid runs on the Base chunks of the same question regardless
    // of the sample's variant tag.
    const Sample* effective = &s;
    if (cond == Condition::AgentOracleEvid) {
        if (base_sibling == nullptr || base_sibling->variant != Variant::Base)
            throw std::runtime_error("AgentOracleEvid requires the Base sibling of " +
                                     s.question_id);
        effective = base_sibling;
    }

    Trajectory t;
    t.condition = cond;
    t.question_id = s.question_id;
    t.variant = s.variant;
    t.gold_answer = s.gold_answer;
    t.gold_step_count = s.gold_step_count;

    const Task task = config.task;

    if (cond == Condition::NoToolCoT || cond == Condition::NoToolFCStyle) {
        const bool fc_style = cond == Condition::NoToolFCStyle;
        ChatRequest req;
        req.messages.push_back({Role::System, prompts::solver_template(task, fc_style), {}, {}});
        req.messages.push_back({Role::User, render_user_prompt(*effective), {}, {}});
        req.temperature = config.temperature;
        req.seed = static_cast<std::int64_t>(config.seed);
        if (fc_style) {
            req.tool_schemas = tool_schemas_for(task);
            req.tool_choice = ToolChoice::None;
        }
        t.messages = req.messages;
        try {
            const ChatMessage reply = backend.chat(req);
            t.messages.push_back(reply);
            t.turns_used = 1;
            t.raw_final = reply.content;
            t.prediction = extract_prediction(reply.content);
        } catch (const std::exception& e) {
            t.failed = true;
            t.error = e.what();
            t.turns_used = 1;
        }
        return t;
    }

    ToolMode mode = ToolMode::real();
    if (cond == Condition::AgentNoopTool) mode = ToolMode::noop();
    if (cond == Condition::AgentOracleCalc) mode = ToolMode::oracle_calc(s.gold_answer);
    const bool single_protocol_turn = cond == Condition::AgentMax1Turn;

    t.messages.push_back({Role::System, prompts::solver_template(task, true), {}, {}});
    t.messages.push_back({Role::User, render_user_prompt(*effective), {}, {}});

    int tool_rounds = 0;
    bool force_tool_next = config.force_first_tool_call;
    std::string last_text;

    try {
        for (;;) {
            const int budget =
                config.max_turns + (driver ? driver->extra_turns_granted() : 0);
            if (t.turns_used >= budget) {
                // Hard stop: parse whatever text the last assistant turn had.
                t.raw_final = last_text;
                t.prediction = extract_prediction(last_text);
                return t;
            }

            ChatRequest req;
            req.messages = t.messages;
            req.tool_schemas = tool_schemas_for(task);
            req.temperature = config.temperature;
            req.seed = static_cast<std::int64_t>(config.seed);
            if (force_tool_next) req.tool_choice = ToolChoice::Required;
            else if (single_protocol_turn && tool_rounds >= 1) req.tool_choice = ToolChoice::None;
            else req.tool_choice = ToolChoice::Auto;
            force_tool_next = false;

            const ChatMessage reply = backend.chat(req);
            t.messages.push_back(reply);
            ++t.turns_used;
            last_text = reply.content;

            if (!reply.tool_calls.empty()) {
                for (const ToolCall& call : reply.tool_calls) {
                    const ToolResult result = dispatch_tool(call, effective->chunks, mode);
                    t.tool_calls.emplace_back(call, result);
                    t.messages.push_back(
                        {Role::Tool, render_tool_message(result), {}, call.id});
                }
                ++tool_rounds;
                if (driver) {
                    if (auto prompt = driver->after_tool_round(t)) {
                        t.messages.push_back({Role::User, *prompt, {}, {}});
                    }
                }
                continue;
            }

            // Termination attempt: plain assistant text.
            const Prediction candidate = extract_prediction(reply.content);
            if (driver) {
                if (auto prompt = driver->on_termination_attempt(t, candidate)) {
                    ++t.extra_turns_used;
                    t.messages.push_back({Role::User, *prompt, {}, {}});
                    force_tool_next = true;
                    continue;
                }
            }
            t.raw_final = reply.content;
            t.prediction = candidate;
            return t;
        }
    } catch (const std::exception& e) {
        t.failed = true;
        t.error = e.what();
        return t;
    }
}

const ResultRow* ResultSet::find(const std::string& question_id, Variant variant,
                                 const std::string& condition) const {
    for (const ResultRow& row : rows) {
        if (row.question_id == question_id && row.variant == variant &&
            row.condition == condition)
            return &row;
    }
    return nullptr;
}

namespace {

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += "\"";
    return out;
}

std::string format_f1(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

}  // namespace

void write_result_csv(const ResultSet& results, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write results csv: " + path.string());
    out << "question_id,variant,condition,correct,evidence_f1,tool_calls,turns\n";
    for (const ResultRow& r : results.rows) {
        out << csv_escape(r.question_id) << "," << to_string(r.variant) << "," << r.condition
            << "," << (r.correct ? 1 : 0) << "," << format_f1(r.evidence_f1) << ","
            << r.tool_calls << "," << r.turns << "\n";
    }
}

ResultSet load_result_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open results csv: " + path.string());
    ResultSet rs;
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        if (header) {
            header = false;
            continue;
        }
        if (trim(line).empty()) continue;
        // Simple split: question ids in this artifact never contain commas.
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (fields.size() != 7)
            throw std::runtime_error("bad results row: " + line);
        ResultRow r;
        r.question_id = fields[0];
        r.variant = variant_from_string(fields[1]);
        r.condition = fields[2];
        r.correct = fields[3] == "1";
        r.evidence_f1 = std::stod(fields[4]);
        r.tool_calls = std::stoi(fields[5]);
        r.turns = std::stoi(fields[6]);
        rs.rows.push_back(std::move(r));
    }
    return rs;
}

ordered_json trajectory_to_json(const Trajectory& t) {
    ordered_json j;
    j["condition"] = to_string(t.condition);
    j["question_id"] = t.question_id;
    j["variant"] = to_string(t.variant);
    j["turns_used"] = t.turns_used;
    j["extra_turns_used"] = t.extra_turns_used;
    j["failed"] = t.failed;
    if (!t.error.empty()) j["error"] = t.error;
    j["raw_final"] = t.raw_final;
    j["prediction"] = {{"final_answer", t.prediction.final_answer},
                       {"evidence_ids", t.prediction.evidence_ids},
                       {"reasoning", t.prediction.reasoning},
                       {"parse_ok", t.prediction.parse_ok}};
    j["gold_answer"] = t.gold_answer;
    if (t.gold_step_count) j["gold_step_count"] = *t.gold_step_count;

    ordered_json messages = ordered_json::array();
    for (const ChatMessage& m : t.messages) {
        ordered_json jm;
        jm["role"] = to_string(m.role);
        jm["content"] = m.content;
        if (!m.tool_calls.empty()) {
            ordered_json calls = ordered_json::array();
            for (const ToolCall& c : m.tool_calls)
                calls.push_back({{"id", c.id}, {"name", c.name}, {"arguments", c.arguments}});
            jm["tool_calls"] = std::move(calls);
        }
        if (!m.tool_call_id.empty()) jm["tool_call_id"] = m.tool_call_id;
        messages.push_back(std::move(jm));
    }
    j["messages"] = std::move(messages);

    ordered_json calls = ordered_json::array();
    for (const auto& [call, result] : t.tool_calls) {
        ordered_json jc;
        jc["call"] = {{"id", call.id}, {"name", call.name}, {"arguments", call.arguments}};
        ordered_json jr;
        jr["call_id"] = result.call_id;
        jr["ok"] = result.ok;
        jr["output"] = result.output;
        if (result.error_kind) jr["error_kind"] = to_string(*result.error_kind);
        jc["result"] = std::move(jr);
        calls.push_back(std::move(jc));
    }
    j["tool_calls"] = std::move(calls);
    return j;
}

namespace {

Role role_from_string(const std::string& s) {
    if (s == "system") return Role::System;
    if (s == "user") return Role::User;
    if (s == "assistant") return Role::Assistant;
    if (s == "tool") return Role::Tool;
    throw std::runtime_error("unknown role: " + s);
}

ToolErrorKind tool_error_from_string(const std::string& s) {
    if (s == "parse_error") return ToolErrorKind::ParseError;
    if (s == "div_zero") return ToolErrorKind::DivZero;
    if (s == "unknown_tool") return ToolErrorKind::UnknownTool;
    if (s == "bad_args") return ToolErrorKind::BadArgs;
    if (s == "stubbed") return ToolErrorKind::Stubbed;
    throw std::runtime_error("unknown tool error kind: " + s);
}

}  // namespace

Trajectory trajectory_from_json(const json& j) {
    Trajectory t;
    t.condition = condition_from_string(j.at("condition").get<std::string>());
    t.question_id = j.at("question_id").get<std::string>();
    t.variant = variant_from_string(j.at("variant").get<std::string>());
    t.turns_used = j.at("turns_used").get<int>();
    t.extra_turns_used = j.value("extra_turns_used", 0);
    t.failed = j.value("failed", false);
    t.error = j.value("error", "");
    t.raw_final = j.value("raw_final", "");
    const json& jp = j.at("prediction");
    t.prediction.final_answer = jp.value("final_answer", "");
    if (jp.contains("evidence_ids"))
        for (const auto& id : jp["evidence_ids"]) t.prediction.evidence_ids.insert(id.get<int>());
    t.prediction.reasoning = jp.value("reasoning", "");
    t.prediction.parse_ok = jp.value("parse_ok", false);
    t.gold_answer = j.value("gold_answer", "");
    if (j.contains("gold_step_count") && !j["gold_step_count"].is_null())
        t.gold_step_count = j["gold_step_count"].get<int>();

    if (j.contains("messages")) {
        for (const auto& jm : j["messages"]) {
            ChatMessage m;
            m.role = role_from_string(jm.at("role").get<std::string>());
            m.content = jm.value("content", "");
            if (jm.contains("tool_calls")) {
                for (const auto& jc : jm["tool_calls"]) {
                    m.tool_calls.push_back({jc.value("id", ""), jc.at("name").get<std::string>(),
                                            jc.value("arguments", "")});
                }
            }
            m.tool_call_id = jm.value("tool_call_id", "");
            t.messages.push_back(std::move(m));
        }
    }
    if (j.contains("tool_calls")) {
        for (const auto& jc : j["tool_calls"]) {
            ToolCall call{jc["call"].value("id", ""), jc["call"].at("name").get<std::string>(),
                          jc["call"].value("arguments", "")};
            ToolResult result;
            result.call_id = jc["result"].value("call_id", "");
            result.ok = jc["result"].at("ok").get<bool>();
            result.output = jc["result"].value("output", "");
            if (jc["result"].contains("error_kind"))
                result.error_kind =
                    tool_error_from_string(jc["result"]["error_kind"].get<std::string>());
            t.tool_calls.emplace_back(std::move(call), std::move(result));
        }
    }
    return t;
}

std::vector<Trajectory> load_trajectories(const std::filesystem::path& results_dir) {
    std::vector<Trajectory> out;
    const auto dir = results_dir / "trajectories";
    if (!std::filesystem::exists(dir)) return out;
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.path().extension() == ".jsonl") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& file : files) {
        std::ifstream in(file);
        std::string line;
        while (std::getline(in, line)) {
            if (trim(line).empty()) continue;
            out.push_back(trajectory_from_json(json::parse(line)));
        }
    }
    return out;
}

std::string pair_fingerprint(const std::string& question_id, Variant variant, Condition cond,
                             const std::string& backend_name, const RunConfig& config) {
    std::string key = question_id + "|" + to_string(variant) + "|" + to_string(cond) + "|" +
                      backend_name + "|" + std::to_string(config.seed) + "|" +
                      std::to_string(config.temperature) + "|" +
                      std::to_string(config.max_turns) + "|" + to_string(config.matcher) + "|" +
                      (config.force_first_tool_call ? "forced" : "free");
    return md5_hex(key);
}

SuiteOutcome run_suite(const Corpus& c, const std::vector<Condition>& conds, Backend& backend,
                       const RunConfig& config, const std::filesystem::path& out_dir, int jobs) {
    std::filesystem::create_directories(out_dir);
    std::filesystem::create_directories(out_dir / "trajectories");
    const auto journal_path = out_dir / "journal.jsonl";

    // Base-sibling lookup for AgentOracleEvid.
    std::map<std::string, const Sample*> base_by_qid;
    for (const Sample& s : c.samples) {
        if (s.variant == Variant::Base) base_by_qid[s.question_id] = &s;
    }

    struct Pair {
        const Sample* sample;
        Condition cond;
        std::string fingerprint;
    };
    std::vector<Pair> pairs;
    for (const Sample& s : c.samples) {
        for (Condition cond : conds) {
            pairs.push_back(
                {&s, cond, pair_fingerprint(s.question_id, s.variant, cond, backend.name(), config)});
        }
    }

    // Previously journaled trajectories survive here keyed by fingerprint.
    std::map<std::string, Trajectory> done;
    if (std::filesystem::exists(journal_path)) {
        std::ifstream in(journal_path);
        std::string line;
        while (std::getline(in, line)) {
            if (trim(line).empty()) continue;
            json parsed = json::parse(line, nullptr, false);
            if (parsed.is_discarded() || !parsed.contains("fingerprint")) continue;
            done.emplace(parsed["fingerprint"].get<std::string>(),
                         trajectory_from_json(parsed.at("trajectory")));
        }
    }

    SuiteOutcome outcome;
    std::vector<Trajectory> trajectories(pairs.size());
    std::vector<char> resumed(pairs.size(), 0);

    std::ofstream journal(journal_path, std::ios::app | std::ios::binary);
    std::mutex journal_mu;
    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> completed{0};

    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= pairs.size()) return;
            const std::size_t n_done = completed.fetch_add(1) + 1;
            if (n_done % 50 == 0)
                std::fprintf(stderr, "run: %zu/%zu pairs\n", n_done, pairs.size());
            const Pair& pair = pairs[i];
            if (auto it = done.find(pair.fingerprint); it != done.end()) {
                trajectories[i] = it->second;
                resumed[i] = 1;
                continue;
            }
            const Sample* base = nullptr;
            if (auto it = base_by_qid.find(pair.sample->question_id); it != base_by_qid.end())
                base = it->second;
            Trajectory t;
            try {
                t = run_condition(pair.cond, *pair.sample, base, backend, config);
            } catch (const std::exception& e) {
                t.condition = pair.cond;
                t.question_id = pair.sample->question_id;
                t.variant = pair.sample->variant;
                t.gold_answer = pair.sample->gold_answer;
                t.gold_step_count = pair.sample->gold_step_count;
                t.failed = true;
                t.error = e.what();
            }
            {
                std::lock_guard<std::mutex> lock(journal_mu);
                ordered_json entry;
                entry["fingerprint"] = pair.fingerprint;
                entry["trajectory"] = trajectory_to_json(t);
                journal << entry.dump() << "\n";
                journal.flush();
            }
            trajectories[i] = std::move(t);
        }
    };

    const int n_jobs = std::max(1, jobs);
    if (n_jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        for (int w = 0; w < n_jobs; ++w) threads.emplace_back(worker);
        for (auto& th : threads) th.join();
    }
    journal.close();

    // Canonical ordering: condition file order, then (question_id, variant).
    std::vector<std::size_t> order(pairs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const Trajectory& ta = trajectories[a];
        const Trajectory& tb = trajectories[b];
        if (ta.condition != tb.condition)
            return static_cast<int>(ta.condition) < static_cast<int>(tb.condition);
        if (ta.question_id != tb.question_id) return ta.question_id < tb.question_id;
        return static_cast<int>(ta.variant) < static_cast<int>(tb.variant);
    });

    std::map<Condition, std::ofstream> streams;
    for (std::size_t idx : order) {
        const Trajectory& t = trajectories[idx];
        auto it = streams.find(t.condition);
        if (it == streams.end()) {
            auto path = out_dir / "trajectories" / (to_string(t.condition) + ".jsonl");
            it = streams.emplace(t.condition, std::ofstream(path, std::ios::binary)).first;
        }
        it->second << trajectory_to_json(t).dump() << "\n";
    }
    streams.clear();

    // Gold-id lookup for Evidence-F1: the oracle-evidence condition presents
    // the Base chunks, so its predictions score against the Base gold ids.
    std::map<std::pair<std::string, Variant>, const Sample*> sample_by_key;
    for (const Sample& s : c.samples) sample_by_key[{s.question_id, s.variant}] = &s;

    for (std::size_t idx : order) {
        const Trajectory& t = trajectories[idx];
        ResultRow row;
        row.question_id = t.question_id;
        row.variant = t.variant;
        row.condition = to_string(t.condition);
        const Sample* s = sample_by_key.at({t.question_id, t.variant});
        const Sample* scored = s;
        if (t.condition == Condition::AgentOracleEvid) {
            if (auto it = base_by_qid.find(t.question_id); it != base_by_qid.end())
                scored = it->second;
        }
        row.correct = !t.failed &&
                      answers_match(t.prediction.final_answer, s->gold_answer, config.matcher);
        row.evidence_f1 = evidence_f1(t.prediction.evidence_ids, scored->gold_evidence_ids);
        row.tool_calls = static_cast<int>(t.tool_calls.size());
        row.turns = t.turns_used;
        outcome.results.rows.push_back(std::move(row));
        if (resumed[idx]) ++outcome.pairs_resumed;
        else ++outcome.pairs_run;
    }

    write_result_csv(outcome.results, out_dir / "results.csv");

    // The journal only matters for interrupted runs; dropping it keeps the
    // output tree byte-identical across runs and jobs settings.
    std::filesystem::remove(journal_path);
    return outcome;
}

}  // namespace toolgap
