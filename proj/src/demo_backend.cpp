#include <algorithm>
#include <map>
#include <optional>
#include <stdexcept>

#include "toolgap/backend.hpp"
#include "toolgap/expr.hpp"
#include "toolgap/md5.hpp"
#include "toolgap/text.hpp"

// scripted:demo is a deterministic rule-based responder for the bundled toy
// corpus. It plays six fixed personas (keyed by the protagonist name in the
// question) with distinct failure modes: self-reliant, tool-copying,
// wrong-expression-but-correctable, noop-resilient, and two weak readers.
// Every reply is a pure function of the request, so suite runs are
// byte-identical across jobs settings.

namespace toolgap {

namespace {

using nlohmann::ordered_json;

enum class PersonaKind {
    SelfReliant,     // computes in its head, ignores tool outputs
    ToolCopier,      // copies the tool output, lost without it
    WrongExprFix,    // picks the wrong expression, corrects after a nudge
    WrongExprSelf,   // wrong expression, but self-computes when the tool is mute
    WeakOneBadCall,  // one malformed call, wrong mental arithmetic
    WeakTwoCalls,    // malformed then wrong call, copies whatever comes back
};

struct Persona {
    PersonaKind kind = PersonaKind::SelfReliant;
    bool cot_correct = true;
    bool good_evidence = true;
};

const std::map<std::string, Persona>& personas() {
    static const std::map<std::string, Persona> kPersonas = {
        {"maya", {PersonaKind::SelfReliant, true, true}},
        {"leo", {PersonaKind::ToolCopier, true, true}},
        {"iris", {PersonaKind::WrongExprFix, true, true}},
        {"ruby", {PersonaKind::WrongExprSelf, true, true}},
        {"zara", {PersonaKind::WeakOneBadCall, false, false}},
        {"owen", {PersonaKind::WeakTwoCalls, false, false}},
    };
    return kPersonas;
}

struct ParsedProblem {
    std::string question;
    std::vector<std::pair<int, std::string>> chunks;
    Persona persona;
    // Derived arithmetic: first two numerals of the evidence chunk and the
    // operation cue.
    double a = 0.0;
    double b = 0.0;
    char op = '+';
    std::vector<int> evidence_ids;
    double answer = 0.0;
};

std::optional<ParsedProblem> parse_problem(const std::string& user_prompt) {
    ParsedProblem p;
    const std::string q_marker = "Question: ";
    const std::string c_marker = "Chunks:";
    const std::size_t q_pos = user_prompt.find(q_marker);
    const std::size_t c_pos = user_prompt.find(c_marker);
    if (q_pos == std::string::npos || c_pos == std::string::npos) return std::nullopt;
    p.question = trim(user_prompt.substr(q_pos + q_marker.size(), c_pos - q_pos - q_marker.size()));

    std::size_t pos = c_pos + c_marker.size();
    while (pos < user_prompt.size()) {
        const std::size_t eol = user_prompt.find('\n', pos);
        const std::string line =
            trim(user_prompt.substr(pos, eol == std::string::npos ? std::string::npos : eol - pos));
        pos = eol == std::string::npos ? user_prompt.size() : eol + 1;
        if (line.empty()) continue;
        const std::size_t colon = line.find(':');
        if (colon == std::string::npos) continue;
        const auto id = parse_number(line.substr(0, colon));
        if (!id) continue;
        p.chunks.emplace_back(static_cast<int>(*id), trim(line.substr(colon + 1)));
    }
    if (p.chunks.empty()) return std::nullopt;

    const auto q_tokens = tokenize(p.question);
    bool found = false;
    for (const auto& [name, persona] : personas()) {
        if (has_token(q_tokens, name)) {
            p.persona = persona;
            found = true;
            break;
        }
    }
    if (!found) return std::nullopt;

    std::string evidence_text;
    for (const auto& [id, text] : p.chunks) {
        if (extract_numerals(text).size() >= 2) {
            p.evidence_ids.push_back(id);
            if (evidence_text.empty()) evidence_text = text;
        }
    }
    if (evidence_text.empty()) return std::nullopt;

    const auto numerals = extract_numerals(evidence_text);
    p.a = *parse_number(numerals[0]);
    p.b = *parse_number(numerals[1]);

    const std::string cue_text = to_lower(evidence_text + " " + p.question);
    if (cue_text.find("into each") != std::string::npos ||
        cue_text.find("for each") != std::string::npos)
        p.op = '/';
    else if (cue_text.find("in each") != std::string::npos)
        p.op = '*';
    else if (cue_text.find("left") != std::string::npos ||
             cue_text.find("remain") != std::string::npos)
        p.op = '-';
    else
        p.op = '+';

    switch (p.op) {
        case '+': p.answer = p.a + p.b; break;
        case '-': p.answer = p.a - p.b; break;
        case '*': p.answer = p.a * p.b; break;
        case '/': p.answer = p.b != 0.0 ? p.a / p.b : 0.0; break;
    }
    return p;
}

std::string num(double v) { return format_number(v); }

std::string correct_expression(const ParsedProblem& p) {
    return num(p.a) + std::string(1, p.op) + num(p.b);
}

std::string wrong_expression(const ParsedProblem& p) {
    // Plausible but wrong: subtraction in place of the real operation.
    if (p.op == '-') return num(p.a) + "+" + num(p.b);
    return num(p.a) + "-" + num(p.b);
}

std::string malformed_expression(const ParsedProblem& p) {
    return num(p.a) + " +* " + num(p.b);
}

std::string mental_answer(const ParsedProblem& p) {
    // Weak personas are off by one.
    return p.persona.cot_correct ? num(p.answer) : num(p.answer + 1.0);
}

std::vector<int> reported_evidence(const ParsedProblem& p) {
    if (p.persona.good_evidence) return p.evidence_ids;
    return {0};
}

std::string final_json(const ParsedProblem& p, const std::string& answer,
                       const std::string& reasoning) {
    ordered_json j;
    j["evidence_ids"] = reported_evidence(p);
    j["final_answer"] = answer;
    j["reasoning"] = reasoning;
    return j.dump();
}

std::string cot_json(const ParsedProblem& p) {
    const std::string ans = mental_answer(p);
    ordered_json j;
    j["calc_chain"] = correct_expression(p) + " = " + ans + ", so the result is <" + ans + ">";
    j["evidence_ids"] = reported_evidence(p);
    j["final_answer"] = ans;
    return j.dump();
}

bool is_continuation_prompt(const std::string& content) {
    static const char* kPrefixes[] = {
        "Your previous tool result is:", "Calculator returned:", "Previous result",
        "You repeated:", "Verify in words:"};
    for (const char* prefix : kPrefixes) {
        if (content.rfind(prefix, 0) == 0) return true;
    }
    return false;
}

ChatMessage assistant_text(std::string content) {
    ChatMessage m;
    m.role = Role::Assistant;
    m.content = std::move(content);
    return m;
}

ChatMessage assistant_call(const std::string& expr, int serial) {
    ChatMessage m;
    m.role = Role::Assistant;
    ToolCall call;
    call.id = "call_" + std::to_string(serial);
    call.name = "calculate";
    call.arguments = ordered_json{{"expression", expr}}.dump();
    m.tool_calls.push_back(std::move(call));
    return m;
}

// ----- Distractor generation ------------------------------------------------

const std::vector<std::string>& generation_pool(const std::string& kind) {
    static const std::map<std::string, std::vector<std::string>> kPools = {
        {"tb",
         {"Shops often rearrange their displays for the season.",
          "Local fairs attract steady crowds in the evenings.",
          "Vendors keep their stalls tidy and well stocked.",
          "Community events can bring attention to small sellers.",
          "Window displays tend to change with the weather."}},
        {"ped",
         {"In a different town, Alice sold trinkets to someone else.",
          "Elsewhere, Mr. Smith handled a separate batch of goods.",
          "Hana ran an unrelated stall at a nearby market.",
          "In a different season, Victor traded with another crowd.",
          "Slightly elsewhere, Priya managed a separate counter."}},
        {"hu",
         {"Reportedly, the overall activity might have been brisk.",
          "Some say the season was possibly busier than usual.",
          "It is said the records might be incomplete.",
          "The pace of sales was likely steady, though unverified.",
          "Perhaps the final tallies were never officially confirmed."}},
        {"sp",
         {"The original account describes the same events in other words.",
          "The recorded details restate the earlier description of the scene.",
          "The same facts appear again, phrased differently.",
          "What happened is retold here with the wording changed.",
          "The earlier statement is repeated in an altered form."}},
    };
    return kPools.at(kind);
}

std::optional<ChatMessage> handle_generation(const ChatRequest& req) {
    const std::string& system = req.messages.front().content;
    std::string kind;
    if (system.find("IN-DOMAIN background filler") != std::string::npos) kind = "tb";
    else if (system.find("LOGICALLY EXCLUDED") != std::string::npos) kind = "ped";
    else if (system.find("epistemically UNCERTAIN") != std::string::npos) kind = "hu";
    else if (system.find("SEMANTICS-PRESERVING PARAPHRASES") != std::string::npos) kind = "sp";
    else return std::nullopt;

    // "[<exactly N short sentences>]" appears once for before and once after.
    std::vector<int> counts;
    const std::string marker = "exactly ";
    std::size_t pos = 0;
    while ((pos = system.find(marker, pos)) != std::string::npos) {
        pos += marker.size();
        const auto numerals = extract_numerals(system.substr(pos, 8));
        if (!numerals.empty()) counts.push_back(static_cast<int>(*parse_number(numerals[0])));
        if (counts.size() == 2) break;
    }
    const int before_n = counts.size() > 0 ? counts[0] : 2;
    const int after_n = counts.size() > 1 ? counts[1] : 2;

    const auto& pool = generation_pool(kind);
    const std::string user = req.messages.back().content;
    const std::size_t offset =
        static_cast<std::size_t>(md5_low64(user) % static_cast<std::uint64_t>(pool.size()));

    ordered_json j;
    j["topic"] = "general";
    ordered_json before = ordered_json::array();
    ordered_json after = ordered_json::array();
    for (int i = 0; i < before_n; ++i) before.push_back(pool[(offset + static_cast<std::size_t>(i)) % pool.size()]);
    for (int i = 0; i < after_n; ++i)
        after.push_back(pool[(offset + static_cast<std::size_t>(before_n + i)) % pool.size()]);
    j["before"] = std::move(before);
    j["after"] = std::move(after);
    return assistant_text(j.dump());
}

// ----- Solver ---------------------------------------------------------------

class DemoBackend : public Backend {
public:
    std::string name() const override { return "scripted:demo"; }

protected:
    ChatMessage complete(const ChatRequest& req) override {
        if (auto generated = handle_generation(req)) return *generated;

        // Locate the problem statement (the first user message).
        const ChatMessage* question_msg = nullptr;
        for (const ChatMessage& m : req.messages) {
            if (m.role == Role::User) {
                question_msg = &m;
                break;
            }
        }
        if (question_msg == nullptr)
            throw std::runtime_error("demo backend: no user message");
        const auto problem = parse_problem(question_msg->content);
        if (!problem)
            throw std::runtime_error("demo backend: unrecognized problem format");
        const ParsedProblem& p = *problem;

        // No tools in play: plain chain-of-thought answer (also used for the
        // FC-style condition where the schemas are present but unusable).
        bool any_tool_msg = false;
        for (const ChatMessage& m : req.messages) {
            if (m.role == Role::Tool) any_tool_msg = true;
        }
        if (req.tool_schemas.empty() || (req.tool_choice == ToolChoice::None && !any_tool_msg))
            return assistant_text(cot_json(p));

        // Segment since the last user message; its tool-message count decides
        // whether to call again or to answer.
        std::size_t last_user = 0;
        for (std::size_t i = 0; i < req.messages.size(); ++i) {
            if (req.messages[i].role == Role::User) last_user = i;
        }
        int segment_tool_msgs = 0;
        for (std::size_t i = last_user + 1; i < req.messages.size(); ++i) {
            if (req.messages[i].role == Role::Tool) ++segment_tool_msgs;
        }
        const bool continuation = is_continuation_prompt(req.messages[last_user].content);
        const std::string last_output = last_tool_output(req);
        const int serial = static_cast<int>(req.messages.size());

        if (continuation && segment_tool_msgs == 0) {
            const bool corrects = p.persona.kind == PersonaKind::WrongExprFix ||
                                  p.persona.kind == PersonaKind::WrongExprSelf;
            const bool already_corrected =
                corrects && transcript_contains_expression(req, correct_expression(p));
            if (req.tool_choice == ToolChoice::Required) {
                // Correcting personas reconsider and stick with the right
                // expression; the others re-issue their usual call.
                if (corrects) return assistant_call(correct_expression(p), serial);
                return assistant_call(first_expression(p), serial);
            }
            if (corrects && !already_corrected)
                return assistant_call(correct_expression(p), serial);
            return assistant_text(final_answer_json(p, last_output));
        }

        if (segment_tool_msgs == 0) return assistant_call(first_expression(p), serial);
        if (p.persona.kind == PersonaKind::WeakTwoCalls && total_tool_msgs(req) == 1)
            return assistant_call(wrong_expression(p), serial);
        return assistant_text(final_answer_json(p, last_output));
    }

private:
    static std::string first_expression(const ParsedProblem& p) {
        switch (p.persona.kind) {
            case PersonaKind::SelfReliant:
            case PersonaKind::ToolCopier: return correct_expression(p);
            case PersonaKind::WrongExprFix:
            case PersonaKind::WrongExprSelf: return wrong_expression(p);
            case PersonaKind::WeakOneBadCall:
            case PersonaKind::WeakTwoCalls: return malformed_expression(p);
        }
        return correct_expression(p);
    }

    static int total_tool_msgs(const ChatRequest& req) {
        int n = 0;
        for (const ChatMessage& m : req.messages) {
            if (m.role == Role::Tool) ++n;
        }
        return n;
    }

    static std::string last_tool_output(const ChatRequest& req) {
        std::string out;
        for (const ChatMessage& m : req.messages) {
            if (m.role == Role::Tool) out = m.content;
        }
        return out;
    }

    static bool transcript_contains_expression(const ChatRequest& req, const std::string& expr) {
        for (const ChatMessage& m : req.messages) {
            for (const ToolCall& call : m.tool_calls) {
                if (call.arguments.find(expr) != std::string::npos) return true;
            }
        }
        return false;
    }

    static std::string final_answer_json(const ParsedProblem& p, const std::string& last_output) {
        const auto numeric_output = parse_number(last_output);
        std::string answer;
        switch (p.persona.kind) {
            case PersonaKind::SelfReliant:
                answer = mental_answer(p);
                break;
            case PersonaKind::ToolCopier:
            case PersonaKind::WrongExprFix:
                answer = numeric_output ? num(*numeric_output) : "unknown";
                break;
            case PersonaKind::WrongExprSelf:
                answer = numeric_output ? num(*numeric_output) : mental_answer(p);
                break;
            case PersonaKind::WeakOneBadCall:
                answer = mental_answer(p);
                break;
            case PersonaKind::WeakTwoCalls:
                answer = numeric_output ? num(*numeric_output) : mental_answer(p);
                break;
        }
        const std::string reasoning = "used chunks with the key figures " + num(p.a) + " and " +
                                      num(p.b) + "; tool said " +
                                      (last_output.empty() ? "nothing" : last_output);
        return final_json(p, answer, reasoning);
    }
};

}  // namespace

std::unique_ptr<Backend> make_demo_backend() {
    return std::make_unique<DemoBackend>();
}

}  // namespace toolgap
