#include "toolgap/toolbox.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "toolgap/expr.hpp"
#include "toolgap/text.hpp"

namespace toolgap {

using nlohmann::json;

std::string to_string(ToolErrorKind k) {
    switch (k) {
        case ToolErrorKind::ParseError: return "parse_error";
        case ToolErrorKind::DivZero: return "div_zero";
        case ToolErrorKind::UnknownTool: return "unknown_tool";
        case ToolErrorKind::BadArgs: return "bad_args";
        case ToolErrorKind::Stubbed: return "stubbed";
    }
    return "bad_args";
}

std::string to_string(Comparison c) {
    switch (c) {
        case Comparison::Less: return "less";
        case Comparison::Equal: return "equal";
        case Comparison::Greater: return "greater";
        case Comparison::Incomparable: return "incomparable";
    }
    return "incomparable";
}

std::vector<ToolSchema> tool_schemas_for(Task task) {
    std::vector<ToolSchema> schemas;
    schemas.push_back(
        {kCalculateTool,
         "Evaluate an arithmetic expression with + - * / and parentheses.",
         json{{"type", "object"},
              {"properties", {{"expression", {{"type", "string"}}}}},
              {"required", json::array({"expression"})}}});
    if (task == Task::HotPotQA) {
        schemas.push_back(
            {kSearchTool,
             "Rank context sentences by lexical overlap with a query.",
             json{{"type", "object"},
                  {"properties",
                   {{"query", {{"type", "string"}}}, {"top_k", {{"type", "integer"}}}}},
                  {"required", json::array({"query", "top_k"})}}});
        schemas.push_back(
            {kReadTool,
             "Return the verbatim text of the requested sentence ids.",
             json{{"type", "object"},
                  {"properties",
                   {{"ids", {{"type", "array"}, {"items", {{"type", "integer"}}}}}}},
                  {"required", json::array({"ids"})}}});
        schemas.push_back(
            {kCompareTool,
             "Compare two values numerically, falling back to string equality.",
             json{{"type", "object"},
                  {"properties", {{"a", {{"type", "string"}}}, {"b", {{"type", "string"}}}}},
                  {"required", json::array({"a", "b"})}}});
    }
    return schemas;
}

std::vector<int> search_sentences(const std::string& query, const std::vector<Chunk>& chunks,
                                  int top_k) {
    const std::vector<std::string> query_tokens = tokenize(query);
    std::set<std::string> distinct(query_tokens.begin(), query_tokens.end());
    if (distinct.empty() || top_k < 1) return {};

    // Document frequency over the sample's chunks for rare-token weighting.
    std::map<std::string, int> df;
    for (const Chunk& ch : chunks) {
        const std::vector<std::string> toks = tokenize(ch.text);
        const std::set<std::string> uniq(toks.begin(), toks.end());
        for (const auto& t : uniq) df[t] += 1;
    }

    std::vector<std::pair<double, int>> scored;
    for (const Chunk& ch : chunks) {
        const std::vector<std::string> toks = tokenize(ch.text);
        const std::set<std::string> uniq(toks.begin(), toks.end());
        double score = 0.0;
        for (const auto& t : distinct) {
            if (uniq.count(t)) score += 1.0 / static_cast<double>(df[t]);
        }
        if (score > 0.0) scored.emplace_back(score, ch.id);
    }
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });

    std::vector<int> ids;
    for (const auto& [score, id] : scored) {
        if (static_cast<int>(ids.size()) >= top_k) break;
        ids.push_back(id);
    }
    return ids;
}

Comparison compare_values(const std::string& a, const std::string& b) {
    const auto na = parse_number(a);
    const auto nb = parse_number(b);
    if (na && nb) {
        if (numeric_equal(*na, *nb, 1e-9)) return Comparison::Equal;
        return *na < *nb ? Comparison::Less : Comparison::Greater;
    }
    if (to_lower(trim(a)) == to_lower(trim(b))) return Comparison::Equal;
    return Comparison::Incomparable;
}

namespace {

ToolResult fail(const std::string& call_id, ToolErrorKind kind) {
    ToolResult r;
    r.call_id = call_id;
    r.ok = false;
    r.error_kind = kind;
    return r;
}

ToolResult succeed(const std::string& call_id, std::string output) {
    ToolResult r;
    r.call_id = call_id;
    r.ok = true;
    r.output = std::move(output);
    return r;
}

ToolResult run_calculate(const ToolCall& call, const json& args) {
    if (!args.contains("expression") || !args["expression"].is_string())
        return fail(call.id, ToolErrorKind::BadArgs);
    try {
        return succeed(call.id, format_number(eval_expression(args["expression"].get<std::string>())));
    } catch (const DivZeroError&) {
        return fail(call.id, ToolErrorKind::DivZero);
    } catch (const ExprParseError&) {
        return fail(call.id, ToolErrorKind::ParseError);
    }
}

ToolResult run_search(const ToolCall& call, const json& args, const std::vector<Chunk>& chunks) {
    if (!args.contains("query") || !args["query"].is_string() || !args.contains("top_k") ||
        !args["top_k"].is_number_integer() || args["top_k"].get<int>() < 1)
        return fail(call.id, ToolErrorKind::BadArgs);
    const auto ids = search_sentences(args["query"].get<std::string>(), chunks,
                                      args["top_k"].get<int>());
    return succeed(call.id, json(ids).dump());
}

ToolResult run_read(const ToolCall& call, const json& args, const std::vector<Chunk>& chunks) {
    if (!args.contains("ids") || !args["ids"].is_array())
        return fail(call.id, ToolErrorKind::BadArgs);
    std::string out;
    int dropped = 0;
    for (const json& jid : args["ids"]) {
        if (!jid.is_number_integer()) return fail(call.id, ToolErrorKind::BadArgs);
        const int id = jid.get<int>();
        if (id < 0 || id >= static_cast<int>(chunks.size())) {
            ++dropped;
            continue;
        }
        if (!out.empty()) out += "\n";
        out += std::to_string(id) + ": " + chunks[static_cast<std::size_t>(id)].text;
    }
    if (dropped > 0)
        out += (out.empty() ? "" : "\n") + std::string("warning: dropped ") +
               std::to_string(dropped) + " out-of-range id(s)";
    return succeed(call.id, std::move(out));
}

ToolResult run_compare(const ToolCall& call, const json& args) {
    if (!args.contains("a") || !args.contains("b")) return fail(call.id, ToolErrorKind::BadArgs);
    const auto as_text = [](const json& v) {
        return v.is_string() ? v.get<std::string>() : v.dump();
    };
    return succeed(call.id, to_string(compare_values(as_text(args["a"]), as_text(args["b"]))));
}

}  // namespace

ToolResult dispatch_tool(const ToolCall& call, const std::vector<Chunk>& chunks,
                         const ToolMode& mode) {
    if (mode.mode == ToolModeKind::Noop) {
        ToolResult r = succeed(call.id, kNoopStubOutput);
        r.error_kind = ToolErrorKind::Stubbed;
        return r;
    }
    if (mode.mode == ToolModeKind::OracleCalc && call.name == kCalculateTool) {
        return succeed(call.id, mode.gold_answer.value());
    }

    json args;
    try {
        args = json::parse(call.arguments.empty() ? "{}" : call.arguments);
    } catch (const std::exception&) {
        return fail(call.id, ToolErrorKind::BadArgs);
    }
    if (!args.is_object()) return fail(call.id, ToolErrorKind::BadArgs);

    if (call.name == kCalculateTool) return run_calculate(call, args);
    if (call.name == kSearchTool) return run_search(call, args, chunks);
    if (call.name == kReadTool) return run_read(call, args, chunks);
    if (call.name == kCompareTool) return run_compare(call, args);
    return fail(call.id, ToolErrorKind::UnknownTool);
}

std::string render_tool_message(const ToolResult& result) {
    if (result.ok) return result.output;
    return "error: " + to_string(*result.error_kind);
}

}  // namespace toolgap
