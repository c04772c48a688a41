#pragma once

#include <optional>
#include <string>
#include <vector>

#include "toolgap/backend.hpp"
#include "toolgap/corpus.hpp"

namespace toolgap {

enum class ToolErrorKind { ParseError, DivZero, UnknownTool, BadArgs, Stubbed };
std::string to_string(ToolErrorKind k);

struct ToolResult {
    std::string call_id;
    bool ok = false;
    std::string output;
    std::optional<ToolErrorKind> error_kind;
};

enum class ToolModeKind { Real, Noop, OracleCalc };

struct ToolMode {
    ToolModeKind mode = ToolModeKind::Real;
    std::optional<std::string> gold_answer;  // required for OracleCalc

    static ToolMode real() { return {ToolModeKind::Real, std::nullopt}; }
    static ToolMode noop() { return {ToolModeKind::Noop, std::nullopt}; }
    static ToolMode oracle_calc(std::string gold) {
        return {ToolModeKind::OracleCalc, std::move(gold)};
    }
};

// Fixed output of every call under the no-op stub. Deliberately non-numeric so
// it cannot leak a pseudo-answer.
inline constexpr const char* kNoopStubOutput = "ok (no result)";

inline constexpr const char* kCalculateTool = "calculate";
inline constexpr const char* kSearchTool = "search_sentences";
inline constexpr const char* kReadTool = "read_sentences";
inline constexpr const char* kCompareTool = "compare_values";

// GSM8K gets only the calculator; HotPotQA adds search/read/compare.
std::vector<ToolSchema> tool_schemas_for(Task task);

// Chunk ids ranked by descending lexical overlap with the query (case-folded
// tokens, rare tokens weighted up), ties broken by ascending id, at most
// top_k entries.
std::vector<int> search_sentences(const std::string& query, const std::vector<Chunk>& chunks,
                                  int top_k);

enum class Comparison { Less, Equal, Greater, Incomparable };
std::string to_string(Comparison c);

// Numeric comparison when both sides parse (tolerance 1e-9), otherwise
// case-folded string equality vs incomparable.
Comparison compare_values(const std::string& a, const std::string& b);

// Routes one tool call. Noop mode answers every call with the stub string;
// oracle mode rewrites calculator outputs with the gold answer and leaves the
// other tools real.
ToolResult dispatch_tool(const ToolCall& call, const std::vector<Chunk>& chunks,
                         const ToolMode& mode);

// What the model sees for a result: the output, or "error: <kind>".
std::string render_tool_message(const ToolResult& result);

}  // namespace toolgap
