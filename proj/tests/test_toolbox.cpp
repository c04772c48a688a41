#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>

#include "toolgap/rng.hpp"
#include "toolgap/text.hpp"
#include "toolgap/toolbox.hpp"

using namespace toolgap;

namespace {

std::vector<Chunk> natalia_chunks() {
    return {
        {0, "Sales can fluctuate from month to month.", ChunkRole::Noise},
        {1, "Tracking sales helps in understanding trends.", ChunkRole::Noise},
        {2,
         "Natalia sold clips to 48 of her friends in April, and then she sold half as many "
         "clips in May.",
         ChunkRole::Evidence},
        {3, "Analyzing sales data can reveal patterns.", ChunkRole::Noise},
        {4, "Effective strategies can boost future sales.", ChunkRole::Noise},
    };
}

ToolCall calc_call(const std::string& expr, const std::string& id = "c1") {
    return {id, kCalculateTool, nlohmann::json{{"expression", expr}}.dump()};
}

// Brute-force reference: the documented scoring recomputed independently.
std::vector<int> search_oracle(const std::string& query, const std::vector<Chunk>& chunks,
                               int top_k) {
    std::map<std::string, int> df;
    for (const Chunk& ch : chunks) {
        std::set<std::string> uniq;
        for (const auto& t : tokenize(ch.text)) uniq.insert(t);
        for (const auto& t : uniq) df[t] += 1;
    }
    std::set<std::string> q;
    for (const auto& t : tokenize(query)) q.insert(t);
    std::vector<std::pair<double, int>> scored;
    for (const Chunk& ch : chunks) {
        std::set<std::string> uniq;
        for (const auto& t : tokenize(ch.text)) uniq.insert(t);
        double score = 0;
        for (const auto& t : q)
            if (uniq.count(t)) score += 1.0 / df[t];
        if (score > 0) scored.push_back({score, ch.id});
    }
    std::sort(scored.begin(), scored.end(), [](auto& a, auto& b) {
        return a.first != b.first ? a.first > b.first : a.second < b.second;
    });
    std::vector<int> ids;
    for (auto& [s, id] : scored) {
        if ((int)ids.size() >= top_k) break;
        ids.push_back(id);
    }
    return ids;
}

}  // namespace

TEST_CASE("search finds the evidence sentence first") {
    const auto ids = search_sentences("clips April", natalia_chunks(), 3);
    REQUIRE(!ids.empty());
    CHECK(ids.front() == 2);
}

TEST_CASE("search agrees with the brute-force oracle on random queries") {
    const auto chunks = natalia_chunks();
    const std::vector<std::string> vocab = {"sales", "clips",  "april", "month", "trends",
                                            "data",  "future", "half",  "boost", "natalia"};
    Rng rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        std::string query;
        const int len = 1 + static_cast<int>(rng.uniform_below(4));
        for (int i = 0; i < len; ++i) {
            if (i) query += " ";
            query += vocab[rng.uniform_below(vocab.size())];
        }
        const int top_k = 1 + static_cast<int>(rng.uniform_below(6));
        CHECK(search_sentences(query, chunks, top_k) == search_oracle(query, chunks, top_k));
    }
}

TEST_CASE("search edge cases") {
    CHECK(search_sentences("", natalia_chunks(), 3).empty());
    const auto all = search_sentences("sales clips month trends data", natalia_chunks(), 99);
    CHECK(all.size() == 5);
}

TEST_CASE("search ranking is invariant to chunk storage order") {
    auto chunks = natalia_chunks();
    const auto expected = search_sentences("sales month", chunks, 5);
    std::reverse(chunks.begin(), chunks.end());
    CHECK(search_sentences("sales month", chunks, 5) == expected);
}

TEST_CASE("compare_values") {
    CHECK(compare_values("24", "72") == Comparison::Less);
    CHECK(compare_values("72", "72.0") == Comparison::Equal);
    CHECK(compare_values("100", "72") == Comparison::Greater);
    CHECK(compare_values("Paris", "72") == Comparison::Incomparable);
    CHECK(compare_values("Paris", "paris") == Comparison::Equal);
}

TEST_CASE("dispatch real calculator") {
    const auto chunks = natalia_chunks();
    const ToolResult r1 = dispatch_tool(calc_call("48/2"), chunks, ToolMode::real());
    CHECK(r1.ok);
    CHECK(r1.output == "24");
    CHECK_FALSE(r1.error_kind.has_value());

    const ToolResult r2 = dispatch_tool(calc_call("1/0"), chunks, ToolMode::real());
    CHECK_FALSE(r2.ok);
    CHECK(r2.output.empty());
    CHECK(r2.error_kind == ToolErrorKind::DivZero);

    const ToolResult r3 = dispatch_tool(calc_call("4+*2"), chunks, ToolMode::real());
    CHECK(r3.error_kind == ToolErrorKind::ParseError);
}

TEST_CASE("dispatch noop stubs every call identically") {
    const auto chunks = natalia_chunks();
    const ToolResult a = dispatch_tool(calc_call("48/2"), chunks, ToolMode::noop());
    const ToolResult b = dispatch_tool(calc_call("garbage $$"), chunks, ToolMode::noop());
    const ToolResult c =
        dispatch_tool({"x", "nonexistent_tool", "{}"}, chunks, ToolMode::noop());
    for (const ToolResult* r : {&a, &b, &c}) {
        CHECK(r->ok);
        CHECK(r->output == kNoopStubOutput);
        CHECK(r->error_kind == ToolErrorKind::Stubbed);
    }
}

TEST_CASE("oracle calculator returns the gold answer verbatim") {
    const auto chunks = natalia_chunks();
    const ToolResult r = dispatch_tool(calc_call("anything"), chunks, ToolMode::oracle_calc("72"));
    CHECK(r.ok);
    CHECK(r.output == "72");
    // Non-calculator tools stay real under the oracle mode.
    const ToolCall search{"s1", kSearchTool,
                          nlohmann::json{{"query", "clips April"}, {"top_k", 1}}.dump()};
    const ToolResult rs = dispatch_tool(search, chunks, ToolMode::oracle_calc("72"));
    CHECK(rs.ok);
    CHECK(rs.output == "[2]");
}

TEST_CASE("unknown tool and bad arguments") {
    const auto chunks = natalia_chunks();
    CHECK(dispatch_tool({"x", "frobnicate", "{}"}, chunks, ToolMode::real()).error_kind ==
          ToolErrorKind::UnknownTool);
    CHECK(dispatch_tool({"x", kCalculateTool, "not json"}, chunks, ToolMode::real()).error_kind ==
          ToolErrorKind::BadArgs);
    CHECK(dispatch_tool({"x", kCalculateTool, R"({"expression": 5})"}, chunks, ToolMode::real())
              .error_kind == ToolErrorKind::BadArgs);
    CHECK(dispatch_tool({"x", kSearchTool, R"({"query":"a","top_k":0})"}, chunks,
                        ToolMode::real())
              .error_kind == ToolErrorKind::BadArgs);
}

TEST_CASE("read_sentences drops out-of-range ids with a warning") {
    const auto chunks = natalia_chunks();
    const ToolCall call{"r1", kReadTool, nlohmann::json{{"ids", {2, 9}}}.dump()};
    const ToolResult r = dispatch_tool(call, chunks, ToolMode::real());
    CHECK(r.ok);
    CHECK(r.output.find("2: Natalia sold clips") != std::string::npos);
    CHECK(r.output.find("warning: dropped 1 out-of-range id(s)") != std::string::npos);
}

TEST_CASE("toolset depends on the task") {
    CHECK(tool_schemas_for(Task::GSM8K).size() == 1);
    CHECK(tool_schemas_for(Task::HotPotQA).size() == 4);
}

TEST_CASE("failed results render as error messages") {
    ToolResult r;
    r.ok = false;
    r.error_kind = ToolErrorKind::ParseError;
    CHECK(render_tool_message(r) == "error: parse_error");
}
