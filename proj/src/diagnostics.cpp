#include "toolgap/diagnostics.hpp"

#include <stdexcept>

#include "toolgap/text.hpp"

namespace toolgap {

double evidence_f1(const std::set<int>& pred_ids, const std::set<int>& gold_ids) {
    if (pred_ids.empty() && gold_ids.empty()) return 1.0;
    if (pred_ids.empty() || gold_ids.empty()) return 0.0;
    int hits = 0;
    for (int id : pred_ids) {
        if (gold_ids.count(id)) ++hits;
    }
    if (hits == 0) return 0.0;
    const double precision = static_cast<double>(hits) / static_cast<double>(pred_ids.size());
    const double recall = static_cast<double>(hits) / static_cast<double>(gold_ids.size());
    return 2.0 * precision * recall / (precision + recall);
}

DeltaReport decompose_gap(const std::map<Condition, Rational>& acc) {
    const auto get = [&](Condition c) -> const Rational& {
        auto it = acc.find(c);
        if (it == acc.end())
            throw std::runtime_error("decompose_gap: missing condition " + to_string(c));
        return it->second;
    };
    const Rational& cot = get(Condition::NoToolCoT);
    const Rational& fcstyle = get(Condition::NoToolFCStyle);
    const Rational& noop = get(Condition::AgentNoopTool);
    const Rational& full = get(Condition::AgentFull);

    DeltaReport r;
    r.d_sty = fcstyle - cot;
    r.d_frc = noop - fcstyle;
    r.d_cmp = full - noop;
    r.net = full - cot;
    r.identity_residual = r.net - (r.d_cmp + r.d_frc + r.d_sty);

    if (auto it = acc.find(Condition::AgentOracleCalc); it != acc.end())
        r.d_oracle = it->second - full;
    if (auto it = acc.find(Condition::AgentOracleEvid); it != acc.end())
        r.d_context = it->second - full;
    if (auto it = acc.find(Condition::AgentMax1Turn); it != acc.end())
        r.d_turn = full - it->second;
    return r;
}

std::string to_string(AttributionCategory c) {
    switch (c) {
        case AttributionCategory::Genuine: return "Genuine";
        case AttributionCategory::StyLoss: return "StyLoss";
        case AttributionCategory::FrcLoss: return "FrcLoss";
        case AttributionCategory::CmpLoss: return "CmpLoss";
    }
    return "Genuine";
}

AttributionCategory attribute_sample(bool cot, bool fcstyle, bool noop, bool full) {
    if (full) throw std::runtime_error("attribute_sample: only incorrect Agent-Full samples");
    if (!cot) return AttributionCategory::Genuine;
    if (!fcstyle) return AttributionCategory::StyLoss;
    if (!noop) return AttributionCategory::FrcLoss;
    return AttributionCategory::CmpLoss;
}

std::string to_string(FailureType t) {
    switch (t) {
        case FailureType::A: return "A";
        case FailureType::B: return "B";
        case FailureType::C: return "C";
        case FailureType::D: return "D";
        case FailureType::E: return "E";
        case FailureType::F: return "F";
    }
    return "F";
}

std::string failure_type_label(FailureType t) {
    switch (t) {
        case FailureType::A: return "under-computation";
        case FailureType::B: return "tool-execution error";
        case FailureType::C: return "evidence drift";
        case FailureType::D: return "integration failure";
        case FailureType::E: return "no successful output";
        case FailureType::F: return "planning mismatch";
    }
    return "planning mismatch";
}

FailureType classify_failure(const Trajectory& traj, const SampleScore& score,
                             std::optional<int> gold_step_count) {
    if (score.correct)
        throw std::runtime_error("classify_failure: trajectory is not a failure");
    if (!is_agent_condition(traj.condition))
        throw std::runtime_error("classify_failure: not an agent trajectory");

    int successful = 0;
    bool any_failed = false;
    const std::string* last_ok_output = nullptr;
    for (const auto& [call, result] : traj.tool_calls) {
        if (result.ok) {
            ++successful;
            last_ok_output = &result.output;
        } else {
            any_failed = true;
        }
    }
    const int required = gold_step_count.value_or(1);

    if (successful < required) return FailureType::A;
    if (any_failed) return FailureType::B;
    if (score.evidence_f1 < 0.5) return FailureType::C;
    if (last_ok_output != nullptr && values_equal(*last_ok_output, traj.gold_answer, 1e-6))
        return FailureType::D;
    if (successful == 0) return FailureType::E;
    return FailureType::F;
}

namespace {

struct ChainRow {
    std::optional<bool> cot, fcstyle, noop, full;
    bool complete() const { return cot && fcstyle && noop && full; }
};

std::map<std::string, ChainRow> collect_chain(const ResultSet& results) {
    std::map<std::string, ChainRow> chain;
    for (const ResultRow& row : results.rows) {
        const std::string key = row.question_id + "|" + to_string(row.variant);
        ChainRow& c = chain[key];
        if (row.condition == to_string(Condition::NoToolCoT)) c.cot = row.correct;
        else if (row.condition == to_string(Condition::NoToolFCStyle)) c.fcstyle = row.correct;
        else if (row.condition == to_string(Condition::AgentNoopTool)) c.noop = row.correct;
        else if (row.condition == to_string(Condition::AgentFull)) c.full = row.correct;
    }
    return chain;
}

}  // namespace

OverlapReport capability_overlap(const ResultSet& results) {
    OverlapReport report;
    for (const auto& [key, c] : collect_chain(results)) {
        if (!c.full || !c.noop || !c.cot) continue;
        if (*c.full && !*c.noop) {
            ++report.tool_benefited;
            if (*c.cot) ++report.cot_solved;
        }
    }
    if (report.tool_benefited > 0)
        report.ratio_percent = Rational::percent(report.cot_solved, report.tool_benefited);
    return report;
}

CrossTab cross_tabulate(const std::map<std::string, AttributionCategory>& attrs,
                        const std::map<std::string, FailureType>& types) {
    if (attrs.size() != types.size())
        throw std::runtime_error("cross_tabulate: key sets differ in size");
    std::map<FailureType, std::array<int, 4>> counts;
    for (const auto& [key, type] : types) {
        auto it = attrs.find(key);
        if (it == attrs.end()) throw std::runtime_error("cross_tabulate: missing key " + key);
        counts[type][static_cast<std::size_t>(it->second)] += 1;
    }

    CrossTab tab;
    for (const auto& [type, row_counts] : counts) {
        CrossTab::Row row;
        row.count = row_counts[0] + row_counts[1] + row_counts[2] + row_counts[3];
        for (std::size_t i = 0; i < 4; ++i)
            row.percent[i] = Rational::percent(row_counts[i], row.count);
        tab.rows[type] = std::move(row);
    }
    return tab;
}

GapClosure gap_closure(const Rational& full, const Rational& gated, const Rational& critic,
                       const Rational& cot) {
    if (cot == full) throw std::runtime_error("gap_closure: zero gap");
    GapClosure g;
    g.gap = full - cot;
    const Rational best = gated > critic ? gated : critic;
    g.closure_percent = (best - full) / (cot - full) * Rational::from_int(100);
    return g;
}

AccuracyTable accuracy_table(const ResultSet& results) {
    AccuracyTable table;
    for (const ResultRow& row : results.rows) {
        for (const std::optional<Variant> key :
             {std::optional<Variant>(row.variant), std::optional<Variant>()}) {
            AccuracyCell& cell = table[row.condition][key];
            cell.total += 1;
            if (row.correct) cell.correct += 1;
            cell.evidence_f1_sum += row.evidence_f1;
            cell.tool_calls_sum += row.tool_calls;
        }
    }
    return table;
}

std::map<Condition, Rational> overall_accuracy(const ResultSet& results,
                                               const std::vector<Condition>& conds) {
    std::map<Condition, Rational> acc;
    for (Condition cond : conds) {
        int correct = 0;
        int total = 0;
        for (const ResultRow& row : results.rows) {
            if (row.condition != to_string(cond)) continue;
            ++total;
            if (row.correct) ++correct;
        }
        if (total == 0) throw std::runtime_error("no rows for condition " + to_string(cond));
        acc[cond] = Rational::percent(correct, total);
    }
    return acc;
}

Rational AttributionReport::percent(AttributionCategory c) const {
    auto it = counts.find(c);
    const int n = it == counts.end() ? 0 : it->second;
    return Rational::percent(n, n_wrong);
}

Rational AttributionReport::proto_percent() const {
    return percent(AttributionCategory::StyLoss) + percent(AttributionCategory::FrcLoss) +
           percent(AttributionCategory::CmpLoss);
}

AttributionReport attribute_results(const ResultSet& results) {
    AttributionReport report;
    for (const auto& [key, attr] : attribution_by_key(results)) {
        ++report.n_wrong;
        report.counts[attr] += 1;
    }
    return report;
}

std::map<std::string, AttributionCategory> attribution_by_key(const ResultSet& results) {
    std::map<std::string, AttributionCategory> out;
    for (const auto& [key, c] : collect_chain(results)) {
        if (!c.complete() || *c.full) continue;
        out.emplace(key, attribute_sample(*c.cot, *c.fcstyle, *c.noop, *c.full));
    }
    return out;
}

}  // namespace toolgap
