#pragma once

#include <array>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "toolgap/harness.hpp"
#include "toolgap/rational.hpp"

namespace toolgap {

struct SampleScore {
    bool correct = false;
    double evidence_f1 = 0.0;
    int tool_calls = 0;
};

// Set F1 between predicted and gold evidence ids. Both empty -> 1, predicted
// empty against non-empty gold -> 0.
double evidence_f1(const std::set<int>& pred_ids, const std::set<int>& gold_ids);

// Signed percentage deltas along the degradation chain, carried as exact
// rationals so the additive identity holds to the last bit.
struct DeltaReport {
    Rational d_sty;  // FCStyle - CoT
    Rational d_frc;  // NoopTool - FCStyle
    Rational d_cmp;  // Full - NoopTool
    Rational net;    // Full - CoT
    std::optional<Rational> d_oracle;   // OracleCalc - Full
    std::optional<Rational> d_context;  // OracleEvid - Full
    std::optional<Rational> d_turn;     // Full - Max1Turn
    Rational identity_residual;         // net - (d_cmp + d_frc + d_sty)
};

// acc maps condition -> accuracy percent. CoT/FCStyle/NoopTool/Full are
// required; the oracle and turn probes are optional.
DeltaReport decompose_gap(const std::map<Condition, Rational>& acc);

// Earliest stage on the chain at which an incorrect Agent-Full sample became
// unsolved.
enum class AttributionCategory { Genuine, StyLoss, FrcLoss, CmpLoss };
std::string to_string(AttributionCategory c);

// Preconditions: full == false.
AttributionCategory attribute_sample(bool cot, bool fcstyle, bool noop, bool full);

// Trajectory failure symptoms in fixed priority order A > B > C > D > E > F.
enum class FailureType { A, B, C, D, E, F };
std::string to_string(FailureType t);
std::string failure_type_label(FailureType t);

// Preconditions: score.correct == false and traj from an agent condition.
// required steps default to 1 when gold_step_count is absent.
FailureType classify_failure(const Trajectory& traj, const SampleScore& score,
                             std::optional<int> gold_step_count);

struct OverlapReport {
    int tool_benefited = 0;  // Full correct, NoopTool wrong
    int cot_solved = 0;      // subset of the above also solved by CoT
    std::optional<Rational> ratio_percent;  // absent when no tool-benefited samples
};

// Requires Full/NoopTool/CoT rows for the shared keys.
OverlapReport capability_overlap(const ResultSet& results);

// Row-percentage cross-tabulation of failure type x attribution category.
struct CrossTab {
    struct Row {
        int count = 0;
        std::array<Rational, 4> percent;  // Genuine, StyLoss, FrcLoss, CmpLoss
    };
    std::map<FailureType, Row> rows;
};

CrossTab cross_tabulate(const std::map<std::string, AttributionCategory>& attrs,
                        const std::map<std::string, FailureType>& types);

struct GapClosure {
    Rational gap;              // full - cot
    Rational closure_percent;  // recovered fraction of the gap, best of gate/critic
};

// Preconditions: cot != full.
GapClosure gap_closure(const Rational& full, const Rational& gated, const Rational& critic,
                       const Rational& cot);

// Aggregations over a ResultSet, keyed the way the report tables need them.

struct AccuracyCell {
    int correct = 0;
    int total = 0;
    double evidence_f1_sum = 0.0;
    int tool_calls_sum = 0;

    Rational accuracy_percent() const { return Rational::percent(correct, total); }
    double mean_evidence_f1() const { return total ? evidence_f1_sum / total : 0.0; }
    double avg_calls() const { return total ? static_cast<double>(tool_calls_sum) / total : 0.0; }
};

// (condition, variant) cells plus a per-condition overall cell under
// variant=nullopt.
using AccuracyTable = std::map<std::string, std::map<std::optional<Variant>, AccuracyCell>>;
AccuracyTable accuracy_table(const ResultSet& results);

// Overall accuracy percent per condition; throws if a condition is missing.
std::map<Condition, Rational> overall_accuracy(const ResultSet& results,
                                               const std::vector<Condition>& conds);

struct AttributionReport {
    int n_wrong = 0;  // incorrect Agent-Full samples
    std::map<AttributionCategory, int> counts;
    Rational percent(AttributionCategory c) const;
    Rational proto_percent() const;  // StyLoss + FrcLoss + CmpLoss
};

// Attributes every incorrect Agent-Full key that has all four chain rows.
AttributionReport attribute_results(const ResultSet& results);

// Per-key attribution map for cross-tabulation (key = question_id|variant).
std::map<std::string, AttributionCategory> attribution_by_key(const ResultSet& results);

}  // namespace toolgap
