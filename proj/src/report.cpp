#include "toolgap/report.hpp"

#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "toolgap/text.hpp"

namespace toolgap {

using ordered_json = nlohmann::ordered_json;

namespace {

ordered_json rational_cell(const Rational& r, int decimals) {
    ordered_json j;
    j["value"] = r.to_double();
    j["display"] = r.to_fixed(decimals);
    return j;
}

const std::vector<Condition> kAllConditions = {
    Condition::NoToolCoT,      Condition::NoToolFCStyle, Condition::AgentNoopTool,
    Condition::AgentFull,      Condition::AgentMax1Turn, Condition::AgentOracleCalc,
    Condition::AgentOracleEvid};

ordered_json delta_to_json(const DeltaReport& d) {
    ordered_json j;
    j["d_cmp"] = rational_cell(d.d_cmp, 2);
    j["d_frc"] = rational_cell(d.d_frc, 2);
    j["d_sty"] = rational_cell(d.d_sty, 2);
    j["net"] = rational_cell(d.net, 2);
    j["identity_residual"] = d.identity_residual.to_double();
    if (d.d_oracle) j["d_oracle"] = rational_cell(*d.d_oracle, 2);
    if (d.d_context) j["d_context"] = rational_cell(*d.d_context, 2);
    if (d.d_turn) j["d_turn"] = rational_cell(*d.d_turn, 2);
    return j;
}

double round_to(double v, int decimals) {
    double scale = 1.0;
    for (int i = 0; i < decimals; ++i) scale *= 10.0;
    return std::round(v * scale) / scale;
}

}  // namespace

ordered_json build_report(const ResultSet& results, const std::vector<Trajectory>& trajectories,
                          const ordered_json& metadata) {
    ordered_json report;
    report["metadata"] = metadata;

    // Accuracy / Evidence-F1 / AvgCalls per condition and variant.
    const AccuracyTable table = accuracy_table(results);
    ordered_json acc = ordered_json::array();
    for (const auto& [condition, by_variant] : table) {
        for (const auto& [variant, cell] : by_variant) {
            ordered_json row;
            row["condition"] = condition;
            row["variant"] = variant ? to_string(*variant) : "Overall";
            row["n"] = cell.total;
            row["accuracy"] = rational_cell(cell.accuracy_percent(), 2);
            row["evidence_f1"] = round_to(100.0 * cell.mean_evidence_f1(), 2);
            row["avg_calls"] = round_to(cell.avg_calls(), 2);
            acc.push_back(std::move(row));
        }
    }
    report["accuracy"] = std::move(acc);

    // Delta decomposition over overall accuracies, when the chain is present.
    std::map<Condition, Rational> overall;
    for (Condition cond : kAllConditions) {
        auto it = table.find(to_string(cond));
        if (it == table.end()) continue;
        overall[cond] = it->second.at(std::nullopt).accuracy_percent();
    }
    const bool has_chain =
        overall.count(Condition::NoToolCoT) && overall.count(Condition::NoToolFCStyle) &&
        overall.count(Condition::AgentNoopTool) && overall.count(Condition::AgentFull);
    if (has_chain) {
        report["delta"] = delta_to_json(decompose_gap(overall));
    }

    // Sample-level attribution.
    const AttributionReport attr = attribute_results(results);
    if (attr.n_wrong > 0) {
        ordered_json j;
        j["n_wrong"] = attr.n_wrong;
        for (AttributionCategory c :
             {AttributionCategory::Genuine, AttributionCategory::StyLoss,
              AttributionCategory::FrcLoss, AttributionCategory::CmpLoss}) {
            ordered_json cell = rational_cell(attr.percent(c), 1);
            auto it = attr.counts.find(c);
            cell["count"] = it == attr.counts.end() ? 0 : it->second;
            j[to_string(c)] = std::move(cell);
        }
        j["Proto"] = rational_cell(attr.proto_percent(), 1);
        report["attribution"] = std::move(j);
    }

    // Failure classification per agent condition, plus the AgentFull cross-tab.
    std::map<std::string, const ResultRow*> row_by_key;
    for (const ResultRow& row : results.rows)
        row_by_key[row.question_id + "|" + to_string(row.variant) + "|" + row.condition] = &row;

    std::map<std::string, std::map<FailureType, int>> failure_counts;
    std::map<std::string, int> failure_totals;
    std::map<std::string, FailureType> full_failure_types;
    for (const Trajectory& t : trajectories) {
        if (!is_agent_condition(t.condition) || t.failed) continue;
        const std::string cond = to_string(t.condition);
        const auto it = row_by_key.find(t.question_id + "|" + to_string(t.variant) + "|" + cond);
        if (it == row_by_key.end() || it->second->correct) continue;
        SampleScore score{it->second->correct, it->second->evidence_f1, it->second->tool_calls};
        const FailureType type = classify_failure(t, score, t.gold_step_count);
        failure_counts[cond][type] += 1;
        failure_totals[cond] += 1;
        if (t.condition == Condition::AgentFull)
            full_failure_types[t.question_id + "|" + to_string(t.variant)] = type;
    }
    if (!failure_counts.empty()) {
        ordered_json dist = ordered_json::array();
        for (const auto& [cond, counts] : failure_counts) {
            ordered_json row;
            row["condition"] = cond;
            row["n_failures"] = failure_totals[cond];
            for (FailureType ft : {FailureType::A, FailureType::B, FailureType::C, FailureType::D,
                                   FailureType::E, FailureType::F}) {
                auto it = counts.find(ft);
                const int n = it == counts.end() ? 0 : it->second;
                row[to_string(ft)] =
                    rational_cell(Rational::percent(n, failure_totals[cond]), 1);
            }
            dist.push_back(std::move(row));
        }
        report["failure_distribution"] = std::move(dist);
    }

    // Cross-tab of AgentFull failure type x attribution category.
    const auto attrs = attribution_by_key(results);
    std::map<std::string, AttributionCategory> attrs_with_type;
    std::map<std::string, FailureType> types_with_attr;
    for (const auto& [key, type] : full_failure_types) {
        auto it = attrs.find(key);
        if (it == attrs.end()) continue;
        attrs_with_type.emplace(key, it->second);
        types_with_attr.emplace(key, type);
    }
    if (!types_with_attr.empty()) {
        const CrossTab tab = cross_tabulate(attrs_with_type, types_with_attr);
        ordered_json rows = ordered_json::array();
        for (const auto& [type, row] : tab.rows) {
            ordered_json j;
            j["type"] = to_string(type);
            j["label"] = failure_type_label(type);
            j["n"] = row.count;
            j["Genuine"] = rational_cell(row.percent[0], 1);
            j["StyLoss"] = rational_cell(row.percent[1], 1);
            j["FrcLoss"] = rational_cell(row.percent[2], 1);
            j["CmpLoss"] = rational_cell(row.percent[3], 1);
            rows.push_back(std::move(j));
        }
        report["cross_tab"] = std::move(rows);
    }

    // Capability overlap.
    const OverlapReport overlap = capability_overlap(results);
    {
        ordered_json j;
        j["tool_benefited"] = overlap.tool_benefited;
        j["cot_solved"] = overlap.cot_solved;
        if (overlap.ratio_percent) j["overlap"] = rational_cell(*overlap.ratio_percent, 1);
        report["overlap"] = std::move(j);
    }

    return report;
}

ordered_json report_from_accuracy_fixture(const std::filesystem::path& fixture) {
    std::ifstream in(fixture);
    if (!in) throw std::runtime_error("cannot open accuracy fixture: " + fixture.string());
    nlohmann::json j;
    in >> j;

    ordered_json out;
    ordered_json rows = ordered_json::array();
    for (const auto& pair : j.at("pairs")) {
        std::map<Condition, Rational> acc;
        for (const auto& [name, value] : pair.at("accuracy").items()) {
            acc[condition_from_string(name)] = Rational::from_decimal(value.get<std::string>());
        }
        ordered_json row;
        row["task"] = pair.at("task");
        row["model"] = pair.at("model");
        row["delta"] = delta_to_json(decompose_gap(acc));
        rows.push_back(std::move(row));
    }
    out["delta_by_pair"] = std::move(rows);
    return out;
}

ordered_json gate_comparison(const ResultSet& baseline, const ResultSet& gated,
                             const ResultSet* critic_results) {
    const auto overall_for = [](const ResultSet& rs, const std::string& condition) {
        int correct = 0;
        int total = 0;
        for (const ResultRow& row : rs.rows) {
            if (row.condition != condition) continue;
            ++total;
            if (row.correct) ++correct;
        }
        if (total == 0) throw std::runtime_error("gate_comparison: no rows for " + condition);
        return Rational::percent(correct, total);
    };

    const Rational full = overall_for(baseline, to_string(Condition::AgentFull));
    const Rational cot = overall_for(baseline, to_string(Condition::NoToolCoT));
    const Rational gate = overall_for(gated, "AgentGated");
    std::optional<Rational> critic;
    if (critic_results) critic = overall_for(*critic_results, "AgentGatedCritic");

    ordered_json j;
    j["full"] = rational_cell(full, 2);
    j["gate"] = rational_cell(gate, 2);
    if (critic) j["critic"] = rational_cell(*critic, 2);
    j["cot"] = rational_cell(cot, 2);
    if (cot != full) {
        const GapClosure closure = gap_closure(full, gate, critic.value_or(gate), cot);
        j["gap"] = rational_cell(closure.gap, 2);
        j["closure"] = rational_cell(closure.closure_percent, 2);
    }
    return j;
}

namespace {

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write csv: " + path.string());
    for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
    out << "\n";
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
        out << "\n";
    }
}

std::string cell_display(const ordered_json& cell) {
    if (cell.is_object() && cell.contains("display")) return cell["display"].get<std::string>();
    if (cell.is_string()) return cell.get<std::string>();
    return cell.dump();
}

}  // namespace

void write_report_files(const ordered_json& report, const std::filesystem::path& json_path) {
    {
        std::ofstream out(json_path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write report: " + json_path.string());
        out << report.dump(2) << "\n";
    }
    const auto dir = json_path.parent_path().empty() ? std::filesystem::path(".")
                                                     : json_path.parent_path();
    const std::string stem = json_path.stem().string();

    if (report.contains("accuracy")) {
        std::vector<std::vector<std::string>> rows;
        for (const auto& r : report["accuracy"]) {
            rows.push_back({r["condition"].get<std::string>(), r["variant"].get<std::string>(),
                            std::to_string(r["n"].get<int>()), cell_display(r["accuracy"]),
                            r["evidence_f1"].dump(), r["avg_calls"].dump()});
        }
        write_csv(dir / (stem + "_accuracy.csv"),
                  {"condition", "variant", "n", "accuracy", "evidence_f1", "avg_calls"}, rows);
    }
    if (report.contains("delta")) {
        const auto& d = report["delta"];
        std::vector<std::string> row = {cell_display(d["d_cmp"]), cell_display(d["d_frc"]),
                                        cell_display(d["d_sty"]), cell_display(d["net"])};
        std::vector<std::string> header = {"d_cmp", "d_frc", "d_sty", "net"};
        for (const char* probe : {"d_oracle", "d_context", "d_turn"}) {
            if (d.contains(probe)) {
                header.push_back(probe);
                row.push_back(cell_display(d[probe]));
            }
        }
        write_csv(dir / (stem + "_delta.csv"), header, {row});
    }
    if (report.contains("delta_by_pair")) {
        std::vector<std::vector<std::string>> rows;
        for (const auto& r : report["delta_by_pair"]) {
            const auto& d = r["delta"];
            rows.push_back({r["task"].get<std::string>(), r["model"].get<std::string>(),
                            cell_display(d["d_cmp"]), cell_display(d["d_frc"]),
                            cell_display(d["d_sty"]), cell_display(d["net"]),
                            d.contains("d_oracle") ? cell_display(d["d_oracle"]) : "",
                            d.contains("d_context") ? cell_display(d["d_context"]) : "",
                            d.contains("d_turn") ? cell_display(d["d_turn"]) : ""});
        }
        write_csv(dir / (stem + "_delta_by_pair.csv"),
                  {"task", "model", "d_cmp", "d_frc", "d_sty", "net", "d_oracle", "d_context",
                   "d_turn"},
                  rows);
    }
    if (report.contains("attribution")) {
        const auto& a = report["attribution"];
        write_csv(dir / (stem + "_attribution.csv"),
                  {"n_wrong", "Genuine", "StyLoss", "FrcLoss", "CmpLoss", "Proto"},
                  {{std::to_string(a["n_wrong"].get<int>()), cell_display(a["Genuine"]),
                    cell_display(a["StyLoss"]), cell_display(a["FrcLoss"]),
                    cell_display(a["CmpLoss"]), cell_display(a["Proto"])}});
    }
    if (report.contains("cross_tab")) {
        std::vector<std::vector<std::string>> rows;
        for (const auto& r : report["cross_tab"]) {
            rows.push_back({r["type"].get<std::string>(), std::to_string(r["n"].get<int>()),
                            cell_display(r["Genuine"]), cell_display(r["StyLoss"]),
                            cell_display(r["FrcLoss"]), cell_display(r["CmpLoss"])});
        }
        write_csv(dir / (stem + "_crosstab.csv"),
                  {"type", "n", "Genuine", "StyLoss", "FrcLoss", "CmpLoss"}, rows);
    }
    if (report.contains("overlap")) {
        const auto& o = report["overlap"];
        write_csv(dir / (stem + "_overlap.csv"), {"tool_benefited", "cot_solved", "overlap"},
                  {{std::to_string(o["tool_benefited"].get<int>()),
                    std::to_string(o["cot_solved"].get<int>()),
                    o.contains("overlap") ? cell_display(o["overlap"]) : ""}});
    }
    if (report.contains("failure_distribution")) {
        std::vector<std::vector<std::string>> rows;
        for (const auto& r : report["failure_distribution"]) {
            rows.push_back({r["condition"].get<std::string>(),
                            std::to_string(r["n_failures"].get<int>()), cell_display(r["A"]),
                            cell_display(r["B"]), cell_display(r["C"]), cell_display(r["D"]),
                            cell_display(r["E"]), cell_display(r["F"])});
        }
        write_csv(dir / (stem + "_failure_types.csv"),
                  {"condition", "n_failures", "A", "B", "C", "D", "E", "F"}, rows);
    }
    if (report.contains("gate_comparison")) {
        const auto& g = report["gate_comparison"];
        std::vector<std::string> header = {"full", "gate", "critic", "cot", "gap", "closure"};
        std::vector<std::string> row;
        for (const auto& key : header)
            row.push_back(g.contains(key) ? cell_display(g[key]) : "");
        write_csv(dir / (stem + "_gate.csv"), header, {row});
    }
}

std::string render_report_text(const ordered_json& report) {
    std::ostringstream out;
    if (report.contains("accuracy")) {
        out << "== Accuracy (%) by condition and variant ==\n";
        for (const auto& r : report["accuracy"]) {
            out << "  " << r["condition"].get<std::string>() << " / "
                << r["variant"].get<std::string>() << ": acc=" << cell_display(r["accuracy"])
                << " evf1=" << r["evidence_f1"].dump() << " calls=" << r["avg_calls"].dump()
                << " (n=" << r["n"].get<int>() << ")\n";
        }
    }
    const auto print_delta = [&](const ordered_json& d, const std::string& indent) {
        out << indent << "d_cmp=" << cell_display(d["d_cmp"])
            << "  d_frc=" << cell_display(d["d_frc"]) << "  d_sty=" << cell_display(d["d_sty"])
            << "  net=" << cell_display(d["net"]);
        for (const char* probe : {"d_oracle", "d_context", "d_turn"}) {
            if (d.contains(probe)) out << "  " << probe << "=" << cell_display(d[probe]);
        }
        out << "\n";
    };
    if (report.contains("delta")) {
        out << "== Gap decomposition (pp) ==\n";
        print_delta(report["delta"], "  ");
    }
    if (report.contains("delta_by_pair")) {
        out << "== Gap decomposition by (task, model) (pp) ==\n";
        for (const auto& r : report["delta_by_pair"]) {
            out << "  " << r["task"].get<std::string>() << " / " << r["model"].get<std::string>()
                << ":\n";
            print_delta(r["delta"], "    ");
        }
    }
    if (report.contains("attribution")) {
        const auto& a = report["attribution"];
        out << "== Attribution (% of " << a["n_wrong"].get<int>() << " Agent-Full failures) ==\n"
            << "  Genuine=" << cell_display(a["Genuine"])
            << "  StyLoss=" << cell_display(a["StyLoss"])
            << "  FrcLoss=" << cell_display(a["FrcLoss"])
            << "  CmpLoss=" << cell_display(a["CmpLoss"]) << "  Proto=" << cell_display(a["Proto"])
            << "\n";
    }
    if (report.contains("cross_tab")) {
        out << "== Failure type x attribution (row %) ==\n";
        for (const auto& r : report["cross_tab"]) {
            out << "  " << r["type"].get<std::string>() << " (n=" << r["n"].get<int>()
                << "): Gen=" << cell_display(r["Genuine"])
                << " Sty=" << cell_display(r["StyLoss"]) << " Frc=" << cell_display(r["FrcLoss"])
                << " Cmp=" << cell_display(r["CmpLoss"]) << "\n";
        }
    }
    if (report.contains("overlap")) {
        const auto& o = report["overlap"];
        out << "== Capability overlap ==\n  tool_benefited=" << o["tool_benefited"].get<int>()
            << " cot_solved=" << o["cot_solved"].get<int>();
        if (o.contains("overlap")) out << " overlap=" << cell_display(o["overlap"]) << "%";
        out << "\n";
    }
    if (report.contains("failure_distribution")) {
        out << "== Failure-type distribution (% of failures) ==\n";
        for (const auto& r : report["failure_distribution"]) {
            out << "  " << r["condition"].get<std::string>() << " (n="
                << r["n_failures"].get<int>() << "):";
            for (const char* ft : {"A", "B", "C", "D", "E", "F"})
                out << " " << ft << "=" << cell_display(r[ft]);
            out << "\n";
        }
    }
    if (report.contains("gate_comparison")) {
        const auto& g = report["gate_comparison"];
        out << "== Gate comparison (%) ==\n  Full=" << cell_display(g["full"])
            << " Gate=" << cell_display(g["gate"]);
        if (g.contains("critic")) out << " +CRITIC=" << cell_display(g["critic"]);
        out << " CoT=" << cell_display(g["cot"]);
        if (g.contains("gap"))
            out << " Gap=" << cell_display(g["gap"]) << " Closure=" << cell_display(g["closure"]);
        out << "\n";
    }
    return out.str();
}

}  // namespace toolgap
