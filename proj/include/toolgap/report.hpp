#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "toolgap/diagnostics.hpp"
#include "toolgap/harness.hpp"

namespace toolgap {

// Full diagnostic bundle for one results directory: accuracy per
// condition/variant, delta decomposition, sample-level attribution, failure
// cross-tabulation, capability overlap, oracle/turn probes, and the A-F
// distribution per agent condition.
nlohmann::ordered_json build_report(const ResultSet& results,
                                    const std::vector<Trajectory>& trajectories,
                                    const nlohmann::ordered_json& metadata);

// Delta decomposition tables computed from a bundled accuracy fixture
// (condition -> printed accuracy, per task/model pair).
nlohmann::ordered_json report_from_accuracy_fixture(const std::filesystem::path& fixture);

// Gate comparison: Full / Gate / +CRITIC / CoT accuracies with gap and
// closure. critic_results may be null (the gate accuracy stands in).
nlohmann::ordered_json gate_comparison(const ResultSet& baseline, const ResultSet& gated,
                                       const ResultSet* critic_results);

// Writes report.json plus one CSV mirror per table next to it.
void write_report_files(const nlohmann::ordered_json& report,
                        const std::filesystem::path& json_path);

// Human-readable rendering of the tables in a report bundle.
std::string render_report_text(const nlohmann::ordered_json& report);

}  // namespace toolgap
