#pragma once

#include <map>
#include <string>

#include "toolgap/corpus.hpp"

namespace toolgap::prompts {

// Continuation prompts injected by the gate when it decides to keep going.
enum class Continuation {
    Verification,     // re-check evidence and computation before finalizing
    ErrorCorrection,  // last tool call failed
    Rederivation,     // re-derive from evidence in words first
    RepeatedError,    // the same expression was issued again
    SenseCheck,       // step-by-step sanity check
};

// Generation template for one distractor variant (TB/SP/PED/HU).
const std::string& distractor_template(Variant v);

// Solver system prompt; tool_style selects the function-calling flavor used
// by FCStyle and all agent conditions.
const std::string& solver_template(Task t, bool tool_style);

const std::string& continuation_template(Continuation c);

// Replaces {KEY} placeholders.
std::string render(const std::string& templ, const std::map<std::string, std::string>& subs);

// MD5 over every bundled template, recorded in report metadata.
std::string bundle_hash();

}  // namespace toolgap::prompts
