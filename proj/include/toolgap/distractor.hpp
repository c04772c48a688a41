#pragma once

#include <set>
#include <string>
#include <vector>

#include "toolgap/backend.hpp"
#include "toolgap/corpus.hpp"

namespace toolgap {

struct GenerationRequest {
    Variant variant = Variant::TB;
    std::string topic_hint;
    std::vector<std::string> core_words;  // entities to exclude/permit per variant
    std::vector<std::string> core_nums;
    int before_n = 0;
    int after_n = 0;
    std::string template_id;
};

struct RenderedGeneration {
    GenerationRequest request;
    std::string system_prompt;  // variant template with placeholders substituted
    std::string user_prompt;    // evidence-centric problem core
};

struct DistractorBatch {
    std::string topic;
    std::vector<std::string> before;
    std::vector<std::string> after;
};

// Capitalized non-sentence-initial tokens. Heuristic stand-in for entity
// extraction; flagged approximate in reports.
std::vector<std::string> extract_core_words(const Sample& s);

// All numerals appearing in evidence chunks.
std::vector<std::string> extract_core_numbers(const Sample& s);

// "[EVID] ..." lines for evidence chunks followed by "[Q] <question>".
std::string build_q_core_text(const Sample& s);

// s must be a Base-variant sample; before_n + after_n >= 1.
RenderedGeneration build_generation_request(const Sample& s, Variant variant, int before_n,
                                            int after_n);

// Per-sentence hard-rule checks for one variant. Pure; returns one violation
// string per broken rule.
std::vector<std::string> validate_distractors(const DistractorBatch& batch, Variant variant,
                                              const std::vector<std::string>& core_words,
                                              const std::vector<std::string>& core_nums);

// Prepends/appends the batch sentences as noise chunks, renumbers ids, and
// remaps gold_evidence_ids. Evidence text is never altered.
Sample assemble_variant(const Sample& base, const DistractorBatch& batch, Variant variant);

struct AugmentResult {
    Corpus corpus;
    std::vector<std::string> skip_log;  // one entry per (question, variant) given up on
};

// Runs generation for every Base sample and requested variant, validating and
// retrying up to max_retries per request. Variants already present are kept
// as-is. Output is ordered by (question_id, variant).
AugmentResult augment_corpus(const Corpus& c, const std::set<Variant>& variants,
                             Backend& generator, int k_before, int k_after, int max_retries);

}  // namespace toolgap
