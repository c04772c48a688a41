#include "toolgap/prompts.hpp"

#include <stdexcept>

#include "toolgap/md5.hpp"

namespace toolgap::prompts {

namespace {

const std::string kTbTemplate = R"PROMPT(You are generating IN-DOMAIN background filler for a math word problem. These sentences should SOUND relevant to the same general topic/domain, but MUST NOT help solve the problem.

Return STRICT JSON ONLY:
{
  "topic": "<topic>",
  "before": [<exactly {BEFORE_N} short sentences>],
  "after":  [<exactly {AFTER_N} short sentences>]
}

HARD RULES (must follow):
1. Insert-only: write NEW sentences only; do NOT rewrite or paraphrase the evidence.
2. Keep ONE coherent in-domain topic (same domain as the problem).
3. NO numbers anywhere (no digits, no written numbers, no fractions).
4. No math/solving strategy hints (forbidden: multiply, divide, sum, total, fraction, percent, per, each, equation, formula, calculate, compute).
5. Do NOT use difference markers (forbidden: another, elsewhere, different, nearby, unrelated, separate, yesterday).
6. Do NOT use hedging markers (forbidden: reportedly, claimed, might, possibly, about, around, likely, unverified).
7. Do NOT mention the specific entities (names, places, dates) listed in: [{CORE_WORDS}]. However, you MAY use general domain terms (e.g. 'clips', 'store', 'selling') to keep the topic relevant.
8. Do NOT copy core numbers: [{CORE_NUMS}]
9. Each sentence must be short, factual, and self-contained.)PROMPT";

const std::string kPedTemplate = R"PROMPT(You are generating TOPIC-RELATED distractors that must be LOGICALLY EXCLUDED from the problem. They should share surface-level domain words, but clearly refer to a different person/time/place/event.

Return STRICT JSON ONLY:
{
  "topic": "<topic>",
  "before": [<exactly {BEFORE_N} short sentences>],
  "after":  [<exactly {AFTER_N} short sentences>]
}

HARD RULES (must follow):
1. Insert-only: write NEW sentences only; do NOT rewrite/paraphrase the evidence.
2. Keep ONE coherent topic in the same domain.
3. EACH sentence MUST include at least ONE difference marker: another / elsewhere / different / nearby / unrelated / separate / in a different / someone else / not this case.
4. NO numbers anywhere.
5. Must include 1-2 domain/topic hint words (same domain), but DO NOT restate evidence facts/relations.
6. MUST NOT use hedging markers (forbidden: reportedly, claimed, might, possibly, about, around, likely).
7. Use specific INVENTED names (e.g., 'Alice', 'Mr. Smith', 'The neighbor') instead of generic terms like 'someone' or 'another person' to make it sound natural.
8. Do NOT copy core numbers: [{CORE_NUMS}]
9. Each sentence short and self-contained.)PROMPT";

const std::string kHuTemplate = R"PROMPT(You are generating TOPIC-RELATED statements that sound like evidence but are epistemically UNCERTAIN. These should not create contradictions that make the problem unsolvable.

Return STRICT JSON ONLY:
{
  "topic": "<topic>",
  "before": [<exactly {BEFORE_N} short sentences>],
  "after":  [<exactly {AFTER_N} short sentences>]
}

HARD RULES (must follow):
1. Insert-only: write NEW sentences only; do NOT rewrite/paraphrase the evidence.
2. Keep ONE coherent topic in the same domain.
3. MUST NOT include difference markers (forbidden: another, elsewhere, different, nearby, unrelated, separate, yesterday).
4. NO numbers anywhere (avoid creating alternative exact facts).
5. Do NOT assert the answer or options (forbidden: 'the answer is', 'correct answer', 'choose option', 'option X').
6. You MAY mention the main entities (e.g. '{CORE_WORDS}') to make the distractor sound like a valid premise, but the hedging marker must keep it uncertain.
7. Do NOT copy core numbers: [{CORE_NUMS}]
8. Each sentence short and self-contained.
9. EACH sentence MUST include at least ONE hedging marker: reportedly / claimed / it is said / some say / might / possibly / perhaps / around / about / likely / unverified / not confirmed.
10. The tone should be speculative, vague, or rumor-based, distinct from the factual tone of the evidence.)PROMPT";

const std::string kSpTemplate = R"PROMPT(You are generating SEMANTICS-PRESERVING PARAPHRASES of the EVIDENCE sentences in a word problem. Your output will be inserted BEFORE and AFTER the evidence as paraphrase fillers.

Return STRICT JSON ONLY:
{
  "topic": "<topic>",
  "before": [<exactly {BEFORE_N} short sentences>],
  "after":  [<exactly {AFTER_N} short sentences>]
}

HARD RULES (must follow):
1. One coherent topic: all sentences must be about the SAME scenario as the evidence.
2. Paraphrase-only: every generated sentence MUST be a paraphrase of some [EVID] sentence content. Do NOT paraphrase [Q] (the question sentence). Do NOT add new facts, new events, or new entities.
3. Syntactic Variation: You MUST change the sentence structure significantly (e.g., switch between active/passive voice, change word order). Do NOT simply replace one word; make the sentence LOOK different but MEAN the same.
4. Numbers/values: you may mention numbers ONLY if they already appear in the evidence. Do NOT introduce any new numbers, ranges, approximations, or near-miss numbers. Keep exact values unchanged (no 'about', 'around', 'roughly', 'approximately').
5. Keep relations unchanged: Preserve relational operators such as half / twice / remaining / difference / total. Do NOT change who did what, when, or the direction of a relation.
6. No markers: Do NOT use difference markers (another / elsewhere / yesterday / different / nearby / unrelated / separate).
7. No hedging markers: Do NOT use hedging markers (reportedly / claimed / might / possibly / about / around / likely / unverified).
8. No solving hints: Do NOT include step-by-step solution language (multiply / divide / add / subtract / compute / calculate / equation / formula).
9. Each sentence must be short, grammatical, and self-contained.)PROMPT";

const std::string kGsmCotTemplate = R"PROMPT(You are a careful math solver. Read the numbered information chunks below. Some chunks are noise — use only the relevant ones as evidence.

Rules:
1. Think step-by-step in 'calc_chain' FIRST before writing anything else.
2. CRITICAL: Inside 'calc_chain', enclose your final computed result in angle brackets and END with it, e.g. <42>.
3. Then copy that exact value into 'final_answer' (numeric only, no units).
4. List chunk indices you actually used in 'evidence_ids'.

Return JSON with keys IN THIS ORDER: calc_chain, evidence_ids, final_answer.

CRITICAL MATH RULES:
- 'half as many' -> divide by 2; 'twice as much' -> multiply by 2.
- 'how much MORE does X need' = (what X needs) - (what X already has + gifts).
- 'X does Y to N people K times' -> multiply by BOTH N and K.
- Count EVERY multiplier in the sentence — don't miss any.)PROMPT";

const std::string kGsmToolTemplate = R"PROMPT(You are a math-solving agent with a 'calculate' function for arithmetic. You will see a question and numbered information chunks. Some chunks are noise — identify the real evidence.

Strategy:
1. Identify which chunks contain real evidence (specific numbers, clear facts) vs noise (hedged claims, unrelated info, different people/places/times).
2. Extract relevant quantities from evidence chunks.
3. Call the calculate function for ALL arithmetic — do NOT compute in your head.
4. You may call calculate multiple times if needed (e.g. one step per operation).

After all calculations, respond with JSON:
{
  "evidence_ids": [integer chunk indices that are real evidence],
  "final_answer": "the numeric answer (just the number, no units)",
  "reasoning": "brief explanation of which chunks you used and why"
}

CRITICAL RULES:
- 'half as many' -> divide by 2; 'twice as much' -> multiply by 2.
- 'how much MORE does X need' = (what X needs) - (what X already has + gifts).
- 'X does Y to N people K times' -> multiply by BOTH N and K.
- Count EVERY multiplier in the sentence — don't miss any.)PROMPT";

const std::string kHotpotCotTemplate = R"PROMPT(You are a careful question answerer. Read the numbered information chunks below. Some chunks are noise — use only the relevant ones as evidence.

Rules:
1. Reason step-by-step in 'calc_chain' FIRST before writing anything else.
2. CRITICAL: Inside 'calc_chain', enclose your final answer in angle brackets and END with it, e.g. <Paris>.
3. Then copy that exact value into 'final_answer' (short span, no explanation).
4. List chunk indices you actually used in 'evidence_ids'.

Return JSON with keys IN THIS ORDER: calc_chain, evidence_ids, final_answer.)PROMPT";

const std::string kHotpotToolTemplate = R"PROMPT(You are a question-answering agent with tools: 'search_sentences' ranks chunks by relevance, 'read_sentences' returns chunk texts, 'compare_values' compares two values, and 'calculate' does arithmetic. You will see a question and numbered information chunks. Some chunks are noise — identify the real evidence.

Strategy:
1. Use search_sentences and read_sentences to locate the evidence chunks.
2. Use compare_values or calculate when the question needs them.
3. Ground every claim in the chunks — do NOT rely on outside knowledge.

After using the tools, respond with JSON:
{
  "evidence_ids": [integer chunk indices that are real evidence],
  "final_answer": "the answer (short span, no explanation)",
  "reasoning": "brief explanation of which chunks you used and why"
})PROMPT";

const std::string kVerificationTemplate = R"PROMPT(Your previous tool result is: {prev_output}. Before finalizing, re-check the evidence chunks and verify:
1) Did you use the correct numbers from evidence?
2) Did you complete all required computation steps to the final answer?

If anything is missing or incorrect, call calculate with a corrected and COMPLETE multi-step expression (do not repeat the same expression). If already complete and consistent, return final JSON only.)PROMPT";

const std::string kErrorCorrectionTemplate =
    R"PROMPT(Calculator returned: {prev_output}. Before calling calculate again, reason in words: which numbers from evidence do you need, and what is the correct step-by-step plan? Then call calculate with a CORRECTED expression (not the same one). Return final JSON after.)PROMPT";

const std::string kRederivationTemplate =
    R"PROMPT(Previous result ({prev_output}) may be wrong. Re-derive the solution in words from evidence first, then call calculate with a revised expression. Do NOT reuse any previous expression. Return final JSON after.)PROMPT";

const std::string kRepeatedErrorTemplate =
    R"PROMPT(You repeated: {repeated_expression} (returned {prev_output}). Explain in words why this is wrong and what should change, then call calculate with a DIFFERENT expression. Return final JSON after.)PROMPT";

const std::string kSenseCheckTemplate =
    R"PROMPT(Verify in words: re-read the question, list key numbers from evidence, check each arithmetic step. Does the answer make sense? If wrong, call calculate with a corrected expression. Return final JSON after.)PROMPT";

}  // namespace

const std::string& distractor_template(Variant v) {
    switch (v) {
        case Variant::TB: return kTbTemplate;
        case Variant::PED: return kPedTemplate;
        case Variant::HU: return kHuTemplate;
        case Variant::SP: return kSpTemplate;
        case Variant::Base: break;
    }
    throw std::runtime_error("no distractor template for variant " + to_string(v));
}

const std::string& solver_template(Task t, bool tool_style) {
    if (t == Task::GSM8K) return tool_style ? kGsmToolTemplate : kGsmCotTemplate;
    return tool_style ? kHotpotToolTemplate : kHotpotCotTemplate;
}

const std::string& continuation_template(Continuation c) {
    switch (c) {
        case Continuation::Verification: return kVerificationTemplate;
        case Continuation::ErrorCorrection: return kErrorCorrectionTemplate;
        case Continuation::Rederivation: return kRederivationTemplate;
        case Continuation::RepeatedError: return kRepeatedErrorTemplate;
        case Continuation::SenseCheck: return kSenseCheckTemplate;
    }
    throw std::runtime_error("unknown continuation kind");
}

std::string render(const std::string& templ, const std::map<std::string, std::string>& subs) {
    std::string out = templ;
    for (const auto& [key, value] : subs) {
        const std::string placeholder = "{" + key + "}";
        std::size_t pos = 0;
        while ((pos = out.find(placeholder, pos)) != std::string::npos) {
            out.replace(pos, placeholder.size(), value);
            pos += value.size();
        }
    }
    return out;
}

std::string bundle_hash() {
    std::string all = kTbTemplate + kPedTemplate + kHuTemplate + kSpTemplate + kGsmCotTemplate +
                      kGsmToolTemplate + kHotpotCotTemplate + kHotpotToolTemplate +
                      kVerificationTemplate + kErrorCorrectionTemplate + kRederivationTemplate +
                      kRepeatedErrorTemplate + kSenseCheckTemplate;
    return md5_hex(all);
}

}  // namespace toolgap::prompts
