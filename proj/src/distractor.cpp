#include "toolgap/distractor.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <stdexcept>

#include "toolgap/prompts.hpp"
#include "toolgap/text.hpp"

namespace toolgap {

using nlohmann::json;

namespace {

// Marker lexicons, exactly the lists enumerated in the generation prompts.
const std::vector<std::string> kDifferenceForbidden = {
    "another", "elsewhere", "different", "nearby", "unrelated", "separate", "yesterday"};
const std::vector<std::string> kDifferenceRequiredPed = {
    "another",        "elsewhere",    "different",   "nearby", "unrelated",
    "separate",       "in a different", "someone else", "not this case"};
const std::vector<std::string> kHedgingForbidden = {
    "reportedly", "claimed", "might", "possibly", "about", "around", "likely", "unverified"};
const std::vector<std::string> kHedgingForbiddenPed = {
    "reportedly", "claimed", "might", "possibly", "about", "around", "likely"};
const std::vector<std::string> kHedgingRequiredHu = {
    "reportedly", "claimed", "it is said", "some say",   "might",      "possibly",
    "perhaps",    "around",  "about",      "likely",     "unverified", "not confirmed"};
const std::vector<std::string> kMathStrategyTb = {
    "multiply", "divide",   "sum",     "total",     "fraction", "percent",
    "per",      "each",     "equation", "formula",  "calculate", "compute"};
const std::vector<std::string> kSolvingHintsSp = {
    "multiply", "divide", "add", "subtract", "compute", "calculate", "equation", "formula"};

const std::string* find_marker(const std::vector<std::string>& tokens,
                               const std::vector<std::string>& lexicon) {
    for (const auto& marker : lexicon) {
        if (has_phrase(tokens, marker)) return &marker;
    }
    return nullptr;
}

bool copies_core_number(const std::string& sentence, const std::vector<std::string>& core_nums) {
    const auto numerals = extract_numerals(sentence);
    for (const auto& n : numerals) {
        for (const auto& c : core_nums) {
            if (values_equal(n, c, 1e-9)) return true;
        }
    }
    return false;
}

void check_sentence(const std::string& sentence, Variant variant,
                    const std::vector<std::string>& core_words,
                    const std::vector<std::string>& core_nums,
                    std::vector<std::string>& violations) {
    const std::string tag = to_string(variant);
    const std::vector<std::string> tokens = tokenize(sentence);

    switch (variant) {
        case Variant::TB: {
            if (has_digit(sentence)) violations.push_back(tag + ": contains digit");
            if (has_number_word(tokens)) violations.push_back(tag + ": contains written number");
            if (const auto* m = find_marker(tokens, kMathStrategyTb))
                violations.push_back(tag + ": contains math-strategy word '" + *m + "'");
            if (const auto* m = find_marker(tokens, kDifferenceForbidden))
                violations.push_back(tag + ": contains difference marker '" + *m + "'");
            if (const auto* m = find_marker(tokens, kHedgingForbidden))
                violations.push_back(tag + ": contains hedging marker '" + *m + "'");
            for (const auto& w : core_words) {
                if (has_phrase(tokens, w)) {
                    violations.push_back(tag + ": mentions core entity '" + w + "'");
                    break;
                }
            }
            if (copies_core_number(sentence, core_nums))
                violations.push_back(tag + ": copies core number");
            break;
        }
        case Variant::PED: {
            if (!find_marker(tokens, kDifferenceRequiredPed))
                violations.push_back(tag + ": missing difference marker");
            if (const auto* m = find_marker(tokens, kHedgingForbiddenPed))
                violations.push_back(tag + ": contains hedging marker '" + *m + "'");
            if (has_digit(sentence)) violations.push_back(tag + ": contains digit");
            if (copies_core_number(sentence, core_nums))
                violations.push_back(tag + ": copies core number");
            break;
        }
        case Variant::HU: {
            if (!find_marker(tokens, kHedgingRequiredHu))
                violations.push_back(tag + ": missing hedging marker");
            if (const auto* m = find_marker(tokens, kDifferenceForbidden))
                violations.push_back(tag + ": contains difference marker '" + *m + "'");
            if (has_digit(sentence)) violations.push_back(tag + ": contains digit");
            break;
        }
        case Variant::SP: {
            for (const auto& n : extract_numerals(sentence)) {
                bool known = false;
                for (const auto& c : core_nums) {
                    if (values_equal(n, c, 1e-9)) {
                        known = true;
                        break;
                    }
                }
                if (!known) {
                    violations.push_back(tag + ": introduces new numeral '" + n + "'");
                    break;
                }
            }
            if (const auto* m = find_marker(tokens, kHedgingForbidden))
                violations.push_back(tag + ": contains hedging marker '" + *m + "'");
            if (const auto* m = find_marker(tokens, kDifferenceForbidden))
                violations.push_back(tag + ": contains difference marker '" + *m + "'");
            if (const auto* m = find_marker(tokens, kSolvingHintsSp))
                violations.push_back(tag + ": contains solving-hint word '" + *m + "'");
            break;
        }
        case Variant::Base:
            violations.push_back("Base: not a distractor variant");
            break;
    }
}

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

}  // namespace

std::vector<std::string> extract_core_words(const Sample& s) {
    std::vector<std::string> out;
    std::set<std::string> seen;
    std::vector<std::string> texts;
    for (const Chunk& ch : s.chunks) {
        if (ch.role == ChunkRole::Evidence) texts.push_back(ch.text);
    }
    texts.push_back(s.question);

    for (const std::string& text : texts) {
        bool sentence_start = true;
        std::size_t i = 0;
        while (i < text.size()) {
            const unsigned char c = static_cast<unsigned char>(text[i]);
            if (std::isalpha(c)) {
                std::size_t j = i;
                while (j < text.size() &&
                       (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == '\''))
                    ++j;
                std::string word = text.substr(i, j - i);
                // strip possessive
                if (word.size() > 2 && word.substr(word.size() - 2) == "'s")
                    word = word.substr(0, word.size() - 2);
                const bool capitalized = std::isupper(static_cast<unsigned char>(word[0])) != 0;
                if (capitalized && !sentence_start && word.size() > 1) {
                    const std::string key = to_lower(word);
                    if (seen.insert(key).second) out.push_back(word);
                }
                sentence_start = false;
                i = j;
            } else {
                if (c == '.' || c == '!' || c == '?') sentence_start = true;
                ++i;
            }
        }
    }
    return out;
}

std::vector<std::string> extract_core_numbers(const Sample& s) {
    std::vector<std::string> out;
    std::set<std::string> seen;
    for (const Chunk& ch : s.chunks) {
        if (ch.role != ChunkRole::Evidence) continue;
        for (const auto& n : extract_numerals(ch.text)) {
            if (seen.insert(n).second) out.push_back(n);
        }
    }
    return out;
}

std::string build_q_core_text(const Sample& s) {
    std::string out;
    for (const Chunk& ch : s.chunks) {
        if (ch.role == ChunkRole::Evidence) out += "[EVID] " + ch.text + "\n";
    }
    out += "[Q] " + s.question;
    return out;
}

RenderedGeneration build_generation_request(const Sample& s, Variant variant, int before_n,
                                            int after_n) {
    if (s.variant != Variant::Base)
        throw std::runtime_error("generation requests start from a Base sample");
    if (variant == Variant::Base) throw std::runtime_error("unknown distractor variant: Base");
    if (before_n < 0 || after_n < 0 || before_n + after_n < 1)
        throw std::runtime_error("before_n + after_n must be >= 1");

    RenderedGeneration g;
    g.request.variant = variant;
    g.request.core_words = extract_core_words(s);
    g.request.core_nums = extract_core_numbers(s);
    g.request.before_n = before_n;
    g.request.after_n = after_n;
    g.request.template_id = "distractor/" + to_string(variant);

    // Topic hint: most frequent long token in the evidence.
    std::map<std::string, int> freq;
    for (const Chunk& ch : s.chunks) {
        if (ch.role != ChunkRole::Evidence) continue;
        for (const auto& tok : tokenize(ch.text)) {
            if (tok.size() >= 4 && !has_digit(tok)) freq[tok] += 1;
        }
    }
    for (const auto& [tok, n] : freq) {
        if (g.request.topic_hint.empty() || n > freq[g.request.topic_hint])
            g.request.topic_hint = tok;
    }

    g.system_prompt = prompts::render(
        prompts::distractor_template(variant),
        {{"CORE_WORDS", join(g.request.core_words, ", ")},
         {"CORE_NUMS", join(g.request.core_nums, ", ")},
         {"BEFORE_N", std::to_string(before_n)},
         {"AFTER_N", std::to_string(after_n)},
         {"Q_CORE_TEXT", build_q_core_text(s)}});
    g.user_prompt = "Problem core (evidence-centric view): " + build_q_core_text(s);
    return g;
}

std::vector<std::string> validate_distractors(const DistractorBatch& batch, Variant variant,
                                              const std::vector<std::string>& core_words,
                                              const std::vector<std::string>& core_nums) {
    std::vector<std::string> violations;
    for (const auto& sentence : batch.before)
        check_sentence(sentence, variant, core_words, core_nums, violations);
    for (const auto& sentence : batch.after)
        check_sentence(sentence, variant, core_words, core_nums, violations);
    return violations;
}

Sample assemble_variant(const Sample& base, const DistractorBatch& batch, Variant variant) {
    Sample out;
    out.question_id = base.question_id;
    out.variant = variant;
    out.question = base.question;
    out.gold_answer = base.gold_answer;
    out.gold_step_count = base.gold_step_count;

    int next_id = 0;
    for (const auto& text : batch.before) {
        out.chunks.push_back({next_id++, text, ChunkRole::Noise});
    }
    const int offset = next_id;
    for (const Chunk& ch : base.chunks) {
        out.chunks.push_back({next_id++, ch.text, ch.role});
    }
    for (const auto& text : batch.after) {
        out.chunks.push_back({next_id++, text, ChunkRole::Noise});
    }
    for (int id : base.gold_evidence_ids) out.gold_evidence_ids.insert(id + offset);
    return out;
}

AugmentResult augment_corpus(const Corpus& c, const std::set<Variant>& variants,
                             Backend& generator, int k_before, int k_after, int max_retries) {
    AugmentResult result;
    result.corpus.task = c.task;
    result.corpus.samples = c.samples;

    std::set<std::pair<std::string, Variant>> existing;
    for (const Sample& s : c.samples) existing.insert({s.question_id, s.variant});

    for (const Sample& base : c.samples) {
        if (base.variant != Variant::Base) continue;
        for (Variant variant : variants) {
            if (variant == Variant::Base) continue;
            // Idempotent: variants already present are left untouched.
            if (existing.count({base.question_id, variant})) continue;
            const RenderedGeneration g =
                build_generation_request(base, variant, k_before, k_after);

            bool produced = false;
            std::string last_problem;
            for (int attempt = 0; attempt <= max_retries && !produced; ++attempt) {
                ChatRequest req;
                req.messages.push_back({Role::System, g.system_prompt, {}, {}});
                req.messages.push_back({Role::User, g.user_prompt, {}, {}});
                req.temperature = 0.0;

                ChatMessage reply;
                try {
                    reply = generator.chat(req);
                } catch (const std::exception& e) {
                    last_problem = std::string("generator error: ") + e.what();
                    continue;
                }

                json parsed;
                try {
                    parsed = json::parse(reply.content);
                } catch (const std::exception&) {
                    last_problem = "malformed generator JSON";
                    continue;
                }
                if (!parsed.is_object() || !parsed.contains("before") || !parsed.contains("after")) {
                    last_problem = "generator JSON missing before/after";
                    continue;
                }

                DistractorBatch batch;
                batch.topic = parsed.value("topic", "");
                for (const auto& s : parsed["before"]) batch.before.push_back(s.get<std::string>());
                for (const auto& s : parsed["after"]) batch.after.push_back(s.get<std::string>());

                if (static_cast<int>(batch.before.size()) != k_before ||
                    static_cast<int>(batch.after.size()) != k_after) {
                    last_problem = "wrong sentence counts";
                    continue;
                }
                const auto violations = validate_distractors(batch, variant, g.request.core_words,
                                                             g.request.core_nums);
                if (!violations.empty()) {
                    last_problem = "hard-rule violations: " + violations.front();
                    continue;
                }

                result.corpus.samples.push_back(assemble_variant(base, batch, variant));
                produced = true;
            }
            if (!produced) {
                result.skip_log.push_back(base.question_id + "/" + to_string(variant) + ": " +
                                          last_problem);
            }
        }
    }

    std::sort(result.corpus.samples.begin(), result.corpus.samples.end(),
              [](const Sample& a, const Sample& b) {
                  if (a.question_id != b.question_id) return a.question_id < b.question_id;
                  return static_cast<int>(a.variant) < static_cast<int>(b.variant);
              });
    return result;
}

}  // namespace toolgap
