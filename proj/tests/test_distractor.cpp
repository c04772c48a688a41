#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "toolgap/distractor.hpp"
#include "toolgap/text.hpp"
#include "toolgap/harness.hpp"

using namespace toolgap;
using nlohmann::json;

namespace {

Sample natalia_base() {
    Sample s;
    s.question_id = "gsm-natalia";
    s.variant = Variant::Base;
    s.question = "How many clips did Natalia sell altogether in April and May?";
    s.chunks = {{0,
                 "Natalia sold clips to 48 of her friends in April, and then she sold half as "
                 "many clips in May.",
                 ChunkRole::Evidence}};
    s.gold_answer = "72";
    s.gold_evidence_ids = {0};
    s.gold_step_count = 2;
    return s;
}

ChatMessage assistant(const std::string& content) {
    ChatMessage m;
    m.role = Role::Assistant;
    m.content = content;
    return m;
}

DistractorBatch batch(std::vector<std::string> before, std::vector<std::string> after) {
    DistractorBatch b;
    b.topic = "sales";
    b.before = std::move(before);
    b.after = std::move(after);
    return b;
}

}  // namespace

TEST_CASE("core extraction pulls entities and numbers from the evidence") {
    const Sample s = natalia_base();
    const auto words = extract_core_words(s);
    bool has_natalia = false, has_april = false;
    for (const auto& w : words) {
        if (w == "Natalia") has_natalia = true;
        if (w == "April") has_april = true;
    }
    CHECK(has_april);  // mid-sentence capitalized
    CHECK(has_natalia);  // appears mid-question
    CHECK(extract_core_numbers(s) == std::vector<std::string>{"48"});
}

TEST_CASE("rendered TB prompt substitutes the placeholders") {
    const RenderedGeneration g = build_generation_request(natalia_base(), Variant::TB, 2, 2);
    CHECK(g.system_prompt.find("NO numbers anywhere") != std::string::npos);
    CHECK(g.system_prompt.find("{CORE_WORDS}") == std::string::npos);
    CHECK(g.system_prompt.find("{BEFORE_N}") == std::string::npos);
    CHECK(g.system_prompt.find("exactly 2 short sentences") != std::string::npos);
    CHECK(g.system_prompt.find("48") != std::string::npos);
    CHECK(g.user_prompt.find("[EVID] Natalia sold clips") != std::string::npos);
    CHECK(g.user_prompt.find("[Q] How many clips") != std::string::npos);
}

TEST_CASE("PED prompt advertises the difference-marker rule") {
    const RenderedGeneration g = build_generation_request(natalia_base(), Variant::PED, 2, 2);
    CHECK(g.system_prompt.find("at least ONE difference marker") != std::string::npos);
}

TEST_CASE("generation request preconditions") {
    CHECK_THROWS(build_generation_request(natalia_base(), Variant::TB, 0, 0));
    Sample tb = natalia_base();
    tb.variant = Variant::TB;
    CHECK_THROWS(build_generation_request(tb, Variant::TB, 2, 2));
    CHECK_THROWS(build_generation_request(natalia_base(), Variant::Base, 2, 2));
}

TEST_CASE("TB validator accepts the published sentence and flags violations") {
    const std::vector<std::string> core_words = {"Natalia", "April", "May"};
    const std::vector<std::string> core_nums = {"48"};

    CHECK(validate_distractors(batch({"Clips are commonly sold in bulk during seasonal events."},
                                     {}),
                               Variant::TB, core_words, core_nums)
              .empty());

    const auto violations = validate_distractors(
        batch({"Sales rose by 48 units."}, {}), Variant::TB, core_words, core_nums);
    bool digit = false, core = false;
    for (const auto& v : violations) {
        if (v == "TB: contains digit") digit = true;
        if (v == "TB: copies core number") core = true;
    }
    CHECK(digit);
    CHECK(core);

    CHECK_FALSE(validate_distractors(batch({"They sold forty clips."}, {}), Variant::TB,
                                     core_words, core_nums)
                    .empty());  // written number
    CHECK_FALSE(validate_distractors(batch({"You can calculate the totals later."}, {}),
                                     Variant::TB, core_words, core_nums)
                    .empty());  // strategy word
    CHECK_FALSE(validate_distractors(batch({"Another shop offered clips."}, {}), Variant::TB,
                                     core_words, core_nums)
                    .empty());  // difference marker
    CHECK_FALSE(validate_distractors(batch({"Natalia ran a stall."}, {}), Variant::TB,
                                     core_words, core_nums)
                    .empty());  // core entity
}

TEST_CASE("HU validator needs a hedging marker per sentence") {
    const auto violations =
        validate_distractors(batch({"Natalia sold many clips."}, {}), Variant::HU, {}, {});
    REQUIRE(violations.size() >= 1);
    CHECK(violations.front() == "HU: missing hedging marker");

    CHECK(validate_distractors(batch({"Natalia reportedly sold a large batch of clips."}, {}),
                               Variant::HU, {}, {})
              .empty());
    CHECK_FALSE(validate_distractors(
                    batch({"Reportedly, another vendor sold clips elsewhere."}, {}), Variant::HU,
                    {}, {})
                    .empty());  // difference markers forbidden
}

TEST_CASE("PED validator requires difference markers and forbids hedging") {
    CHECK(validate_distractors(
              batch({"Elsewhere, Marcus sold clips to a different group of customers."}, {}),
              Variant::PED, {}, {"48"})
              .empty());
    CHECK_FALSE(validate_distractors(batch({"Marcus sold clips to customers."}, {}), Variant::PED,
                                     {}, {})
                    .empty());  // no marker
    CHECK_FALSE(validate_distractors(
                    batch({"Elsewhere, Marcus possibly sold clips to another group."}, {}),
                    Variant::PED, {}, {})
                    .empty());  // hedging forbidden
}

TEST_CASE("SP validator forbids new numerals but allows core ones") {
    const std::vector<std::string> core_nums = {"48"};
    CHECK(validate_distractors(batch({"In April, Natalia's clip sales reached 48 units."}, {}),
                               Variant::SP, {}, core_nums)
              .empty());
    const auto violations = validate_distractors(
        batch({"In April, Natalia's clip sales reached 50 units."}, {}), Variant::SP, {},
        core_nums);
    REQUIRE(!violations.empty());
    CHECK(violations.front().find("new numeral") != std::string::npos);
    CHECK_FALSE(validate_distractors(batch({"You could divide the totals to check."}, {}),
                                     Variant::SP, {}, core_nums)
                    .empty());  // solving hint
}

TEST_CASE("validators are pure") {
    const auto b = batch({"Sales rose by 48 units."}, {"Another day brought 3 sales."});
    const auto v1 = validate_distractors(b, Variant::TB, {"Natalia"}, {"48"});
    const auto v2 = validate_distractors(b, Variant::TB, {"Natalia"}, {"48"});
    CHECK(v1 == v2);
}

TEST_CASE("assemble_variant renumbers and remaps like the published layout") {
    const Sample tb = assemble_variant(
        natalia_base(),
        batch({"Sales can fluctuate from month to month.",
               "Tracking sales helps in understanding trends."},
              {"Analyzing sales data can reveal patterns.",
               "Effective strategies can boost future sales."}),
        Variant::TB);
    CHECK(tb.variant == Variant::TB);
    REQUIRE(tb.chunks.size() == 5);
    CHECK(tb.gold_evidence_ids == std::set<int>{2});
    CHECK(tb.chunks[2].role == ChunkRole::Evidence);
    CHECK(tb.chunks[0].role == ChunkRole::Noise);
    CHECK(tb.chunks[2].text == natalia_base().chunks[0].text);  // evidence untouched
    CHECK(validate_sample(tb).empty());
}

TEST_CASE("prepend count zero keeps evidence ids in place") {
    const Sample out =
        assemble_variant(natalia_base(), batch({}, {"Shops vary their stock."}), Variant::TB);
    CHECK(out.gold_evidence_ids == std::set<int>{0});
    CHECK(out.chunks.size() == 2);
}

TEST_CASE("remap preserves multi-evidence gold sets") {
    Sample base = natalia_base();
    base.chunks = {{0, "First fact with 3 items.", ChunkRole::Evidence},
                   {1, "Second fact with 4 items.", ChunkRole::Evidence},
                   {2, "Third fact with 5 items.", ChunkRole::Evidence}};
    base.gold_evidence_ids = {0, 1, 2};

    const DistractorBatch b = batch({"x", "y"}, {"z"});
    const Sample out = assemble_variant(base, b, Variant::PED);

    // Brute-force oracle: every original evidence text appears at old id + 2
    // and exactly those positions are gold.
    std::set<int> expected;
    for (const Chunk& ch : base.chunks) {
        for (const Chunk& oc : out.chunks) {
            if (oc.text == ch.text) expected.insert(oc.id);
        }
    }
    CHECK(out.gold_evidence_ids == expected);
    CHECK(out.gold_evidence_ids.size() == 3);
}

TEST_CASE("answerability is preserved: gold evidence alone still yields the answer") {
    // Deterministic extraction oracle: the gold chain 48/2 then 48+24 from
    // the evidence chunk's numbers.
    const Sample tb = assemble_variant(
        natalia_base(), batch({"Filler before."}, {"Filler after."}), Variant::TB);
    std::vector<std::string> evidence_numbers;
    for (int id : tb.gold_evidence_ids) {
        for (const auto& n : extract_numerals(tb.chunks[static_cast<std::size_t>(id)].text))
            evidence_numbers.push_back(n);
    }
    REQUIRE(evidence_numbers.size() == 1);
    const double first = 48;
    CHECK(evidence_numbers[0] == "48");
    CHECK(first / 2 + first == 72);  // matches gold_answer
    CHECK(tb.gold_answer == "72");
}

TEST_CASE("augment_corpus assembles, retries, and skips") {
    Corpus c;
    c.samples = {natalia_base()};

    SUBCASE("success path") {
        ScriptedBackend backend(std::vector<ChatMessage>{assistant(
            json{{"topic", "sales"},
                 {"before", {"Clips are commonly sold in bulk during seasonal events."}},
                 {"after", {"Shelf space is planned well ahead of busy weekends."}}}
                .dump())});
        const AugmentResult result =
            augment_corpus(c, {Variant::TB}, backend, 1, 1, 2);
        CHECK(result.corpus.samples.size() == 2);
        CHECK(result.skip_log.empty());
        for (const Sample& s : result.corpus.samples) CHECK(validate_sample(s).empty());
    }

    SUBCASE("malformed JSON consumes a retry, then a valid batch lands") {
        ScriptedBackend backend(
            std::vector<ChatMessage>{assistant("not json at all"),
             assistant(json{{"topic", "sales"},
                            {"before", {"Clips are commonly sold in bulk during seasonal "
                                        "events."}},
                            {"after", {"Shelf space is planned well ahead of busy weekends."}}}
                           .dump())});
        const AugmentResult result = augment_corpus(c, {Variant::TB}, backend, 1, 1, 2);
        CHECK(result.corpus.samples.size() == 2);
        CHECK(backend.calls() == 2);
    }

    SUBCASE("rule violations exhaust retries and land in the skip log") {
        std::vector<ChatMessage> always_bad;
        for (int i = 0; i < 3; ++i)
            always_bad.push_back(assistant(
                json{{"topic", "sales"}, {"before", {"Sales rose by 48 units."}}, {"after", {"x"}}}
                    .dump()));
        ScriptedBackend backend(always_bad);
        const AugmentResult result = augment_corpus(c, {Variant::TB}, backend, 1, 1, 2);
        CHECK(result.corpus.samples.size() == 1);  // base only
        REQUIRE(result.skip_log.size() == 1);
        CHECK(result.skip_log[0].find("gsm-natalia/TB") != std::string::npos);
        CHECK(backend.calls() == 3);  // initial + 2 retries
    }
}

TEST_CASE("augment count matches questions x (1 + variants)") {
    Corpus c;
    Sample a = natalia_base();
    Sample b = natalia_base();
    b.question_id = "gsm-other";
    b.question = "How many clips did Bruno sell altogether in June and July?";
    b.chunks = {{0, "Bruno sold clips to 10 of her friends in June, and then he sold half as "
                    "many clips in July.",
                 ChunkRole::Evidence}};
    b.gold_answer = "15";
    c.samples = {a, b};

    // Scripted generator: one clean batch per (question, variant).
    const std::map<Variant, json> good = {
        {Variant::TB,
         json{{"topic", "t"},
              {"before", {"Clips are commonly sold in bulk during seasonal events."}},
              {"after", {"Window displays change with the seasons."}}}},
        {Variant::SP,
         json{{"topic", "t"},
              {"before", {"Clip sales in the later month were half those of the earlier one."}},
              {"after", {"Half as many clips were sold in the second month as in the first."}}}},
        {Variant::PED,
         json{{"topic", "t"},
              {"before", {"Elsewhere, Alice sold a separate batch of clips."}},
              {"after", {"In a different market, Tom sold clips to someone else."}}}},
        {Variant::HU,
         json{{"topic", "t"},
              {"before", {"Reportedly the clip sales might have been brisk."}},
              {"after", {"Some say the totals were possibly never confirmed."}}}},
    };

    // augment_corpus iterates base samples outer, variants (set order) inner.
    std::vector<ChatMessage> script;
    const std::set<Variant> variants = {Variant::TB, Variant::SP, Variant::PED, Variant::HU};
    for (int q = 0; q < 2; ++q) {
        for (Variant v : variants) script.push_back(assistant(good.at(v).dump()));
    }
    ScriptedBackend backend(script);
    const AugmentResult result = augment_corpus(c, variants, backend, 1, 1, 0);
    CHECK(result.skip_log.empty());
    CHECK(result.corpus.samples.size() == 2 * (1 + 4));
    for (const Sample& s : result.corpus.samples) CHECK(validate_sample(s).empty());
}
