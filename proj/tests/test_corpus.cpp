#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "toolgap/corpus.hpp"

using namespace toolgap;
namespace fs = std::filesystem;

namespace {

// The published example: four topical noise sentences around one evidence
// sentence, gold answer 72.
Sample natalia_tb_sample() {
    Sample s;
    s.question_id = "gsm-natalia";
    s.variant = Variant::TB;
    s.question = "How many clips did Natalia sell altogether in April and May?";
    s.chunks = {
        {0, "Sales can fluctuate from month to month.", ChunkRole::Noise},
        {1, "Tracking sales helps in understanding trends.", ChunkRole::Noise},
        {2,
         "Natalia sold clips to 48 of her friends in April, and then she sold half as many "
         "clips in May.",
         ChunkRole::Evidence},
        {3, "Analyzing sales data can reveal patterns.", ChunkRole::Noise},
        {4, "Effective strategies can boost future sales.", ChunkRole::Noise},
    };
    s.gold_answer = "72";
    s.gold_evidence_ids = {2};
    s.gold_step_count = 2;
    return s;
}

fs::path temp_file(const std::string& name) {
    return fs::temp_directory_path() / ("toolgap_corpus_" + name);
}

}  // namespace

TEST_CASE("natalia sample passes validation") {
    CHECK(validate_sample(natalia_tb_sample()).empty());
}

TEST_CASE("validation names the broken field") {
    Sample s = natalia_tb_sample();
    s.gold_evidence_ids = {9};
    s.chunks[2].role = ChunkRole::Noise;  // keep partition coherent
    const auto violations = validate_sample(s);
    bool found = false;
    for (const auto& v : violations) {
        if (v.find("gold evidence id out of range") != std::string::npos) found = true;
    }
    CHECK(found);
}

TEST_CASE("base variant must not contain noise") {
    Sample s = natalia_tb_sample();
    s.variant = Variant::Base;
    const auto violations = validate_sample(s);
    bool found = false;
    for (const auto& v : violations) {
        if (v.find("Base variant contains noise") != std::string::npos) found = true;
    }
    CHECK(found);
}

TEST_CASE("load_corpus round-trips the natalia sample") {
    const auto path = temp_file("natalia.jsonl");
    {
        Corpus c;
        c.samples = {natalia_tb_sample()};
        write_corpus(c, path);
    }
    const Corpus loaded = load_corpus(path);
    REQUIRE(loaded.samples.size() == 1);
    CHECK(loaded.samples[0].chunks.size() == 5);
    CHECK(loaded.samples[0].gold_answer == "72");
    CHECK(loaded.samples[0].gold_evidence_ids == std::set<int>{2});

    // Canonical round-trip is byte-identical.
    const auto path2 = temp_file("natalia2.jsonl");
    write_corpus(loaded, path2);
    std::ifstream a(path), b(path2);
    std::string sa((std::istreambuf_iterator<char>(a)), std::istreambuf_iterator<char>());
    std::string sb((std::istreambuf_iterator<char>(b)), std::istreambuf_iterator<char>());
    CHECK(sa == sb);
    fs::remove(path);
    fs::remove(path2);
}

TEST_CASE("empty file loads as an empty corpus") {
    const auto path = temp_file("empty.jsonl");
    std::ofstream(path).close();
    CHECK(load_corpus(path).samples.empty());
    fs::remove(path);
}

TEST_CASE("gapped chunk ids are rejected with the line number") {
    const auto path = temp_file("gap.jsonl");
    {
        std::ofstream out(path);
        out << R"({"question_id":"q1","variant":"Base","question":"?","chunks":[)"
            << R"({"id":0,"text":"a","role":"evidence"},{"id":2,"text":"b","role":"evidence"}],)"
            << R"("gold_answer":"1","gold_evidence_ids":[0,2]})" << "\n";
    }
    CHECK_THROWS_WITH_AS(load_corpus(path), "non-contiguous chunk ids at line 1",
                         std::runtime_error);
    fs::remove(path);
}

TEST_CASE("duplicate (question_id, variant) is rejected") {
    const auto path = temp_file("dup.jsonl");
    {
        Corpus c;
        c.samples = {natalia_tb_sample(), natalia_tb_sample()};
        std::ofstream out(path);
        for (const Sample& s : c.samples) out << sample_to_line(s) << "\n";
    }
    CHECK_THROWS(load_corpus(path));
    fs::remove(path);
}

TEST_CASE("split_corpus is disjoint, question-keyed, and deterministic") {
    Corpus c;
    for (int i = 0; i < 20; ++i) {
        Sample base;
        base.question_id = "q" + std::to_string(i);
        base.variant = Variant::Base;
        base.question = "?";
        base.chunks = {{0, "evidence " + std::to_string(i), ChunkRole::Evidence}};
        base.gold_answer = "1";
        base.gold_evidence_ids = {0};
        Sample tb = base;
        tb.variant = Variant::TB;
        tb.chunks = {{0, "noise", ChunkRole::Noise}, {1, base.chunks[0].text, ChunkRole::Evidence}};
        tb.gold_evidence_ids = {1};
        c.samples.push_back(base);
        c.samples.push_back(tb);
    }

    const auto [train, test] = split_corpus(c, 12, 8, 99);
    std::set<std::string> train_ids, test_ids;
    for (const Sample& s : train.samples) train_ids.insert(s.question_id);
    for (const Sample& s : test.samples) test_ids.insert(s.question_id);
    CHECK(train_ids.size() == 12);
    CHECK(test_ids.size() == 8);
    for (const auto& id : train_ids) CHECK(test_ids.count(id) == 0);
    // Both variants of a question travel together.
    CHECK(train.samples.size() == 24);
    CHECK(test.samples.size() == 16);

    const auto [train2, test2] = split_corpus(c, 12, 8, 99);
    std::set<std::string> train_ids2;
    for (const Sample& s : train2.samples) train_ids2.insert(s.question_id);
    CHECK(train_ids == train_ids2);

    CHECK_THROWS(split_corpus(c, 15, 8, 1));
}

TEST_CASE("noise and gold evidence ids partition the chunk set") {
    const Sample s = natalia_tb_sample();
    std::set<int> all_ids, covered;
    for (const Chunk& ch : s.chunks) {
        all_ids.insert(ch.id);
        if (ch.role == ChunkRole::Noise) covered.insert(ch.id);
    }
    for (int id : s.gold_evidence_ids) covered.insert(id);
    CHECK(all_ids == covered);
}

TEST_CASE("bundled toy corpus loads clean") {
    const Corpus toy = load_corpus(fs::path(TOOLGAP_DATA_DIR) / "toy" / "toy_corpus.jsonl");
    CHECK(toy.samples.size() == 12);
    std::set<std::string> qids;
    for (const Sample& s : toy.samples) {
        CHECK(validate_sample(s).empty());
        qids.insert(s.question_id);
    }
    CHECK(qids.size() == 6);
    for (const auto& qid : qids) CHECK(find_base_sibling(toy, qid) != nullptr);
}

TEST_CASE("bundled toy corpus is canonically formatted") {
    const auto src = fs::path(TOOLGAP_DATA_DIR) / "toy" / "toy_corpus.jsonl";
    const auto copy = temp_file("toy_roundtrip.jsonl");
    write_corpus(load_corpus(src), copy);
    std::ifstream a(src, std::ios::binary), b(copy, std::ios::binary);
    std::string sa((std::istreambuf_iterator<char>(a)), std::istreambuf_iterator<char>());
    std::string sb((std::istreambuf_iterator<char>(b)), std::istreambuf_iterator<char>());
    CHECK(sa == sb);
    fs::remove(copy);
}
