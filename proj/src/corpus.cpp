#include "toolgap/corpus.hpp"

#include <fstream>
#include <map>
#include <stdexcept>

#include <json.hpp>

#include "toolgap/rng.hpp"
#include "toolgap/text.hpp"

namespace toolgap {

using ordered_json = nlohmann::ordered_json;

std::string to_string(Task t) {
    return t == Task::GSM8K ? "GSM8K" : "HotPotQA";
}

std::string to_string(Variant v) {
    switch (v) {
        case Variant::Base: return "Base";
        case Variant::TB: return "TB";
        case Variant::SP: return "SP";
        case Variant::PED: return "PED";
        case Variant::HU: return "HU";
    }
    return "Base";
}

std::string to_string(ChunkRole r) {
    return r == ChunkRole::Evidence ? "evidence" : "noise";
}

Task task_from_string(const std::string& s) {
    const std::string t = to_lower(s);
    if (t == "gsm8k") return Task::GSM8K;
    if (t == "hotpotqa" || t == "hotpot") return Task::HotPotQA;
    throw std::runtime_error("unknown task: " + s);
}

Variant variant_from_string(const std::string& s) {
    const std::string v = to_lower(s);
    if (v == "base") return Variant::Base;
    if (v == "tb") return Variant::TB;
    if (v == "sp") return Variant::SP;
    if (v == "ped") return Variant::PED;
    if (v == "hu") return Variant::HU;
    throw std::runtime_error("unknown variant: " + s);
}

ChunkRole chunk_role_from_string(const std::string& s) {
    const std::string r = to_lower(s);
    if (r == "evidence") return ChunkRole::Evidence;
    if (r == "noise") return ChunkRole::Noise;
    throw std::runtime_error("unknown chunk role: " + s);
}

std::vector<std::string> validate_sample(const Sample& s) {
    std::vector<std::string> violations;
    if (s.question_id.empty()) violations.push_back("question_id is empty");

    const int n = static_cast<int>(s.chunks.size());
    bool ids_ok = true;
    for (int i = 0; i < n; ++i) {
        if (s.chunks[static_cast<std::size_t>(i)].id != i) ids_ok = false;
        if (trim(s.chunks[static_cast<std::size_t>(i)].text).empty())
            violations.push_back("chunk " + std::to_string(i) + " text is empty");
    }
    if (!ids_ok) violations.push_back("non-contiguous chunk ids");

    for (int id : s.gold_evidence_ids) {
        if (id < 0 || id >= n) {
            violations.push_back("gold evidence id out of range");
            break;
        }
    }

    for (const Chunk& ch : s.chunks) {
        const bool in_gold = s.gold_evidence_ids.count(ch.id) > 0;
        if (in_gold && ch.role != ChunkRole::Evidence)
            violations.push_back("chunk " + std::to_string(ch.id) +
                                 " listed in gold_evidence_ids but role is noise");
        if (!in_gold && ch.role == ChunkRole::Evidence)
            violations.push_back("chunk " + std::to_string(ch.id) +
                                 " has role evidence but is not in gold_evidence_ids");
    }

    if (s.variant == Variant::Base) {
        for (const Chunk& ch : s.chunks) {
            if (ch.role == ChunkRole::Noise) {
                violations.push_back("Base variant contains noise");
                break;
            }
        }
    }

    if (s.gold_step_count && *s.gold_step_count <= 0)
        violations.push_back("gold_step_count must be positive");

    return violations;
}

namespace {

Sample sample_from_json(const ordered_json& j) {
    Sample s;
    s.question_id = j.at("question_id").get<std::string>();
    s.variant = variant_from_string(j.at("variant").get<std::string>());
    s.question = j.at("question").get<std::string>();
    for (const auto& jc : j.at("chunks")) {
        Chunk ch;
        ch.id = jc.at("id").get<int>();
        ch.text = jc.at("text").get<std::string>();
        ch.role = chunk_role_from_string(jc.at("role").get<std::string>());
        s.chunks.push_back(std::move(ch));
    }
    const auto& gold = j.at("gold_answer");
    s.gold_answer = gold.is_string() ? gold.get<std::string>() : gold.dump();
    for (const auto& id : j.at("gold_evidence_ids")) s.gold_evidence_ids.insert(id.get<int>());
    if (j.contains("gold_step_count") && !j.at("gold_step_count").is_null())
        s.gold_step_count = j.at("gold_step_count").get<int>();
    return s;
}

}  // namespace

Corpus load_corpus(const std::filesystem::path& path, Task task) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open corpus file: " + path.string());

    Corpus corpus;
    corpus.task = task;
    std::map<std::pair<std::string, Variant>, int> seen;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        Sample s;
        try {
            s = sample_from_json(ordered_json::parse(line));
        } catch (const std::exception& e) {
            throw std::runtime_error("corpus schema violation at line " +
                                     std::to_string(line_no) + ": " + e.what());
        }
        const auto violations = validate_sample(s);
        if (!violations.empty())
            throw std::runtime_error(violations.front() + " at line " + std::to_string(line_no));
        const auto key = std::make_pair(s.question_id, s.variant);
        if (auto it = seen.find(key); it != seen.end())
            throw std::runtime_error("duplicate (question_id, variant) at line " +
                                     std::to_string(line_no) + " (first at line " +
                                     std::to_string(it->second) + ")");
        seen.emplace(key, line_no);
        corpus.samples.push_back(std::move(s));
    }
    return corpus;
}

std::string sample_to_line(const Sample& s) {
    ordered_json j;
    j["question_id"] = s.question_id;
    j["variant"] = to_string(s.variant);
    j["question"] = s.question;
    ordered_json chunks = ordered_json::array();
    for (const Chunk& ch : s.chunks) {
        chunks.push_back({{"id", ch.id}, {"text", ch.text}, {"role", to_string(ch.role)}});
    }
    j["chunks"] = std::move(chunks);
    j["gold_answer"] = s.gold_answer;
    j["gold_evidence_ids"] = s.gold_evidence_ids;
    if (s.gold_step_count) j["gold_step_count"] = *s.gold_step_count;
    return j.dump();
}

void write_corpus(const Corpus& c, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write corpus file: " + path.string());
    for (const Sample& s : c.samples) out << sample_to_line(s) << "\n";
}

std::pair<Corpus, Corpus> split_corpus(const Corpus& c, int train_n, int test_n,
                                       std::uint64_t seed) {
    std::vector<std::string> qids;
    std::set<std::string> seen;
    for (const Sample& s : c.samples) {
        if (seen.insert(s.question_id).second) qids.push_back(s.question_id);
    }
    if (train_n < 0 || test_n < 0 ||
        static_cast<std::size_t>(train_n) + static_cast<std::size_t>(test_n) > qids.size())
        throw std::runtime_error("insufficient questions: have " + std::to_string(qids.size()) +
                                 ", need " + std::to_string(train_n + test_n));

    Rng rng(seed);
    rng.shuffle(qids);
    std::set<std::string> train_ids(qids.begin(), qids.begin() + train_n);
    std::set<std::string> test_ids(qids.begin() + train_n, qids.begin() + train_n + test_n);

    Corpus train, test;
    train.task = c.task;
    test.task = c.task;
    for (const Sample& s : c.samples) {
        if (train_ids.count(s.question_id)) train.samples.push_back(s);
        else if (test_ids.count(s.question_id)) test.samples.push_back(s);
    }
    return {std::move(train), std::move(test)};
}

const Sample* find_base_sibling(const Corpus& c, const std::string& question_id) {
    for (const Sample& s : c.samples) {
        if (s.variant == Variant::Base && s.question_id == question_id) return &s;
    }
    return nullptr;
}

}  // namespace toolgap
