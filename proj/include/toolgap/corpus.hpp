#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace toolgap {

enum class Task { GSM8K, HotPotQA };
enum class Variant { Base, TB, SP, PED, HU };
enum class ChunkRole { Evidence, Noise };

std::string to_string(Task t);
std::string to_string(Variant v);
std::string to_string(ChunkRole r);
Task task_from_string(const std::string& s);
Variant variant_from_string(const std::string& s);
ChunkRole chunk_role_from_string(const std::string& s);

struct Chunk {
    int id = 0;
    std::string text;
    ChunkRole role = ChunkRole::Evidence;
};

// One benchmark item. Chunk ids are positional (0..n-1); gold_evidence_ids
// and the noise chunks partition the id set.
struct Sample {
    std::string question_id;
    Variant variant = Variant::Base;
    std::string question;
    std::vector<Chunk> chunks;
    std::string gold_answer;
    std::set<int> gold_evidence_ids;
    // Arithmetic steps in the reference solution, when the source provides it.
    std::optional<int> gold_step_count;
};

struct Corpus {
    Task task = Task::GSM8K;
    std::vector<Sample> samples;
};

// Empty when all Sample invariants hold; each violation names the field.
std::vector<std::string> validate_sample(const Sample& s);

// Line-delimited records, one JSON object per line. Throws std::runtime_error
// with the offending line number on schema or invariant violations.
Corpus load_corpus(const std::filesystem::path& path, Task task = Task::GSM8K);

// Canonical serialization: compact JSON, fixed key order, one record per line.
void write_corpus(const Corpus& c, const std::filesystem::path& path);
std::string sample_to_line(const Sample& s);

// Splits by question_id so every variant of a question lands on the same
// side. Deterministic for a fixed seed.
std::pair<Corpus, Corpus> split_corpus(const Corpus& c, int train_n, int test_n,
                                       std::uint64_t seed);

// nullptr when the question has no Base-variant sample.
const Sample* find_base_sibling(const Corpus& c, const std::string& question_id);

}  // namespace toolgap
