#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "orgsift/corpus.hpp"

namespace orgsift {

// Class-conditional generator parameters. Defaults are tuned so the four
// classes separate in the three features the way the corresponding account
// types do: robots near-duplicate and small-vocabulary, cyborgs URL-heavy,
// spammers human-like plus a burst of near-identical messages.
struct GeneratorSpec {
  ClassLabel cls = ClassLabel::human;
  size_t vocabulary_size = 30000;
  std::vector<std::string> templates;  // robot update patterns; empty elsewhere
  double url_probability = 0.02;
  double mutation_rate = 0.02;   // per-character substitution rate in spam bursts
  double burst_fraction = 0.0;   // fraction of the stream taken by the burst
  double zipf_exponent = 1.0;
  size_t tweets_per_user = 400;
  uint64_t seed = 0;
};

// Baseline spec for a class; callers may jitter fields before generating.
GeneratorSpec default_spec(ClassLabel cls, uint64_t seed);

std::vector<TweetRecord> gen_user(const GeneratorSpec& spec, const std::string& user_id);

struct ClassCounts {
  size_t human = 0;
  size_t robot = 0;
  size_t cyborg = 0;
  size_t spammer = 0;
};

struct SyntheticCorpus {
  std::vector<TweetRecord> records;
  nlohmann::json manifest;  // per-user generator provenance
};

// Per-user specs are jittered deterministically from base_seed + user index.
SyntheticCorpus gen_corpus(const ClassCounts& counts, size_t tweets_per_user, uint64_t base_seed);

// The 200-user desk-scale benchmark: 120 human / 30 robot / 30 cyborg /
// 20 spammer, 400 tweets each.
constexpr uint64_t kStandardCorpusSeed = 1405;
SyntheticCorpus standard_corpus(uint64_t seed = kStandardCorpusSeed);

void write_jsonl(const SyntheticCorpus& corpus, const std::filesystem::path& path);
void write_manifest(const SyntheticCorpus& corpus, const std::filesystem::path& path);

// In-memory view compatible with load_corpus output.
Corpus to_corpus(const SyntheticCorpus& corpus);

}  // namespace orgsift
