#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace orgsift {

enum class ClassLabel { human, robot, cyborg, spammer };
enum class BinaryClass { organic, automaton };

// human -> Organic, every automated class -> Automaton.
constexpr BinaryClass to_binary(ClassLabel c) {
  return c == ClassLabel::human ? BinaryClass::organic : BinaryClass::automaton;
}

std::string_view label_name(ClassLabel label);
std::optional<ClassLabel> parse_label(std::string_view name);

struct TweetRecord {
  std::string user_id;
  int64_t seq = 0;  // ordinal time position within the user
  std::string text; // cleaned at load; original case preserved
  std::optional<ClassLabel> label;
};

// s consecutive cleaned tweets from one user, in seq order.
struct UserSample {
  std::string user_id;
  std::vector<std::string> tweets;
  size_t origin = 0;  // index of the first tweet in the user's record list
};

// Collapses whitespace runs to a single space and trims the ends.
// Idempotent; case is preserved.
std::string clean_text(std::string_view raw);

enum class CorpusFormat { auto_detect, jsonl, csv, honeypot };

struct LoadStats {
  size_t records = 0;
  size_t dropped_empty = 0;   // empty after cleaning
  size_t skipped_lines = 0;   // malformed or duplicate-seq, lenient mode only
  std::map<std::string, size_t> per_user;
};

// Users sorted by id, records sorted by seq. Immutable after load.
using Corpus = std::map<std::string, std::vector<TweetRecord>>;

// JSONL: one {"user_id","seq","text","label"?} object per line.
// CSV: RFC-4180, header row with the same column names required.
// honeypot: directory holding legitimate_users_tweets.txt and
// content_polluters_tweets.txt (tab separated: user, tweet id, text, time).
// strict=true throws InputError naming the offending line; lenient skips
// and counts.
Corpus load_corpus(const std::filesystem::path& path,
                   CorpusFormat format = CorpusFormat::auto_detect, bool strict = true,
                   LoadStats* stats = nullptr);

// s consecutive tweets starting at a uniform random index in
// [0, count - s]. Throws InsufficientSample when the user has fewer than s.
UserSample sample_user(const std::string& user_id, const std::vector<TweetRecord>& records,
                       size_t s, uint64_t rng_seed);

// Gold label of a user: the first labelled record, if any.
std::optional<ClassLabel> user_label(const std::vector<TweetRecord>& records);
std::map<std::string, ClassLabel> labels_from(const Corpus& corpus);

}  // namespace orgsift
