#include "orgsift/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>

#include "orgsift/errors.hpp"
#include "orgsift/rng.hpp"

namespace orgsift {

namespace {

using nlohmann::json;

// Deterministic pronounceable lexicon. Every syllable is exactly one
// consonant plus one vowel, so distinct indexes always map to distinct words.
constexpr std::array<char, 20> kConsonants = {'b', 'c', 'd', 'f', 'g', 'h', 'j', 'k', 'l', 'm',
                                              'n', 'p', 'q', 'r', 's', 't', 'v', 'w', 'x', 'z'};
constexpr std::array<char, 6> kVowels = {'a', 'e', 'i', 'o', 'u', 'y'};

void append_syllable(std::string& out, size_t i) {
  out.push_back(kConsonants[i % kConsonants.size()]);
  out.push_back(kVowels[(i / kConsonants.size()) % kVowels.size()]);
}

std::string lexicon_word(size_t index) {
  constexpr size_t kSyl = kConsonants.size() * kVowels.size();  // 120
  std::string out;
  if (index < kSyl) {
    append_syllable(out, index);
    return out;
  }
  index -= kSyl;
  if (index < kSyl * kSyl) {
    append_syllable(out, index / kSyl);
    append_syllable(out, index % kSyl);
    return out;
  }
  index -= kSyl * kSyl;
  append_syllable(out, index / (kSyl * kSyl));
  append_syllable(out, (index / kSyl) % kSyl);
  append_syllable(out, index % kSyl);
  return out;
}

// P(rank r) proportional to (r+1)^-exponent over [0, size).
class ZipfSampler {
public:
  ZipfSampler(size_t size, double exponent) : cum_(size) {
    double total = 0.0;
    for (size_t r = 0; r < size; ++r) {
      total += std::pow(static_cast<double>(r + 1), -exponent);
      cum_[r] = total;
    }
  }

  size_t draw(Rng& rng) const {
    const double u = rng.unit() * cum_.back();
    const size_t idx = static_cast<size_t>(
        std::upper_bound(cum_.begin(), cum_.end(), u) - cum_.begin());
    return std::min(idx, cum_.size() - 1);
  }

private:
  std::vector<double> cum_;
};

std::string url_token(Rng& rng) {
  static constexpr char kChars[] = "abcdefghijklmnopqrstuvwxyz0123456789";
  std::string url = "http://t.co/";
  for (int i = 0; i < 8; ++i) url.push_back(kChars[rng.below(36)]);
  return url;
}

std::string zipf_words(Rng& rng, const ZipfSampler& zipf, size_t count) {
  std::string out;
  for (size_t w = 0; w < count; ++w) {
    if (!out.empty()) out.push_back(' ');
    out += lexicon_word(zipf.draw(rng));
  }
  return out;
}

// ---- robots: structured updates from slot templates ----

const std::array<const char*, 6> kRobotTemplates = {
    "Temp: {num2}F | Humidity: {num2}% | Wind: {num1} mph | Barometer: {num2} in | Dewpoint: {num2}F",
    "Wind {num1} mph. Barometer {num3} mb, steady. Temperature {num2} F. Rain today {num1} in. Humidity {num2}%",
    "TRAFFIC STOP at {word} AVE / {word} ST unit {num3} {num2}:{num2}",
    "#Alert {word} BV & {word} RD ({num1}/{num1} {num2}:{num2}) #zone{num1}",
    "Now trending in sector {num1}: #{word} for {num1} hours #update",
    "New listing {num3}: {word} {word} near zone {num1} #jobs",
};

std::string fill_template(std::string_view tmpl, Rng& rng, const ZipfSampler& slot_vocab) {
  std::string out;
  size_t i = 0;
  while (i < tmpl.size()) {
    if (tmpl[i] == '{') {
      const size_t close = tmpl.find('}', i);
      const std::string_view slot = tmpl.substr(i + 1, close - i - 1);
      if (slot == "num1") out += std::to_string(rng.below(10));
      else if (slot == "num2") out += std::to_string(10 + rng.below(90));
      else if (slot == "num3") out += std::to_string(100 + rng.below(900));
      else if (slot == "word") out += lexicon_word(slot_vocab.draw(rng));
      i = close + 1;
    } else {
      out.push_back(tmpl[i++]);
    }
  }
  return out;
}

std::vector<std::string> robot_tweets(const GeneratorSpec& spec, Rng& rng) {
  std::vector<std::string> templates = spec.templates;
  if (templates.empty()) {
    // primary update pattern plus an occasional secondary one
    const size_t a = rng.below(kRobotTemplates.size());
    size_t b = rng.below(kRobotTemplates.size());
    if (b == a) b = (a + 1) % kRobotTemplates.size();
    templates = {kRobotTemplates[a], kRobotTemplates[b]};
  }
  ZipfSampler slot_vocab(std::max<size_t>(spec.vocabulary_size, 2), 1.0);
  std::vector<std::string> tweets;
  tweets.reserve(spec.tweets_per_user);
  for (size_t t = 0; t < spec.tweets_per_user; ++t) {
    const size_t which = templates.size() > 1 && rng.unit() < 0.25 ? 1 : 0;
    std::string tweet = fill_template(templates[which], rng, slot_vocab);
    if (spec.url_probability > 0 && rng.unit() < spec.url_probability) {
      tweet += " " + url_token(rng);
    }
    tweets.push_back(std::move(tweet));
  }
  return tweets;
}

// ---- humans: heavy-tailed vocabulary, light punctuation, rare URLs ----

std::string human_tweet(Rng& rng, const ZipfSampler& zipf, double url_probability) {
  std::string tweet = zipf_words(rng, zipf, 6 + rng.below(9));
  const uint64_t punct = rng.below(10);
  if (punct < 2) tweet += '.';
  else if (punct == 2) tweet += '!';
  else if (punct == 3) tweet += '?';
  if (url_probability > 0 && rng.unit() < url_probability) tweet += " " + url_token(rng);
  return tweet;
}

std::vector<std::string> human_tweets(const GeneratorSpec& spec, Rng& rng) {
  ZipfSampler zipf(spec.vocabulary_size, spec.zipf_exponent);
  std::vector<std::string> tweets;
  tweets.reserve(spec.tweets_per_user);
  for (size_t t = 0; t < spec.tweets_per_user; ++t) {
    tweets.push_back(human_tweet(rng, zipf, spec.url_probability));
  }
  return tweets;
}

// ---- cyborgs: borrowed content cut off with an ellipsis and a URL ----

std::vector<std::string> cyborg_tweets(const GeneratorSpec& spec, Rng& rng) {
  ZipfSampler zipf(spec.vocabulary_size, spec.zipf_exponent);
  std::vector<std::string> tweets;
  tweets.reserve(spec.tweets_per_user);
  for (size_t t = 0; t < spec.tweets_per_user; ++t) {
    std::string tweet;
    if (rng.unit() < 0.3) {
      // promotional posting
      tweet = zipf_words(rng, zipf, 3) + ": " + zipf_words(rng, zipf, 4) + " (" +
              lexicon_word(zipf.draw(rng)) + ") " + url_token(rng) + " #" +
              lexicon_word(zipf.draw(rng)) + " #offers";
    } else {
      tweet = zipf_words(rng, zipf, 10 + rng.below(7));
      if (rng.unit() < spec.url_probability) {
        const size_t cut = std::min(tweet.size(), size_t(60 + rng.below(30)));
        tweet = tweet.substr(0, cut) + "... " + url_token(rng);
      }
    }
    tweets.push_back(std::move(tweet));
  }
  return tweets;
}

// ---- spammers: organic stream with a burst of near-identical messages ----

std::vector<std::string> spammer_tweets(const GeneratorSpec& spec, Rng& rng) {
  ZipfSampler zipf(spec.vocabulary_size, spec.zipf_exponent);
  const size_t total = spec.tweets_per_user;
  const size_t burst_len =
      std::min(total, static_cast<size_t>(std::lround(spec.burst_fraction * total)));
  const size_t burst_start = total > burst_len ? rng.below(total - burst_len + 1) : 0;

  std::string burst_template = zipf_words(rng, zipf, 12 + rng.below(5));
  const size_t mutations = std::max<size_t>(
      1, static_cast<size_t>(spec.mutation_rate * static_cast<double>(burst_template.size())));

  std::vector<std::string> tweets;
  tweets.reserve(total);
  for (size_t t = 0; t < total; ++t) {
    if (t >= burst_start && t < burst_start + burst_len) {
      std::string msg = burst_template;
      for (size_t m = 0; m < mutations; ++m) {
        // substitute a non-space position; length and word boundaries stay put
        size_t pos = rng.below(msg.size());
        while (msg[pos] == ' ') pos = rng.below(msg.size());
        msg[pos] = static_cast<char>('a' + rng.below(26));
      }
      msg += ' ';
      msg += static_cast<char>('0' + rng.below(10));
      tweets.push_back(std::move(msg));
    } else {
      tweets.push_back(human_tweet(rng, zipf, spec.url_probability));
    }
  }
  return tweets;
}

}  // namespace

GeneratorSpec default_spec(ClassLabel cls, uint64_t seed) {
  GeneratorSpec spec;
  spec.cls = cls;
  spec.seed = seed;
  switch (cls) {
    case ClassLabel::human:
      spec.vocabulary_size = 30000;
      spec.url_probability = 0.02;
      break;
    case ClassLabel::robot:
      spec.vocabulary_size = 600;
      spec.url_probability = 0.1;
      break;
    case ClassLabel::cyborg:
      spec.vocabulary_size = 20000;
      spec.zipf_exponent = 1.05;
      spec.url_probability = 0.85;
      break;
    case ClassLabel::spammer:
      spec.vocabulary_size = 25000;
      spec.url_probability = 0.03;
      spec.burst_fraction = 0.35;
      break;
  }
  return spec;
}

std::vector<TweetRecord> gen_user(const GeneratorSpec& spec, const std::string& user_id) {
  Rng rng(spec.seed);
  std::vector<std::string> texts;
  switch (spec.cls) {
    case ClassLabel::human: texts = human_tweets(spec, rng); break;
    case ClassLabel::robot: texts = robot_tweets(spec, rng); break;
    case ClassLabel::cyborg: texts = cyborg_tweets(spec, rng); break;
    case ClassLabel::spammer: texts = spammer_tweets(spec, rng); break;
  }
  std::vector<TweetRecord> records;
  records.reserve(texts.size());
  for (size_t i = 0; i < texts.size(); ++i) {
    TweetRecord rec;
    rec.user_id = user_id;
    rec.seq = static_cast<int64_t>(i);
    rec.text = std::move(texts[i]);
    rec.label = spec.cls;
    records.push_back(std::move(rec));
  }
  return records;
}

SyntheticCorpus gen_corpus(const ClassCounts& counts, size_t tweets_per_user,
                           uint64_t base_seed) {
  SyntheticCorpus corpus;
  json users = json::array();
  size_t index = 0;

  auto emit_class = [&](ClassLabel cls, size_t count) {
    for (size_t i = 0; i < count; ++i, ++index) {
      GeneratorSpec spec = default_spec(cls, base_seed + index);
      spec.tweets_per_user = tweets_per_user;

      Rng jitter(derive_seed(base_seed, 0x7177E5ULL, index));
      switch (cls) {
        case ClassLabel::human:
          spec.zipf_exponent += jitter.range(-0.06, 0.06);
          spec.vocabulary_size =
              static_cast<size_t>(static_cast<double>(spec.vocabulary_size) * jitter.range(0.8, 1.25));
          spec.url_probability = jitter.range(0.005, 0.05);
          break;
        case ClassLabel::robot:
          spec.url_probability = jitter.range(0.02, 0.2);
          spec.vocabulary_size = 400 + jitter.below(400);
          break;
        case ClassLabel::cyborg:
          spec.url_probability = jitter.range(0.7, 0.95);
          spec.zipf_exponent += jitter.range(-0.05, 0.05);
          break;
        case ClassLabel::spammer:
          spec.burst_fraction = jitter.range(0.25, 0.45);
          spec.url_probability = jitter.range(0.01, 0.06);
          spec.zipf_exponent += jitter.range(-0.05, 0.05);
          break;
      }

      char id[32];
      std::snprintf(id, sizeof(id), "%s_%03zu", std::string(label_name(cls)).c_str(), i);
      auto records = gen_user(spec, id);
      corpus.records.insert(corpus.records.end(), std::make_move_iterator(records.begin()),
                            std::make_move_iterator(records.end()));
      users.push_back({{"user_id", id},
                       {"class", std::string(label_name(cls))},
                       {"seed", spec.seed},
                       {"vocabulary_size", spec.vocabulary_size},
                       {"url_probability", spec.url_probability},
                       {"mutation_rate", spec.mutation_rate},
                       {"burst_fraction", spec.burst_fraction},
                       {"zipf_exponent", spec.zipf_exponent},
                       {"tweets_per_user", spec.tweets_per_user}});
    }
  };

  emit_class(ClassLabel::human, counts.human);
  emit_class(ClassLabel::robot, counts.robot);
  emit_class(ClassLabel::cyborg, counts.cyborg);
  emit_class(ClassLabel::spammer, counts.spammer);

  corpus.manifest = {{"base_seed", base_seed}, {"tweets_per_user", tweets_per_user},
                     {"users", std::move(users)}};
  return corpus;
}

SyntheticCorpus standard_corpus(uint64_t seed) {
  return gen_corpus({120, 30, 30, 20}, 400, seed);
}

void write_jsonl(const SyntheticCorpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  for (const auto& rec : corpus.records) {
    json j = {{"user_id", rec.user_id}, {"seq", rec.seq}, {"text", rec.text}};
    if (rec.label) j["label"] = std::string(label_name(*rec.label));
    out << j.dump() << '\n';
  }
}

void write_manifest(const SyntheticCorpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << corpus.manifest.dump(2) << '\n';
}

Corpus to_corpus(const SyntheticCorpus& corpus) {
  Corpus out;
  for (const auto& rec : corpus.records) {
    TweetRecord cleaned = rec;
    cleaned.text = clean_text(cleaned.text);
    if (cleaned.text.empty()) continue;
    out[cleaned.user_id].push_back(std::move(cleaned));
  }
  return out;
}

}  // namespace orgsift
