#include "orgsift/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "orgsift/errors.hpp"
#include "orgsift/rng.hpp"

namespace orgsift {

namespace {

using nlohmann::json;

bool is_space_byte(char c) {
  const unsigned char u = static_cast<unsigned char>(c);
  return u == ' ' || u == '\t' || u == '\n' || u == '\r' || u == '\v' || u == '\f';
}

struct RecordSink {
  Corpus corpus;
  LoadStats stats;
  bool strict = true;

  void add(TweetRecord rec, size_t line_no) {
    rec.text = clean_text(rec.text);
    if (rec.text.empty()) {
      ++stats.dropped_empty;
      return;
    }
    ++stats.records;
    ++stats.per_user[rec.user_id];
    (void)line_no;
    corpus[rec.user_id].push_back(std::move(rec));
  }

  void malformed(size_t line_no, const std::string& why) {
    if (strict) {
      throw InputError("line " + std::to_string(line_no) + ": " + why);
    }
    ++stats.skipped_lines;
  }

  Corpus finish() {
    for (auto& [user, recs] : corpus) {
      std::stable_sort(recs.begin(), recs.end(),
                       [](const TweetRecord& a, const TweetRecord& b) { return a.seq < b.seq; });
      // seq must be unique per user; keep the first record of a clash
      std::vector<TweetRecord> dedup;
      dedup.reserve(recs.size());
      for (auto& r : recs) {
        if (!dedup.empty() && dedup.back().seq == r.seq) {
          if (strict) {
            throw InputError("duplicate seq " + std::to_string(r.seq) + " for user " + user);
          }
          ++stats.skipped_lines;
          --stats.records;
          --stats.per_user[user];
          continue;
        }
        dedup.push_back(std::move(r));
      }
      recs = std::move(dedup);
    }
    return std::move(corpus);
  }
};

void load_jsonl(const std::filesystem::path& path, RecordSink& sink) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      sink.malformed(line_no, "not a JSON object");
      continue;
    }
    if (!j.contains("user_id") || !j["user_id"].is_string() || !j.contains("seq") ||
        !j["seq"].is_number_integer() || !j.contains("text") || !j["text"].is_string()) {
      sink.malformed(line_no, "missing or mistyped user_id/seq/text");
      continue;
    }
    TweetRecord rec;
    rec.user_id = j["user_id"].get<std::string>();
    rec.seq = j["seq"].get<int64_t>();
    rec.text = j["text"].get<std::string>();
    if (rec.user_id.empty() || rec.seq < 0) {
      sink.malformed(line_no, "empty user_id or negative seq");
      continue;
    }
    if (j.contains("label") && !j["label"].is_null()) {
      if (!j["label"].is_string()) {
        sink.malformed(line_no, "label must be a string");
        continue;
      }
      auto label = parse_label(j["label"].get<std::string>());
      if (!label) {
        sink.malformed(line_no, "unknown label '" + j["label"].get<std::string>() + "'");
        continue;
      }
      rec.label = label;
    }
    sink.add(std::move(rec), line_no);
  }
}

// RFC-4180 field reader: quoted fields may contain commas, quotes ("")
// and line breaks.
class CsvReader {
public:
  explicit CsvReader(std::istream& in) : in_(in) {}

  // Returns false at end of input. line_no is the 1-based line the row starts on.
  bool next_row(std::vector<std::string>& fields, size_t& line_no) {
    fields.clear();
    int c = in_.get();
    while (c == '\r' || c == '\n') {
      if (c == '\n') ++line_;
      c = in_.get();
    }
    if (c == EOF) return false;
    line_no = line_ + 1;
    std::string field;
    bool quoted = false;
    while (true) {
      if (quoted) {
        if (c == EOF) throw InputError("line " + std::to_string(line_no) + ": unterminated quote");
        if (c == '"') {
          const int peek = in_.peek();
          if (peek == '"') {
            field.push_back('"');
            in_.get();
          } else {
            quoted = false;
          }
        } else {
          if (c == '\n') ++line_;
          field.push_back(static_cast<char>(c));
        }
      } else if (c == '"' && field.empty()) {
        quoted = true;
      } else if (c == ',') {
        fields.push_back(std::move(field));
        field.clear();
      } else if (c == '\n' || c == '\r' || c == EOF) {
        if (c == '\r' && in_.peek() == '\n') in_.get();
        if (c != EOF) ++line_;
        fields.push_back(std::move(field));
        return true;
      } else {
        field.push_back(static_cast<char>(c));
      }
      c = in_.get();
    }
  }

private:
  std::istream& in_;
  size_t line_ = 0;
};

void load_csv(const std::filesystem::path& path, RecordSink& sink) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  CsvReader reader(in);
  std::vector<std::string> row;
  size_t line_no = 0;
  if (!reader.next_row(row, line_no)) throw InputError("empty CSV: " + path.string());
  int col_user = -1, col_seq = -1, col_text = -1, col_label = -1;
  for (size_t i = 0; i < row.size(); ++i) {
    if (row[i] == "user_id") col_user = static_cast<int>(i);
    else if (row[i] == "seq") col_seq = static_cast<int>(i);
    else if (row[i] == "text") col_text = static_cast<int>(i);
    else if (row[i] == "label") col_label = static_cast<int>(i);
  }
  if (col_user < 0 || col_seq < 0 || col_text < 0) {
    throw InputError("CSV header must name user_id, seq and text columns");
  }
  while (reader.next_row(row, line_no)) {
    const size_t need = static_cast<size_t>(std::max({col_user, col_seq, col_text, col_label})) + 1;
    if (row.size() < need) {
      sink.malformed(line_no, "too few columns");
      continue;
    }
    TweetRecord rec;
    rec.user_id = row[col_user];
    rec.text = row[col_text];
    try {
      size_t pos = 0;
      rec.seq = std::stoll(row[col_seq], &pos);
      if (pos != row[col_seq].size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      sink.malformed(line_no, "seq is not an integer: '" + row[col_seq] + "'");
      continue;
    }
    if (rec.user_id.empty() || rec.seq < 0) {
      sink.malformed(line_no, "empty user_id or negative seq");
      continue;
    }
    if (col_label >= 0 && !row[col_label].empty()) {
      auto label = parse_label(row[col_label]);
      if (!label) {
        sink.malformed(line_no, "unknown label '" + row[col_label] + "'");
        continue;
      }
      rec.label = label;
    }
    sink.add(std::move(rec), line_no);
  }
}

// Social Honeypot release: user id, tweet id, text, created-at, tab separated.
// Timestamps sort lexicographically; ties break on tweet id.
void load_honeypot_file(const std::filesystem::path& path, ClassLabel label, RecordSink& sink) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  struct Row {
    std::string user;
    std::string key;  // created_at + tweet id, for ordering
    std::string text;
  };
  std::vector<Row> rows;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const size_t t1 = line.find('\t');
    const size_t t2 = t1 == std::string::npos ? t1 : line.find('\t', t1 + 1);
    const size_t t3 = t2 == std::string::npos ? t2 : line.rfind('\t');
    if (t1 == std::string::npos || t2 == std::string::npos || t3 == std::string::npos || t3 <= t2) {
      sink.malformed(line_no, "expected 4 tab-separated fields");
      continue;
    }
    Row r;
    r.user = line.substr(0, t1);
    r.text = line.substr(t2 + 1, t3 - t2 - 1);
    r.key = line.substr(t3 + 1) + "\t" + line.substr(t1 + 1, t2 - t1 - 1);
    rows.push_back(std::move(r));
  }
  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    if (a.user != b.user) return a.user < b.user;
    return a.key < b.key;
  });
  std::string current;
  int64_t seq = 0;
  for (auto& r : rows) {
    if (r.user != current) {
      current = r.user;
      seq = 0;
    }
    TweetRecord rec;
    rec.user_id = r.user;
    rec.seq = seq++;
    rec.text = std::move(r.text);
    rec.label = label;
    sink.add(std::move(rec), 0);
  }
}

CorpusFormat detect_format(const std::filesystem::path& path) {
  if (std::filesystem::is_directory(path)) return CorpusFormat::honeypot;
  const auto ext = path.extension().string();
  if (ext == ".csv") return CorpusFormat::csv;
  return CorpusFormat::jsonl;
}

}  // namespace

std::string_view label_name(ClassLabel label) {
  switch (label) {
    case ClassLabel::human: return "human";
    case ClassLabel::robot: return "robot";
    case ClassLabel::cyborg: return "cyborg";
    case ClassLabel::spammer: return "spammer";
  }
  return "human";
}

std::optional<ClassLabel> parse_label(std::string_view name) {
  if (name == "human") return ClassLabel::human;
  if (name == "robot") return ClassLabel::robot;
  if (name == "cyborg") return ClassLabel::cyborg;
  if (name == "spammer") return ClassLabel::spammer;
  return std::nullopt;
}

std::string clean_text(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  bool pending_space = false;
  for (char c : raw) {
    if (is_space_byte(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(c);
  }
  return out;
}

Corpus load_corpus(const std::filesystem::path& path, CorpusFormat format, bool strict,
                   LoadStats* stats) {
  if (!std::filesystem::exists(path)) throw InputError("no such input: " + path.string());
  if (format == CorpusFormat::auto_detect) format = detect_format(path);

  RecordSink sink;
  sink.strict = strict;
  switch (format) {
    case CorpusFormat::jsonl:
      load_jsonl(path, sink);
      break;
    case CorpusFormat::csv:
      load_csv(path, sink);
      break;
    case CorpusFormat::honeypot: {
      if (!std::filesystem::is_directory(path)) {
        throw InputError("honeypot format expects a directory: " + path.string());
      }
      load_honeypot_file(path / "legitimate_users_tweets.txt", ClassLabel::human, sink);
      load_honeypot_file(path / "content_polluters_tweets.txt", ClassLabel::robot, sink);
      break;
    }
    case CorpusFormat::auto_detect:
      break;
  }
  Corpus corpus = sink.finish();
  if (stats) *stats = sink.stats;
  return corpus;
}

UserSample sample_user(const std::string& user_id, const std::vector<TweetRecord>& records,
                       size_t s, uint64_t rng_seed) {
  if (s == 0) throw InsufficientSample("sample size must be positive");
  if (records.size() < s) {
    throw InsufficientSample("user " + user_id + " has " + std::to_string(records.size()) +
                             " tweets, need " + std::to_string(s));
  }
  Rng rng(rng_seed);
  const size_t origin = static_cast<size_t>(rng.below(records.size() - s + 1));
  UserSample sample;
  sample.user_id = user_id;
  sample.origin = origin;
  sample.tweets.reserve(s);
  for (size_t i = 0; i < s; ++i) {
    sample.tweets.push_back(records[origin + i].text);
  }
  return sample;
}

std::optional<ClassLabel> user_label(const std::vector<TweetRecord>& records) {
  for (const auto& r : records) {
    if (r.label) return r.label;
  }
  return std::nullopt;
}

std::map<std::string, ClassLabel> labels_from(const Corpus& corpus) {
  std::map<std::string, ClassLabel> labels;
  for (const auto& [user, recs] : corpus) {
    if (auto l = user_label(recs)) labels.emplace(user, *l);
  }
  return labels;
}

}  // namespace orgsift
