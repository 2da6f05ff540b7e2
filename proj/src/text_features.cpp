#include "orgsift/text_features.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <map>
#include <vector>

#include "orgsift/errors.hpp"
#include "orgsift/parallel.hpp"
#include "orgsift/unicode.hpp"

namespace orgsift {

namespace {

// Bit-parallel LCS length. masks holds one m-bit match mask per dense symbol
// id of the pattern alphabet; zero bits of V mark matched pattern positions.
// Update per text symbol: V' = (V + (V & M)) | (V & ~M), carries rippling
// across words.
size_t lcs_subsequence_kernel(const uint64_t* masks, size_t words, size_t m,
                              const uint32_t* text, size_t text_len, uint64_t* v) {
  std::fill_n(v, words, ~0ull);
  for (size_t j = 0; j < text_len; ++j) {
    const uint64_t* mask = masks + static_cast<size_t>(text[j]) * words;
    uint64_t carry = 0;
    for (size_t w = 0; w < words; ++w) {
      const uint64_t old = v[w];
      const uint64_t u = old & mask[w];
      const unsigned __int128 sum =
          static_cast<unsigned __int128>(old) + u + carry;
      v[w] = static_cast<uint64_t>(sum) | (old & ~mask[w]);
      carry = static_cast<uint64_t>(sum >> 64);
    }
  }
  size_t zeros = 0;
  for (size_t w = 0; w < words; ++w) {
    uint64_t live = ~0ull;
    if (w + 1 == words && m % 64 != 0) live = (1ull << (m % 64)) - 1;
    zeros += static_cast<size_t>(std::popcount(~v[w] & live));
  }
  return zeros;
}

// Longest common contiguous run, rolling single row.
size_t lcs_substring_ids(const std::vector<uint32_t>& a, const std::vector<uint32_t>& b) {
  const auto& shorter = a.size() <= b.size() ? a : b;
  const auto& longer = a.size() <= b.size() ? b : a;
  if (shorter.empty()) return 0;
  std::vector<size_t> row(shorter.size(), 0);
  size_t best = 0;
  for (size_t i = 0; i < longer.size(); ++i) {
    size_t diag = 0;  // row[j-1] before this pass overwrote it
    for (size_t j = 0; j < shorter.size(); ++j) {
      const size_t above = row[j];
      row[j] = (longer[i] == shorter[j]) ? diag + 1 : 0;
      best = std::max(best, row[j]);
      diag = above;
    }
  }
  return best;
}

// Shared dense alphabet over a set of sequences; symbol ids are assigned in
// code-point order so results never depend on container iteration.
class Alphabet {
public:
  explicit Alphabet(const std::vector<std::u32string>& texts) {
    std::vector<char32_t> chars;
    for (const auto& t : texts) chars.insert(chars.end(), t.begin(), t.end());
    std::sort(chars.begin(), chars.end());
    chars.erase(std::unique(chars.begin(), chars.end()), chars.end());
    for (size_t i = 0; i < chars.size(); ++i) ids_.emplace(chars[i], static_cast<uint32_t>(i));
  }

  size_t size() const { return ids_.size(); }

  std::vector<uint32_t> encode(std::u32string_view text) const {
    std::vector<uint32_t> out;
    out.reserve(text.size());
    for (char32_t c : text) out.push_back(ids_.at(c));
    return out;
  }

private:
  std::map<char32_t, uint32_t> ids_;
};

std::vector<uint64_t> build_masks(const std::vector<uint32_t>& pattern, size_t alphabet) {
  const size_t words = (pattern.size() + 63) / 64;
  std::vector<uint64_t> masks(alphabet * words, 0);
  for (size_t i = 0; i < pattern.size(); ++i) {
    masks[static_cast<size_t>(pattern[i]) * words + i / 64] |= 1ull << (i % 64);
  }
  return masks;
}

size_t lcs_ids(const std::vector<uint32_t>& a, const std::vector<uint32_t>& b, size_t alphabet,
               LcsMode mode) {
  if (mode == LcsMode::substring) return lcs_substring_ids(a, b);
  const auto& pattern = a.size() <= b.size() ? a : b;
  const auto& text = a.size() <= b.size() ? b : a;
  if (pattern.empty()) return 0;
  const auto masks = build_masks(pattern, alphabet);
  const size_t words = (pattern.size() + 63) / 64;
  std::vector<uint64_t> v(words);
  return lcs_subsequence_kernel(masks.data(), words, pattern.size(), text.data(), text.size(),
                                v.data());
}

}  // namespace

size_t lcs_length(std::u32string_view a, std::u32string_view b, LcsMode mode) {
  if (a.empty() || b.empty()) return 0;
  std::vector<std::u32string> texts{std::u32string(a), std::u32string(b)};
  Alphabet alphabet(texts);
  return lcs_ids(alphabet.encode(a), alphabet.encode(b), alphabet.size(), mode);
}

size_t lcs_length(std::string_view a_utf8, std::string_view b_utf8, LcsMode mode,
                  bool case_fold) {
  std::u32string a = utf8_decode(a_utf8);
  std::u32string b = utf8_decode(b_utf8);
  if (case_fold) {
    a = fold(a);
    b = fold(b);
  }
  return lcs_length(a, b, mode);
}

double pair_dissimilarity(std::string_view a, std::string_view b,
                          const DissimilarityConfig& cfg) {
  std::u32string ua = utf8_decode(a);
  std::u32string ub = utf8_decode(b);
  if (cfg.case_fold) {
    ua = fold(ua);
    ub = fold(ub);
  }
  const size_t total = ua.size() + ub.size();
  if (total == 0) throw DegenerateInput("pair_dissimilarity of two empty strings");
  const size_t lcs = lcs_length(ua, ub, cfg.mode);
  return static_cast<double>(total - 2 * lcs) / static_cast<double>(total);
}

double avg_dissimilarity(const UserSample& sample, const DissimilarityConfig& cfg,
                         unsigned workers) {
  const size_t s = sample.tweets.size();
  if (s < 2) {
    throw InsufficientSample("avg_dissimilarity needs at least 2 tweets, got " +
                             std::to_string(s));
  }

  std::vector<std::u32string> texts;
  texts.reserve(s);
  for (const auto& t : sample.tweets) {
    std::u32string u = utf8_decode(t);
    texts.push_back(cfg.case_fold ? fold(u) : std::move(u));
  }
  Alphabet alphabet(texts);
  std::vector<std::vector<uint32_t>> ids;
  ids.reserve(s);
  for (const auto& t : texts) ids.push_back(alphabet.encode(t));

  std::vector<std::vector<uint64_t>> masks;
  std::vector<size_t> words(s);
  if (cfg.mode == LcsMode::subsequence) {
    masks.resize(s);
    for (size_t i = 0; i < s; ++i) {
      masks[i] = build_masks(ids[i], alphabet.size());
      words[i] = (ids[i].size() + 63) / 64;
    }
  }

  const size_t pairs = s * (s - 1) / 2;
  std::vector<std::pair<uint32_t, uint32_t>> index;
  index.reserve(pairs);
  for (uint32_t i = 0; i + 1 < s; ++i) {
    for (uint32_t j = i + 1; j < s; ++j) index.emplace_back(i, j);
  }

  std::vector<double> d(pairs);
  auto body = [&](size_t lo, size_t hi) {
    std::vector<uint64_t> scratch;
    for (size_t p = lo; p < hi; ++p) {
      const auto [i, j] = index[p];
      const size_t total = ids[i].size() + ids[j].size();
      if (total == 0) throw DegenerateInput("pair of empty tweets in sample");
      size_t lcs;
      if (cfg.mode == LcsMode::substring) {
        lcs = lcs_substring_ids(ids[i], ids[j]);
      } else {
        // shorter tweet as pattern: fewer mask words per step
        const size_t pat = ids[i].size() <= ids[j].size() ? i : j;
        const size_t txt = pat == i ? j : i;
        if (ids[pat].empty()) {
          lcs = 0;
        } else {
          scratch.resize(words[pat]);
          lcs = lcs_subsequence_kernel(masks[pat].data(), words[pat], ids[pat].size(),
                                       ids[txt].data(), ids[txt].size(), scratch.data());
        }
      }
      d[p] = static_cast<double>(total - 2 * lcs) / static_cast<double>(total);
    }
  };
  parallel_chunks(pairs, workers, 4096, body);

  // compensated sum in pair-index order
  double sum = 0.0, comp = 0.0;
  for (double x : d) {
    const double y = x - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  return sum / static_cast<double>(pairs);
}

size_t count_url_markers(std::string_view text, UrlMode mode) {
  const std::string lower = ascii_lower(text);
  auto count_of = [&lower](std::string_view needle) {
    size_t count = 0;
    size_t pos = 0;
    while ((pos = lower.find(needle, pos)) != std::string::npos) {
      ++count;
      pos += needle.size();
    }
    return count;
  };
  size_t total = count_of("http:");
  if (mode == UrlMode::extended) total += count_of("https:");
  return total;
}

double url_rate(const UserSample& sample, UrlMode mode) {
  if (sample.tweets.empty()) throw InsufficientSample("url_rate needs at least 1 tweet");
  size_t total = 0;
  for (const auto& t : sample.tweets) total += count_url_markers(t, mode);
  return static_cast<double>(total) / static_cast<double>(sample.tweets.size());
}

}  // namespace orgsift
