#pragma once

#include <cstddef>
#include <string_view>

#include "orgsift/corpus.hpp"

namespace orgsift {

enum class LcsMode { subsequence, substring };

// paper counts only the literal "http:" marker; extended adds "https:".
enum class UrlMode { extended, paper };

struct DissimilarityConfig {
  LcsMode mode = LcsMode::subsequence;
  bool case_fold = true;
};

// The three linguistic features of one user sample.
struct FeatureVector {
  double mu_lcs = 0.0;  // average pairwise tweet dissimilarity, in [0,1]
  double gamma = 0.0;   // word introduction decay exponent
  double mu_url = 0.0;  // URL markers per tweet
  bool gamma_degenerate = false;
};

// Length of the longest common subsequence (or contiguous substring) of two
// sequences of unicode scalar values. Inputs are expected already folded.
size_t lcs_length(std::u32string_view a, std::u32string_view b,
                  LcsMode mode = LcsMode::subsequence);

// UTF-8 convenience: decodes and optionally case-folds before matching.
size_t lcs_length(std::string_view a_utf8, std::string_view b_utf8,
                  LcsMode mode = LcsMode::subsequence, bool case_fold = true);

// D(a,b) = (|a| + |b| - 2 LCS) / (|a| + |b|), lengths in scalar values of the
// cleaned texts. Throws DegenerateInput when both strings are empty.
double pair_dissimilarity(std::string_view a, std::string_view b,
                          const DissimilarityConfig& cfg = {});

// Mean of D over all unordered tweet pairs. Pair values are accumulated in
// pair-index order so the result is identical for any worker count.
// Throws InsufficientSample when the sample has fewer than two tweets.
double avg_dissimilarity(const UserSample& sample, const DissimilarityConfig& cfg = {},
                         unsigned workers = 1);

size_t count_url_markers(std::string_view text, UrlMode mode = UrlMode::extended);

// URL markers per tweet; can exceed 1. Throws InsufficientSample on an
// empty sample.
double url_rate(const UserSample& sample, UrlMode mode = UrlMode::extended);

}  // namespace orgsift
