#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "orgsift/corpus.hpp"

namespace orgsift {

// Token stream of a sample: case-folded whitespace tokens with end
// punctuation stripped (URL tokens kept whole), encoded as type ids in
// first-appearance order.
struct TokenBag {
  std::vector<uint32_t> tokens;      // type id per position
  std::vector<uint32_t> type_freqs;  // count per type id
  std::vector<std::string> type_names;

  size_t total_tokens() const { return tokens.size(); }
  size_t distinct_types() const { return type_freqs.size(); }
};

enum class GapEstimator { monte_carlo, exhaustive, analytic };

// m_bar[n-1] is the mean token distance between the n-th and (n+1)-st first
// appearances of new word types under random shuffling, n = 1 .. V-1.
struct GapCurve {
  std::vector<double> m_bar;
  GapEstimator estimator = GapEstimator::monte_carlo;
  unsigned replicates = 0;
};

struct DecayFit {
  double gamma = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  size_t n_lo = 0, n_hi = 0;  // fitted introduction-number range
  bool degenerate = false;    // too few tail points; gamma forced to 0
};

// Throws EmptyText when no tokens survive.
TokenBag tokenize(const UserSample& sample);

// Mean first-appearance gaps over `replicates` uniform shuffles. Replicate r
// is seeded with seed + r, so parallel and serial runs agree bit for bit.
// Throws DegenerateVocabulary when the bag has fewer than two types.
GapCurve gap_curve_mc(const TokenBag& bag, unsigned replicates, uint64_t seed,
                      unsigned workers = 1);

// Exact mean over every distinct arrangement of the token multiset.
// Feasible for small bags only; throws Error when the arrangement count is
// too large.
GapCurve gap_curve_exhaustive(const TokenBag& bag);

// Closed-form path: expected distinct-type counts under sampling without
// replacement, inverted to expected introduction positions.
GapCurve gap_curve_analytic(const TokenBag& bag);

// OLS of log10(1/m_bar) on log10(n) over the top third of introduction
// numbers (overridable); gamma is the negated slope.
DecayFit fit_decay(const GapCurve& curve, size_t n_lo_override = 0, size_t n_hi_override = 0);

// tokenize -> gap curve -> fit. A vocabulary of fewer than two types yields
// gamma 0 with *degenerate set; EmptyText propagates.
double gamma_feature(const UserSample& sample, GapEstimator estimator, unsigned replicates,
                     uint64_t seed, bool* degenerate = nullptr, unsigned workers = 1);

}  // namespace orgsift
