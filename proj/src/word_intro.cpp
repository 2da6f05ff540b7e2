#include "orgsift/word_intro.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <numeric>
#include <unordered_map>

#include "orgsift/errors.hpp"
#include "orgsift/parallel.hpp"
#include "orgsift/rng.hpp"
#include "orgsift/unicode.hpp"

namespace orgsift {

namespace {

bool is_ascii_punct(char c) {
  const unsigned char u = static_cast<unsigned char>(c);
  return u < 128 && std::ispunct(u);
}

bool is_url_token(std::string_view tok) {
  return tok.rfind("http:", 0) == 0 || tok.rfind("https:", 0) == 0;
}

// First-appearance gaps of one arrangement: gaps[n-1] = p_{n+1} - p_n where
// p_n is the position of the n-th new type.
void first_appearance_gaps(const std::vector<uint32_t>& tokens, size_t types,
                           std::vector<char>& seen, std::vector<uint32_t>& gaps) {
  std::fill(seen.begin(), seen.end(), 0);
  size_t prev = 0;
  size_t intro = 0;
  for (size_t pos = 0; pos < tokens.size(); ++pos) {
    const uint32_t t = tokens[pos];
    if (!seen[t]) {
      seen[t] = 1;
      if (intro > 0) gaps[intro - 1] = static_cast<uint32_t>(pos - prev);
      prev = pos;
      if (++intro == types) break;
    }
  }
}

double log_arrangements(const TokenBag& bag) {
  double lg = std::lgamma(static_cast<double>(bag.total_tokens()) + 1.0);
  for (uint32_t f : bag.type_freqs) lg -= std::lgamma(static_cast<double>(f) + 1.0);
  return lg;
}

}  // namespace

TokenBag tokenize(const UserSample& sample) {
  std::string joined;
  for (const auto& tweet : sample.tweets) {
    if (!joined.empty()) joined += ' ';
    joined += tweet;
  }
  const std::string folded = fold_utf8(joined);

  TokenBag bag;
  std::unordered_map<std::string, uint32_t> ids;
  size_t i = 0;
  const size_t n = folded.size();
  while (i < n) {
    while (i < n && std::isspace(static_cast<unsigned char>(folded[i]))) ++i;
    size_t j = i;
    while (j < n && !std::isspace(static_cast<unsigned char>(folded[j]))) ++j;
    if (j > i) {
      std::string_view tok(folded.data() + i, j - i);
      if (!is_url_token(tok)) {
        while (!tok.empty() && is_ascii_punct(tok.front())) tok.remove_prefix(1);
        while (!tok.empty() && is_ascii_punct(tok.back())) tok.remove_suffix(1);
      }
      if (!tok.empty()) {
        auto [it, inserted] = ids.emplace(std::string(tok), static_cast<uint32_t>(ids.size()));
        if (inserted) {
          bag.type_names.emplace_back(tok);
          bag.type_freqs.push_back(0);
        }
        bag.tokens.push_back(it->second);
        ++bag.type_freqs[it->second];
      }
    }
    i = j;
  }
  if (bag.tokens.empty()) throw EmptyText("no word tokens in sample");
  return bag;
}

GapCurve gap_curve_mc(const TokenBag& bag, unsigned replicates, uint64_t seed, unsigned workers) {
  const size_t types = bag.distinct_types();
  if (types < 2) throw DegenerateVocabulary("need at least 2 word types, got " +
                                            std::to_string(types));
  if (replicates == 0) throw Error("gap_curve_mc needs at least 1 replicate");

  std::vector<std::vector<uint32_t>> per_replicate(replicates);
  parallel_chunks(replicates, workers, 8, [&](size_t lo, size_t hi) {
    std::vector<uint32_t> tokens;
    std::vector<char> seen(types);
    for (size_t r = lo; r < hi; ++r) {
      tokens = bag.tokens;
      Rng rng(seed + r);
      rng.shuffle(tokens);
      per_replicate[r].resize(types - 1);
      first_appearance_gaps(tokens, types, seen, per_replicate[r]);
    }
  });

  GapCurve curve;
  curve.estimator = GapEstimator::monte_carlo;
  curve.replicates = replicates;
  curve.m_bar.assign(types - 1, 0.0);
  // reduce in replicate order: integer sums, one division
  std::vector<uint64_t> sums(types - 1, 0);
  for (const auto& gaps : per_replicate) {
    for (size_t k = 0; k + 1 < types; ++k) sums[k] += gaps[k];
  }
  for (size_t k = 0; k + 1 < types; ++k) {
    curve.m_bar[k] = static_cast<double>(sums[k]) / static_cast<double>(replicates);
  }
  return curve;
}

GapCurve gap_curve_exhaustive(const TokenBag& bag) {
  const size_t types = bag.distinct_types();
  if (types < 2) throw DegenerateVocabulary("need at least 2 word types, got " +
                                            std::to_string(types));
  if (log_arrangements(bag) > std::log(5e7)) {
    throw Error("too many arrangements for exhaustive gap enumeration");
  }

  std::vector<uint32_t> tokens = bag.tokens;
  std::sort(tokens.begin(), tokens.end());
  std::vector<uint64_t> sums(types - 1, 0);
  std::vector<uint32_t> gaps(types - 1);
  std::vector<char> seen(types);
  uint64_t count = 0;
  do {
    first_appearance_gaps(tokens, types, seen, gaps);
    for (size_t k = 0; k + 1 < types; ++k) sums[k] += gaps[k];
    ++count;
  } while (std::next_permutation(tokens.begin(), tokens.end()));

  GapCurve curve;
  curve.estimator = GapEstimator::exhaustive;
  curve.m_bar.resize(types - 1);
  for (size_t k = 0; k + 1 < types; ++k) {
    curve.m_bar[k] = static_cast<double>(sums[k]) / static_cast<double>(count);
  }
  return curve;
}

GapCurve gap_curve_analytic(const TokenBag& bag) {
  const size_t types = bag.distinct_types();
  if (types < 2) throw DegenerateVocabulary("need at least 2 word types, got " +
                                            std::to_string(types));
  const size_t n_tokens = bag.total_tokens();

  // log C(a, k) = lg[a] - lg[k] - lg[a-k]
  std::vector<double> lg(n_tokens + 1);
  for (size_t i = 0; i <= n_tokens; ++i) lg[i] = std::lgamma(static_cast<double>(i) + 1.0);
  auto log_choose = [&lg](size_t a, size_t k) { return lg[a] - lg[k] - lg[a - k]; };

  std::map<uint32_t, size_t> freq_hist;
  for (uint32_t f : bag.type_freqs) ++freq_hist[f];

  // expected distinct types after k draws without replacement:
  // E[U(k)] = V - sum_w C(N - f_w, k) / C(N, k)
  std::vector<size_t> position_of(types + 1, 0);  // k_n for n = 1..V
  size_t next_intro = 1;
  for (size_t k = 1; k <= n_tokens && next_intro <= types; ++k) {
    double absent = 0.0;
    const double log_total = log_choose(n_tokens, k);
    for (const auto& [f, cnt] : freq_hist) {
      if (k <= n_tokens - f) {
        absent += static_cast<double>(cnt) * std::exp(log_choose(n_tokens - f, k) - log_total);
      }
    }
    const double expected = static_cast<double>(types) - absent;
    while (next_intro <= types && expected >= static_cast<double>(next_intro) - 1e-9) {
      position_of[next_intro++] = k;
    }
  }
  // every term vanishes at k = N, so the loop always closes
  while (next_intro <= types) position_of[next_intro++] = n_tokens;

  GapCurve curve;
  curve.estimator = GapEstimator::analytic;
  curve.m_bar.resize(types - 1);
  for (size_t n = 1; n < types; ++n) {
    curve.m_bar[n - 1] = static_cast<double>(position_of[n + 1] - position_of[n]);
  }
  return curve;
}

DecayFit fit_decay(const GapCurve& curve, size_t n_lo_override, size_t n_hi_override) {
  const size_t v = curve.m_bar.size() + 1;
  DecayFit fit;
  fit.n_lo = n_lo_override ? n_lo_override : (2 * (v - 1) + 2) / 3;  // ceil(2(V-1)/3)
  fit.n_hi = n_hi_override ? n_hi_override : v - 1;
  fit.n_lo = std::max<size_t>(fit.n_lo, 1);
  fit.n_hi = std::min<size_t>(fit.n_hi, v - 1);

  if (fit.n_hi < fit.n_lo || fit.n_hi - fit.n_lo + 1 < 3) {
    fit.degenerate = true;
    return fit;
  }

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const size_t count = fit.n_hi - fit.n_lo + 1;
  for (size_t n = fit.n_lo; n <= fit.n_hi; ++n) {
    const double x = std::log10(static_cast<double>(n));
    const double y = std::log10(1.0 / curve.m_bar[n - 1]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double cnt = static_cast<double>(count);
  const double denom = cnt * sxx - sx * sx;
  const double slope = (cnt * sxy - sx * sy) / denom;
  fit.intercept = (sy - slope * sx) / cnt;
  fit.gamma = -slope;

  double ss_res = 0, ss_tot = 0;
  const double mean_y = sy / cnt;
  for (size_t n = fit.n_lo; n <= fit.n_hi; ++n) {
    const double x = std::log10(static_cast<double>(n));
    const double y = std::log10(1.0 / curve.m_bar[n - 1]);
    const double pred = slope * x + fit.intercept;
    ss_res += (y - pred) * (y - pred);
    ss_tot += (y - mean_y) * (y - mean_y);
  }
  fit.r_squared = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
  return fit;
}

double gamma_feature(const UserSample& sample, GapEstimator estimator, unsigned replicates,
                     uint64_t seed, bool* degenerate, unsigned workers) {
  const TokenBag bag = tokenize(sample);
  GapCurve curve;
  try {
    switch (estimator) {
      case GapEstimator::monte_carlo:
        curve = gap_curve_mc(bag, replicates, seed, workers);
        break;
      case GapEstimator::exhaustive:
        curve = gap_curve_exhaustive(bag);
        break;
      case GapEstimator::analytic:
        curve = gap_curve_analytic(bag);
        break;
    }
  } catch (const DegenerateVocabulary&) {
    if (degenerate) *degenerate = true;
    return 0.0;
  }
  const DecayFit fit = fit_decay(curve);
  if (degenerate) *degenerate = fit.degenerate;
  return fit.gamma;
}

}  // namespace orgsift
