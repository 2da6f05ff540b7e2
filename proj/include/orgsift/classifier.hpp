#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "orgsift/corpus.hpp"
#include "orgsift/text_features.hpp"

namespace orgsift {

enum class Feature : unsigned { dissimilarity = 0, gamma = 1, url = 2 };
constexpr unsigned kFeatureCount = 3;
constexpr std::array<Feature, kFeatureCount> kFeatures = {Feature::dissimilarity, Feature::gamma,
                                                          Feature::url};

using FeatureMask = unsigned;  // bit (1 << Feature) set = feature enabled
constexpr FeatureMask feature_bit(Feature f) { return 1u << static_cast<unsigned>(f); }
constexpr FeatureMask kAllFeatures =
    feature_bit(Feature::dissimilarity) | feature_bit(Feature::gamma) | feature_bit(Feature::url);

const char* feature_name(Feature f);
std::string mask_to_string(FeatureMask mask);          // "dissimilarity,gamma,url"
FeatureMask mask_from_string(std::string_view names);  // throws InputError on unknown names
double feature_value(const FeatureVector& v, Feature f);

struct FeatureStats {
  double mean = 0.0;
  double stddev = 0.0;  // population (divisor N)
};

// Config provenance stored with the model so a classify run can be checked
// against the extraction that produced its inputs.
struct ModelConfig {
  std::string lcs_mode = "subsequence";
  bool case_fold = true;
  std::string url_mode = "extended";
  std::string estimator = "mc";
  unsigned replicates = 100;
};

struct OrganicModel {
  static constexpr int kVersion = 1;

  int version = kVersion;
  FeatureMask mask = kAllFeatures;
  std::array<FeatureStats, kFeatureCount> stats{};
  std::optional<double> shared_window;  // threshold multiplier n
  std::array<std::optional<double>, kFeatureCount> feature_windows;
  std::optional<double> shared_window_sigma;  // sigma_opt across calibration trials
  std::array<std::optional<double>, kFeatureCount> feature_window_sigmas;
  bool one_sided = false;
  size_t sample_size = 0;
  ModelConfig config;
  uint64_t seed = 0;
  int folds = 0;
  std::vector<double> fold_windows;  // per-trial n_opt, provenance
  std::string fingerprint;

  bool has_window() const;
  // Per-feature multiplier: feature override if set, else the shared window.
  double window_for(Feature f) const;
};

struct LabeledFeatures {
  FeatureVector v;
  ClassLabel label = ClassLabel::human;
};

struct Verdict {
  BinaryClass binary = BinaryClass::organic;
  std::array<double, kFeatureCount> z{};  // masked features stay 0
  FeatureMask violated = 0;
};

// Mean and population stddev of each unmasked feature over the ORGANIC
// vectors in `training`. Throws InsufficientTraining (<2 organics) or
// DegenerateFeature (zero variance).
OrganicModel calibrate(const std::vector<LabeledFeatures>& training, FeatureMask mask);

// Exclusion rule: Automaton iff any unmasked feature deviates more than n
// standard deviations from the organic mean (two-sided unless the model is
// one-sided).
Verdict classify(const OrganicModel& model, const FeatureVector& v, double n);

// Same, with the model's stored window(s); throws Error when none is set.
Verdict classify(const OrganicModel& model, const FeatureVector& v);

struct Grid {
  double lo = 0.0;
  double hi = 10.0;
  double step = 0.05;

  std::vector<double> values() const;
  static Grid parse(std::string_view text);  // "lo:hi:step"
};

struct WindowChoice {
  double n_opt = 0.0;
  double youden = 0.0;  // TPR - FPR at n_opt
  double tpr = 0.0;
  double fpr = 0.0;
};

// Sweeps the shared multiplier over `grid` and picks the Youden-optimal
// point, breaking ties toward the larger window. Throws StatsError when the
// validation set is single-class.
WindowChoice select_window(const OrganicModel& model, const std::vector<LabeledFeatures>& validation,
                           const Grid& grid);

std::string model_to_json(const OrganicModel& model);
OrganicModel model_from_json(const std::string& text);  // throws InputError
void save_model(const OrganicModel& model, const std::filesystem::path& path);
OrganicModel load_model(const std::filesystem::path& path);

}  // namespace orgsift
