#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "orgsift/classifier.hpp"
#include "orgsift/corpus.hpp"
#include "orgsift/evaluation.hpp"
#include "orgsift/synth.hpp"
#include "orgsift/text_features.hpp"
#include "orgsift/word_intro.hpp"

namespace orgsift {

// Shortest representation that parses back to the same double.
std::string format_double(double value);

struct ExtractConfig {
  size_t s = 400;
  uint64_t seed = 1;
  DissimilarityConfig dissimilarity;
  UrlMode url_mode = UrlMode::extended;
  GapEstimator estimator = GapEstimator::monte_carlo;
  unsigned replicates = 100;
  unsigned workers = 1;
};

struct Exclusion {
  std::string user_id;
  std::string reason;
};

struct ExtractionResult {
  std::vector<UserFeatures> rows;        // labelled users only, sorted by id
  std::vector<UserFeatures> unlabelled;  // feature rows without gold labels
  std::vector<Exclusion> excluded;
};

// Samples each eligible user once and computes the three features. Work is
// split across users with per-user derived seeds, so the worker count never
// affects the values.
ExtractionResult extract_features(const Corpus& corpus, const ExtractConfig& config);

// Canonical "k=v;..." config string and its FNV-1a 64 hash, embedded in every
// artifact so runs can be matched to their configuration.
std::string config_canonical(const ExtractConfig& config, FeatureMask mask, int folds,
                             const Grid& grid, bool strict);
std::string fingerprint_of(const std::string& canonical);

struct RunPaths {
  std::filesystem::path output_dir;
  std::filesystem::path of(const std::string& name) const { return output_dir / name; }
};

void write_features_csv(const std::filesystem::path& path, const ExtractionResult& result,
                        size_t s, const std::string& fingerprint);
void write_gap_curve_csv(const std::filesystem::path& path, const GapCurve& curve);
void write_run_report(const std::filesystem::path& path, const std::string& command,
                      const std::string& canonical, const std::string& fingerprint,
                      const LoadStats& load, const ExtractionResult& extraction);
void write_roc_csv(const std::filesystem::path& path, const std::vector<RocCurve>& curves,
                   const std::string& fingerprint);
void write_auc_by_bin_csv(const std::filesystem::path& path, const std::vector<BinRow>& rows,
                          const std::string& fingerprint);
void write_confusion_json(const std::filesystem::path& path, const ConfusionReport& confusion,
                          const std::vector<ConfusionReport>& per_fold,
                          const std::string& fingerprint);
void write_fences_csv(const std::filesystem::path& path, const OrganicModel& model,
                      const std::string& fingerprint);
void write_verdicts_csv(const std::filesystem::path& path,
                        const std::vector<std::pair<UserFeatures, Verdict>>& verdicts,
                        const std::string& fingerprint);

// Static charts of the ROC sweep and the accuracy-vs-tweets line.
void write_roc_svg(const std::filesystem::path& path, const std::vector<RocCurve>& curves);
void write_bin_sweep_svg(const std::filesystem::path& path, const std::vector<BinRow>& rows);

// Runs crossval at one tweet bin over extracted features.
CrossvalResult crossval_corpus(const Corpus& corpus, const ExtractConfig& extract,
                               const CrossvalOptions& options, ExtractionResult* extraction = nullptr);

// Per-bin crossval table; bins that lack eligible users, folds or both
// classes are skipped via `warn`.
std::vector<BinRow> bin_sweep(const Corpus& corpus, const ExtractConfig& extract,
                              const CrossvalOptions& options, const std::vector<size_t>& bins,
                              const std::function<void(const std::string&)>& warn);

// Full-corpus organic statistics plus the fold-averaged optimal window.
OrganicModel calibrate_corpus(const Corpus& corpus, const ExtractConfig& extract,
                              const CrossvalOptions& options, bool per_feature_windows,
                              ExtractionResult* extraction = nullptr);

std::vector<size_t> parse_bins(std::string_view text);  // "25..500:25" or "25,50,400"

}  // namespace orgsift
