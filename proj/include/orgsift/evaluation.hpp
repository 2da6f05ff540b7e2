#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "orgsift/classifier.hpp"
#include "orgsift/corpus.hpp"
#include "orgsift/word_intro.hpp"

namespace orgsift {

struct FoldPlan {
  int k = 10;
  std::map<std::string, int> assignment;  // user -> fold index
  uint64_t seed = 0;
};

// Stratified partition: fold sizes differ by at most one overall and per
// class. Deterministic under seed.
FoldPlan make_folds(const std::vector<std::string>& users,
                    const std::map<std::string, ClassLabel>& labels, int k, uint64_t seed);

struct RocPoint {
  double threshold = 0.0;
  double fpr = 0.0;
  double tpr = 0.0;
};

struct RocCurve {
  std::vector<RocPoint> points;  // sorted by threshold, fold-averaged
  double auc = 0.0;              // trapezoid AUC of the averaged curve
  double n_opt = 0.0;            // mean per-fold Youden-optimal window
  double n_opt_sigma = 0.0;      // population stddev of the per-fold optima
  size_t tweet_bin = 0;
  FeatureMask mask = kAllFeatures;
  std::vector<double> fold_aucs;
};

struct PerClassCounts {
  size_t total = 0;
  size_t flagged = 0;  // classified Automaton
};

struct ConfusionReport {
  size_t tp = 0, fp = 0, tn = 0, fn = 0;
  std::map<std::string, PerClassCounts> per_class;

  size_t evaluated() const { return tp + fp + tn + fn; }
  double tpr() const { return tp + fn ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0; }
  double fpr() const { return fp + tn ? static_cast<double>(fp) / static_cast<double>(fp + tn) : 0.0; }
  double accuracy() const {
    return evaluated() ? static_cast<double>(tp + tn) / static_cast<double>(evaluated()) : 0.0;
  }
};

// Trapezoid area under TPR over FPR. Points are sorted here; endpoints are
// extended to (0,0) and (1,1) when absent. Throws on fewer than two points.
double auc_trapezoid(std::vector<std::pair<double, double>> points);

// Per-user features with gold labels, the unit the fold machinery works on.
struct UserFeatures {
  std::string user_id;
  FeatureVector v;
  ClassLabel label = ClassLabel::human;
};

struct CrossvalOptions {
  int k = 10;
  Grid grid;
  uint64_t seed = 1;
  FeatureMask mask = kAllFeatures;
};

struct CrossvalResult {
  RocCurve curve;
  std::vector<std::vector<RocPoint>> fold_points;  // per fold, sorted by threshold
  std::vector<double> fold_nopt;
  std::vector<ConfusionReport> fold_reports;  // held-out confusion at the fold's n_opt
  size_t users = 0;
};

// k-fold protocol over pre-extracted features: calibrate on the organic
// members of the other folds, sweep the threshold grid on the held-out fold,
// average (FPR, TPR) pointwise across folds at matched thresholds.
CrossvalResult crossval_features(const std::vector<UserFeatures>& rows,
                                 const CrossvalOptions& options);

struct BinRow {
  size_t s = 0;
  double auc = 0.0;         // averaged-curve AUC
  double auc_stderr = 0.0;  // standard error of the per-fold AUCs
  double mean_tpr = 0.0;    // at per-fold optimal windows
  double tpr_stderr = 0.0;
  double mean_fpr = 0.0;
  double fpr_stderr = 0.0;
  double n_opt = 0.0;
  double n_opt_sigma = 0.0;
  size_t eligible_users = 0;
};

// Applies the model's stored windows to every row.
struct FinalReport {
  ConfusionReport confusion;
  std::vector<std::pair<UserFeatures, Verdict>> verdicts;
};
FinalReport final_report(const OrganicModel& model, const std::vector<UserFeatures>& rows);

}  // namespace orgsift
