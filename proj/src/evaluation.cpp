#include "orgsift/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "orgsift/errors.hpp"
#include "orgsift/rng.hpp"

namespace orgsift {

namespace {

double mean_of(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double pop_stddev(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  const double m = mean_of(v);
  double ss = 0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size()));
}

double stderr_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double ss = 0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1)) /
         std::sqrt(static_cast<double>(v.size()));
}

}  // namespace

FoldPlan make_folds(const std::vector<std::string>& users,
                    const std::map<std::string, ClassLabel>& labels, int k, uint64_t seed) {
  if (k < 2) throw InputError("fold count must be at least 2");
  if (users.size() < static_cast<size_t>(k)) {
    throw StatsError("cannot split " + std::to_string(users.size()) + " users into " +
                     std::to_string(k) + " folds");
  }

  std::vector<std::string> organic, automaton;
  for (const auto& u : users) {
    const auto it = labels.find(u);
    if (it == labels.end()) throw InputError("user without label in fold plan: " + u);
    (to_binary(it->second) == BinaryClass::organic ? organic : automaton).push_back(u);
  }
  if (organic.empty() || automaton.empty()) {
    throw StatsError("fold plan needs both organic and automaton users");
  }

  FoldPlan plan;
  plan.k = k;
  plan.seed = seed;

  // extras of each class go to the currently smallest folds, which keeps
  // total fold sizes within one of each other
  std::vector<size_t> fold_sizes(static_cast<size_t>(k), 0);
  int stratum = 0;
  for (auto* group : {&organic, &automaton}) {
    std::sort(group->begin(), group->end());
    Rng rng(derive_seed(seed, 0xF01D5ULL, static_cast<uint64_t>(stratum++)));
    rng.shuffle(*group);

    const size_t base = group->size() / static_cast<size_t>(k);
    const size_t extras = group->size() % static_cast<size_t>(k);
    std::vector<int> order(static_cast<size_t>(k));
    for (int f = 0; f < k; ++f) order[static_cast<size_t>(f)] = f;
    std::stable_sort(order.begin(), order.end(),
                     [&fold_sizes](int a, int b) { return fold_sizes[static_cast<size_t>(a)] < fold_sizes[static_cast<size_t>(b)]; });

    std::vector<size_t> quota(static_cast<size_t>(k), base);
    for (size_t e = 0; e < extras; ++e) ++quota[static_cast<size_t>(order[e])];

    size_t next = 0;
    for (int f = 0; f < k; ++f) {
      for (size_t q = 0; q < quota[static_cast<size_t>(f)]; ++q) {
        plan.assignment[(*group)[next++]] = f;
      }
      fold_sizes[static_cast<size_t>(f)] += quota[static_cast<size_t>(f)];
    }
  }
  return plan;
}

double auc_trapezoid(std::vector<std::pair<double, double>> points) {
  if (points.size() < 2) throw StatsError("AUC needs at least two ROC points");
  std::sort(points.begin(), points.end());
  for (const auto& [x, y] : points) {
    if (x < -1e-12 || x > 1 + 1e-12 || y < -1e-12 || y > 1 + 1e-12) {
      throw InputError("ROC point outside the unit square");
    }
  }
  if (points.front().first > 0.0) points.insert(points.begin(), {0.0, 0.0});
  if (points.back().first < 1.0) points.emplace_back(1.0, 1.0);
  double area = 0.0;
  for (size_t i = 1; i < points.size(); ++i) {
    const double width = points[i].first - points[i - 1].first;
    area += width * (points[i].second + points[i - 1].second) * 0.5;
  }
  return area;
}

CrossvalResult crossval_features(const std::vector<UserFeatures>& rows,
                                 const CrossvalOptions& options) {
  std::vector<std::string> users;
  std::map<std::string, ClassLabel> labels;
  std::map<std::string, const UserFeatures*> by_user;
  for (const auto& r : rows) {
    users.push_back(r.user_id);
    labels[r.user_id] = r.label;
    by_user[r.user_id] = &r;
  }
  const FoldPlan plan = make_folds(users, labels, options.k, options.seed);

  const std::vector<double> grid_values = options.grid.values();
  CrossvalResult result;
  result.users = rows.size();
  result.fold_points.resize(static_cast<size_t>(options.k));

  for (int fold = 0; fold < options.k; ++fold) {
    std::vector<LabeledFeatures> train, heldout;
    for (const auto& r : rows) {
      (plan.assignment.at(r.user_id) == fold ? heldout : train).push_back({r.v, r.label});
    }
    size_t organic_train = 0;
    for (const auto& t : train) {
      if (to_binary(t.label) == BinaryClass::organic) ++organic_train;
    }
    if (organic_train < 2) {
      throw StatsError("fold " + std::to_string(fold) + " has " +
                       std::to_string(organic_train) + " organic training users; need 2");
    }
    const OrganicModel model = calibrate(train, options.mask);

    size_t held_autom = 0, held_org = 0;
    for (const auto& h : heldout) {
      (to_binary(h.label) == BinaryClass::automaton ? held_autom : held_org)++;
    }

    auto& pts = result.fold_points[static_cast<size_t>(fold)];
    pts.reserve(grid_values.size() + 1);
    for (double n : grid_values) {
      size_t tp = 0, fp = 0;
      for (const auto& h : heldout) {
        if (classify(model, h.v, n).binary == BinaryClass::automaton) {
          (to_binary(h.label) == BinaryClass::automaton ? tp : fp)++;
        }
      }
      RocPoint p;
      p.threshold = n;
      p.tpr = held_autom ? static_cast<double>(tp) / static_cast<double>(held_autom) : 0.0;
      p.fpr = held_org ? static_cast<double>(fp) / static_cast<double>(held_org) : 0.0;
      pts.push_back(p);
    }
    // the n->infinity limit: nothing flagged
    pts.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});

    const WindowChoice choice = select_window(model, heldout, options.grid);
    result.fold_nopt.push_back(choice.n_opt);

    ConfusionReport report;
    for (const auto& h : heldout) {
      const bool flagged = classify(model, h.v, choice.n_opt).binary == BinaryClass::automaton;
      auto& pc = report.per_class[std::string(label_name(h.label))];
      ++pc.total;
      if (flagged) ++pc.flagged;
      if (to_binary(h.label) == BinaryClass::automaton) {
        flagged ? ++report.tp : ++report.fn;
      } else {
        flagged ? ++report.fp : ++report.tn;
      }
    }
    result.fold_reports.push_back(std::move(report));

    std::vector<std::pair<double, double>> fold_roc;
    for (const auto& p : pts) fold_roc.emplace_back(p.fpr, p.tpr);
    result.curve.fold_aucs.push_back(auc_trapezoid(std::move(fold_roc)));
  }

  // vertical averaging at matched thresholds
  auto& avg = result.curve.points;
  const size_t npts = result.fold_points.front().size();
  avg.resize(npts);
  for (size_t i = 0; i < npts; ++i) {
    avg[i].threshold = result.fold_points.front()[i].threshold;
    double ftpr = 0, ffpr = 0;
    for (int fold = 0; fold < options.k; ++fold) {
      ftpr += result.fold_points[static_cast<size_t>(fold)][i].tpr;
      ffpr += result.fold_points[static_cast<size_t>(fold)][i].fpr;
    }
    avg[i].tpr = ftpr / options.k;
    avg[i].fpr = ffpr / options.k;
  }

  std::vector<std::pair<double, double>> averaged;
  for (const auto& p : avg) averaged.emplace_back(p.fpr, p.tpr);
  result.curve.auc = auc_trapezoid(std::move(averaged));
  result.curve.n_opt = mean_of(result.fold_nopt);
  result.curve.n_opt_sigma = pop_stddev(result.fold_nopt);
  result.curve.mask = options.mask;
  return result;
}

FinalReport final_report(const OrganicModel& model, const std::vector<UserFeatures>& rows) {
  if (!model.has_window()) throw Error("final report needs a model with threshold windows");
  FinalReport report;
  for (const auto& r : rows) {
    const Verdict v = classify(model, r.v);
    const bool flagged = v.binary == BinaryClass::automaton;
    auto& pc = report.confusion.per_class[std::string(label_name(r.label))];
    ++pc.total;
    if (flagged) ++pc.flagged;
    if (to_binary(r.label) == BinaryClass::automaton) {
      flagged ? ++report.confusion.tp : ++report.confusion.fn;
    } else {
      flagged ? ++report.confusion.fp : ++report.confusion.tn;
    }
    report.verdicts.emplace_back(r, v);
  }
  return report;
}

}  // namespace orgsift
