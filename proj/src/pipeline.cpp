#include "orgsift/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "orgsift/errors.hpp"
#include "orgsift/parallel.hpp"
#include "orgsift/rng.hpp"

namespace orgsift {

namespace {

using nlohmann::json;

constexpr uint64_t kSampleStream = 0x5A317ULL;
constexpr uint64_t kGammaStream = 0x6A33AULL;

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out += '"';
  return out;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  return out;
}

const char* url_mode_name(UrlMode mode) {
  return mode == UrlMode::paper ? "paper" : "extended";
}

const char* lcs_mode_name(LcsMode mode) {
  return mode == LcsMode::substring ? "substring" : "subsequence";
}

const char* estimator_name(GapEstimator estimator) {
  switch (estimator) {
    case GapEstimator::monte_carlo: return "mc";
    case GapEstimator::exhaustive: return "exhaustive";
    case GapEstimator::analytic: return "analytic";
  }
  return "mc";
}

double mean_of(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
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

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

ExtractionResult extract_features(const Corpus& corpus, const ExtractConfig& config) {
  if (config.s < 2) throw InputError("feature extraction needs a tweet bin of at least 2");

  struct Candidate {
    const std::string* user;
    const std::vector<TweetRecord>* records;
  };
  std::vector<Candidate> eligible;
  ExtractionResult result;
  for (const auto& [user, records] : corpus) {
    if (records.size() < config.s) {
      result.excluded.push_back(
          {user, "insufficient tweets: " + std::to_string(records.size()) + " < " +
                     std::to_string(config.s)});
      continue;
    }
    eligible.push_back({&user, &records});
  }

  struct Slot {
    UserFeatures row;
    std::optional<ClassLabel> label;
    std::string error;
    bool failed = false;
  };
  std::vector<Slot> slots(eligible.size());

  parallel_chunks(eligible.size(), config.workers, 1, [&](size_t lo, size_t hi) {
    for (size_t i = lo; i < hi; ++i) {
      Slot& slot = slots[i];
      const auto& [user, records] = eligible[i];
      try {
        const UserSample sample =
            sample_user(*user, *records, config.s, derive_seed(config.seed, kSampleStream, i));
        slot.row.user_id = *user;
        slot.row.v.mu_lcs = avg_dissimilarity(sample, config.dissimilarity, 1);
        slot.row.v.gamma =
            gamma_feature(sample, config.estimator, config.replicates,
                          derive_seed(config.seed, kGammaStream, i), &slot.row.v.gamma_degenerate, 1);
        slot.row.v.mu_url = url_rate(sample, config.url_mode);
        slot.label = user_label(*records);
        if (slot.label) slot.row.label = *slot.label;
      } catch (const StatsError& e) {
        slot.failed = true;
        slot.error = e.what();
      }
    }
  });

  for (size_t i = 0; i < slots.size(); ++i) {
    Slot& slot = slots[i];
    if (slot.failed) {
      result.excluded.push_back({*eligible[i].user, slot.error});
    } else if (slot.label) {
      result.rows.push_back(std::move(slot.row));
    } else {
      result.unlabelled.push_back(std::move(slot.row));
    }
  }
  return result;
}

std::string config_canonical(const ExtractConfig& config, FeatureMask mask, int folds,
                             const Grid& grid, bool strict) {
  std::ostringstream out;
  out << "s=" << config.s << ";k=" << folds << ";seed=" << config.seed
      << ";mask=" << mask_to_string(mask) << ";lcs=" << lcs_mode_name(config.dissimilarity.mode)
      << ";case_fold=" << (config.dissimilarity.case_fold ? 1 : 0)
      << ";url=" << url_mode_name(config.url_mode)
      << ";gamma=" << estimator_name(config.estimator) << ";replicates=" << config.replicates
      << ";grid=" << format_double(grid.lo) << ":" << format_double(grid.hi) << ":"
      << format_double(grid.step) << ";strict=" << (strict ? 1 : 0);
  return out.str();
}

std::string fingerprint_of(const std::string& canonical) {
  uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

void write_features_csv(const std::filesystem::path& path, const ExtractionResult& result,
                        size_t s, const std::string& fingerprint) {
  auto out = open_out(path);
  out << "user_id,s,mu_lcs,gamma,mu_url,label,fingerprint\n";
  auto emit = [&](const UserFeatures& row, bool labelled) {
    out << csv_escape(row.user_id) << ',' << s << ',' << format_double(row.v.mu_lcs) << ','
        << format_double(row.v.gamma) << ',' << format_double(row.v.mu_url) << ','
        << (labelled ? label_name(row.label) : std::string_view{}) << ',' << fingerprint << '\n';
  };
  // labelled and unlabelled rows interleaved back into user-id order
  size_t a = 0, b = 0;
  while (a < result.rows.size() || b < result.unlabelled.size()) {
    if (b >= result.unlabelled.size() ||
        (a < result.rows.size() && result.rows[a].user_id < result.unlabelled[b].user_id)) {
      emit(result.rows[a++], true);
    } else {
      emit(result.unlabelled[b++], false);
    }
  }
}

void write_gap_curve_csv(const std::filesystem::path& path, const GapCurve& curve) {
  auto out = open_out(path);
  out << "n,m_bar,alpha\n";
  for (size_t n = 1; n <= curve.m_bar.size(); ++n) {
    const double m = curve.m_bar[n - 1];
    out << n << ',' << format_double(m) << ',' << format_double(1.0 / m) << '\n';
  }
}

void write_run_report(const std::filesystem::path& path, const std::string& command,
                      const std::string& canonical, const std::string& fingerprint,
                      const LoadStats& load, const ExtractionResult& extraction) {
  json j;
  j["command"] = command;
  j["config"] = canonical;
  j["config_fingerprint"] = fingerprint;
  j["records_loaded"] = load.records;
  j["dropped_empty_after_clean"] = load.dropped_empty;
  j["skipped_malformed_lines"] = load.skipped_lines;
  j["users_loaded"] = load.per_user.size();
  j["users_with_features"] = extraction.rows.size() + extraction.unlabelled.size();
  j["users_labelled"] = extraction.rows.size();
  json excluded = json::array();
  for (const auto& e : extraction.excluded) {
    excluded.push_back({{"user_id", e.user_id}, {"reason", e.reason}});
  }
  j["excluded_users"] = std::move(excluded);
  json degenerate = json::array();
  for (const auto& r : extraction.rows) {
    if (r.v.gamma_degenerate) degenerate.push_back(r.user_id);
  }
  for (const auto& r : extraction.unlabelled) {
    if (r.v.gamma_degenerate) degenerate.push_back(r.user_id);
  }
  j["gamma_degenerate_users"] = std::move(degenerate);
  open_out(path) << j.dump(2) << '\n';
}

void write_roc_csv(const std::filesystem::path& path, const std::vector<RocCurve>& curves,
                   const std::string& fingerprint) {
  auto out = open_out(path);
  out << "# config_fingerprint=" << fingerprint << "\n";
  out << "s,mask,threshold,fpr,tpr,auc,n_opt,n_opt_sigma\n";
  for (const auto& curve : curves) {
    for (const auto& p : curve.points) {
      out << curve.tweet_bin << ',' << mask_to_string(curve.mask) << ','
          << format_double(p.threshold) << ',' << format_double(p.fpr) << ','
          << format_double(p.tpr) << ',' << format_double(curve.auc) << ','
          << format_double(curve.n_opt) << ',' << format_double(curve.n_opt_sigma) << '\n';
    }
  }
}

void write_auc_by_bin_csv(const std::filesystem::path& path, const std::vector<BinRow>& rows,
                          const std::string& fingerprint) {
  auto out = open_out(path);
  out << "# config_fingerprint=" << fingerprint << "\n";
  out << "s,auc,auc_stderr,mean_tpr,tpr_stderr,mean_fpr,fpr_stderr,n_opt,n_opt_sigma,eligible_users\n";
  for (const auto& r : rows) {
    out << r.s << ',' << format_double(r.auc) << ',' << format_double(r.auc_stderr) << ','
        << format_double(r.mean_tpr) << ',' << format_double(r.tpr_stderr) << ','
        << format_double(r.mean_fpr) << ',' << format_double(r.fpr_stderr) << ','
        << format_double(r.n_opt) << ',' << format_double(r.n_opt_sigma) << ','
        << r.eligible_users << '\n';
  }
}

namespace {
json confusion_to_json(const ConfusionReport& c) {
  json per_class = json::object();
  for (const auto& [name, pc] : c.per_class) {
    per_class[name] = {{"total", pc.total}, {"flagged_automaton", pc.flagged}};
  }
  return {{"tp", c.tp},
          {"fp", c.fp},
          {"tn", c.tn},
          {"fn", c.fn},
          {"tpr", c.tpr()},
          {"fpr", c.fpr()},
          {"accuracy", c.accuracy()},
          {"per_class", std::move(per_class)}};
}
}  // namespace

void write_confusion_json(const std::filesystem::path& path, const ConfusionReport& confusion,
                          const std::vector<ConfusionReport>& per_fold,
                          const std::string& fingerprint) {
  json j;
  j["config_fingerprint"] = fingerprint;
  j["overall"] = confusion_to_json(confusion);
  json folds = json::array();
  for (const auto& f : per_fold) folds.push_back(confusion_to_json(f));
  j["per_fold"] = std::move(folds);
  open_out(path) << j.dump(2) << '\n';
}

void write_fences_csv(const std::filesystem::path& path, const OrganicModel& model,
                      const std::string& fingerprint) {
  auto out = open_out(path);
  out << "# config_fingerprint=" << fingerprint << "\n";
  out << "feature,mean,stddev,window_n,lower,upper\n";
  for (Feature f : kFeatures) {
    if (!(model.mask & feature_bit(f))) continue;
    const auto& st = model.stats[static_cast<unsigned>(f)];
    const double n = model.window_for(f);
    out << feature_name(f) << ',' << format_double(st.mean) << ',' << format_double(st.stddev)
        << ',' << format_double(n) << ',' << format_double(st.mean - n * st.stddev) << ','
        << format_double(st.mean + n * st.stddev) << '\n';
  }
}

void write_verdicts_csv(const std::filesystem::path& path,
                        const std::vector<std::pair<UserFeatures, Verdict>>& verdicts,
                        const std::string& fingerprint) {
  auto out = open_out(path);
  out << "# config_fingerprint=" << fingerprint << "\n";
  out << "user_id,verdict,mu_lcs,gamma,mu_url,z_dissimilarity,z_gamma,z_url,violated,label\n";
  for (const auto& [row, verdict] : verdicts) {
    out << csv_escape(row.user_id) << ','
        << (verdict.binary == BinaryClass::automaton ? "Automaton" : "Organic") << ','
        << format_double(row.v.mu_lcs) << ',' << format_double(row.v.gamma) << ','
        << format_double(row.v.mu_url) << ',' << format_double(verdict.z[0]) << ','
        << format_double(verdict.z[1]) << ',' << format_double(verdict.z[2]) << ','
        << mask_to_string(verdict.violated) << ',' << label_name(row.label) << '\n';
  }
}

namespace {

struct SvgCanvas {
  std::ostringstream body;
  double width = 720, height = 520;
  double left = 70, right = 20, top = 40, bottom = 60;

  double x(double u) const { return left + u * (width - left - right); }
  double y(double u) const { return height - bottom - u * (height - top - bottom); }

  static std::string fixed(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
  }

  void line(double x1, double y1, double x2, double y2, const char* color, double w = 1.0) {
    body << "<line x1='" << fixed(x1) << "' y1='" << fixed(y1) << "' x2='" << fixed(x2)
         << "' y2='" << fixed(y2) << "' stroke='" << color << "' stroke-width='" << fixed(w)
         << "'/>\n";
  }

  void text(double px, double py, const std::string& s, const char* anchor = "middle",
            int size = 12) {
    body << "<text x='" << fixed(px) << "' y='" << fixed(py) << "' font-size='" << size
         << "' font-family='sans-serif' text-anchor='" << anchor << "'>" << s << "</text>\n";
  }

  void polyline(const std::vector<std::pair<double, double>>& pts, const char* color) {
    body << "<polyline fill='none' stroke='" << color << "' stroke-width='1.5' points='";
    for (const auto& [px, py] : pts) body << fixed(px) << ',' << fixed(py) << ' ';
    body << "'/>\n";
  }

  void axes(const std::string& xlabel, const std::string& ylabel, double x_lo, double x_hi,
            double y_lo, double y_hi) {
    line(x(0), y(0), x(1), y(0), "#222");
    line(x(0), y(0), x(0), y(1), "#222");
    for (int t = 0; t <= 5; ++t) {
      const double u = t / 5.0;
      char label[32];
      std::snprintf(label, sizeof(label), "%.2g", x_lo + u * (x_hi - x_lo));
      text(x(u), y(0) + 18, label);
      line(x(u), y(0), x(u), y(0) + 4, "#222");
      std::snprintf(label, sizeof(label), "%.2g", y_lo + u * (y_hi - y_lo));
      text(x(0) - 8, y(u) + 4, label, "end");
      line(x(0) - 4, y(u), x(0), y(u), "#222");
    }
    text((x(0) + x(1)) / 2, height - 16, xlabel);
    body << "<text x='18' y='" << fixed((y(0) + y(1)) / 2)
         << "' font-size='12' font-family='sans-serif' text-anchor='middle' transform='rotate(-90 18 "
         << fixed((y(0) + y(1)) / 2) << ")'>" << ylabel << "</text>\n";
  }

  void save(const std::filesystem::path& path, const std::string& title) {
    auto out = open_out(path);
    out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width << "' height='" << height
        << "' viewBox='0 0 " << width << ' ' << height << "'>\n"
        << "<rect width='100%' height='100%' fill='white'/>\n"
        << "<text x='" << fixed(width / 2)
        << "' y='22' font-size='15' font-family='sans-serif' text-anchor='middle'>" << title
        << "</text>\n"
        << body.str() << "</svg>\n";
  }
};

const char* kPalette[] = {"#1b6ca8", "#c0392b", "#27ae60", "#8e44ad", "#d68910", "#16a085"};

}  // namespace

void write_roc_svg(const std::filesystem::path& path, const std::vector<RocCurve>& curves) {
  SvgCanvas svg;
  svg.axes("false positive rate", "true positive rate", 0, 1, 0, 1);
  svg.line(svg.x(0), svg.y(0), svg.x(1), svg.y(1), "#bbb");
  size_t color = 0;
  double legend_y = svg.top + 10;
  for (const auto& curve : curves) {
    std::vector<std::pair<double, double>> pts;
    for (const auto& p : curve.points) {
      if (!std::isfinite(p.threshold) && p.fpr == 0 && p.tpr == 0) continue;
      pts.emplace_back(svg.x(p.fpr), svg.y(p.tpr));
    }
    std::sort(pts.begin(), pts.end());
    const char* c = kPalette[color % 6];
    svg.polyline(pts, c);
    char label[96];
    std::snprintf(label, sizeof(label), "s=%zu %s AUC=%.3f", curve.tweet_bin,
                  mask_to_string(curve.mask).c_str(), curve.auc);
    svg.body << "<rect x='" << SvgCanvas::fixed(svg.x(1) - 210) << "' y='"
             << SvgCanvas::fixed(legend_y - 9) << "' width='10' height='10' fill='" << c
             << "'/>\n";
    svg.text(svg.x(1) - 195, legend_y, label, "start", 11);
    legend_y += 16;
    ++color;
  }
  svg.save(path, "receiver operating characteristic");
}

void write_bin_sweep_svg(const std::filesystem::path& path, const std::vector<BinRow>& rows) {
  SvgCanvas svg;
  if (rows.empty()) {
    svg.save(path, "accuracy by tweet bin (no data)");
    return;
  }
  double s_lo = static_cast<double>(rows.front().s), s_hi = s_lo;
  for (const auto& r : rows) {
    s_lo = std::min(s_lo, static_cast<double>(r.s));
    s_hi = std::max(s_hi, static_cast<double>(r.s));
  }
  if (s_hi == s_lo) s_hi = s_lo + 1;
  svg.axes("tweets per user", "AUC", s_lo, s_hi, 0.5, 1.0);
  std::vector<std::pair<double, double>> pts;
  for (const auto& r : rows) {
    const double u = (static_cast<double>(r.s) - s_lo) / (s_hi - s_lo);
    const double v = (r.auc - 0.5) / 0.5;
    pts.emplace_back(svg.x(u), svg.y(std::clamp(v, 0.0, 1.0)));
    const double e = r.auc_stderr / 0.5;
    svg.line(svg.x(u), svg.y(std::clamp(v - e, 0.0, 1.0)), svg.x(u),
             svg.y(std::clamp(v + e, 0.0, 1.0)), kPalette[0]);
  }
  svg.polyline(pts, kPalette[0]);
  svg.save(path, "accuracy by tweet bin");
}

CrossvalResult crossval_corpus(const Corpus& corpus, const ExtractConfig& extract,
                               const CrossvalOptions& options, ExtractionResult* extraction) {
  ExtractionResult features = extract_features(corpus, extract);
  for (const auto& row : features.unlabelled) {
    features.excluded.push_back({row.user_id, "no gold label"});
  }
  features.unlabelled.clear();
  CrossvalResult result = crossval_features(features.rows, options);
  result.curve.tweet_bin = extract.s;
  if (extraction) *extraction = std::move(features);
  return result;
}

std::vector<BinRow> bin_sweep(const Corpus& corpus, const ExtractConfig& extract,
                              const CrossvalOptions& options, const std::vector<size_t>& bins,
                              const std::function<void(const std::string&)>& warn) {
  std::vector<BinRow> rows;
  for (size_t s : bins) {
    ExtractConfig cfg = extract;
    cfg.s = s;
    CrossvalResult cv;
    try {
      ExtractionResult extraction;
      cv = crossval_corpus(corpus, cfg, options, &extraction);
    } catch (const StatsError& e) {
      if (warn) warn("bin s=" + std::to_string(s) + " skipped: " + e.what());
      continue;
    }
    BinRow row;
    row.s = s;
    row.auc = cv.curve.auc;
    row.auc_stderr = stderr_of(cv.curve.fold_aucs);
    std::vector<double> tprs, fprs;
    for (const auto& rep : cv.fold_reports) {
      tprs.push_back(rep.tpr());
      fprs.push_back(rep.fpr());
    }
    row.mean_tpr = mean_of(tprs);
    row.tpr_stderr = stderr_of(tprs);
    row.mean_fpr = mean_of(fprs);
    row.fpr_stderr = stderr_of(fprs);
    row.n_opt = cv.curve.n_opt;
    row.n_opt_sigma = cv.curve.n_opt_sigma;
    row.eligible_users = cv.users;
    rows.push_back(row);
  }
  return rows;
}

OrganicModel calibrate_corpus(const Corpus& corpus, const ExtractConfig& extract,
                              const CrossvalOptions& options, bool per_feature_windows,
                              ExtractionResult* extraction_out) {
  ExtractionResult extraction;
  const CrossvalResult cv = crossval_corpus(corpus, extract, options, &extraction);

  std::vector<LabeledFeatures> all;
  for (const auto& row : extraction.rows) all.push_back({row.v, row.label});
  OrganicModel model = calibrate(all, options.mask);
  model.sample_size = extract.s;
  model.seed = options.seed;
  model.folds = options.k;
  model.fold_windows = cv.fold_nopt;
  model.shared_window = cv.curve.n_opt;
  model.shared_window_sigma = cv.curve.n_opt_sigma;
  model.config.lcs_mode = lcs_mode_name(extract.dissimilarity.mode);
  model.config.case_fold = extract.dissimilarity.case_fold;
  model.config.url_mode = url_mode_name(extract.url_mode);
  model.config.estimator = estimator_name(extract.estimator);
  model.config.replicates = extract.replicates;

  if (per_feature_windows) {
    // single-feature sweeps give each feature its own fence
    for (Feature f : kFeatures) {
      if (!(options.mask & feature_bit(f))) continue;
      CrossvalOptions single = options;
      single.mask = feature_bit(f);
      const CrossvalResult one = crossval_features(extraction.rows, single);
      model.feature_windows[static_cast<unsigned>(f)] = one.curve.n_opt;
      model.feature_window_sigmas[static_cast<unsigned>(f)] = one.curve.n_opt_sigma;
    }
  }
  if (extraction_out) *extraction_out = std::move(extraction);
  return model;
}

std::vector<size_t> parse_bins(std::string_view text) {
  std::vector<size_t> bins;
  auto parse_one = [](std::string_view v) -> size_t {
    size_t out = 0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size() || out == 0) {
      throw InputError("bad bin value '" + std::string(v) + "'");
    }
    return out;
  };
  const size_t range = text.find("..");
  if (range != std::string_view::npos) {
    const size_t colon = text.find(':', range);
    const size_t lo = parse_one(text.substr(0, range));
    const size_t hi =
        parse_one(text.substr(range + 2, colon == std::string_view::npos ? std::string_view::npos
                                                                         : colon - range - 2));
    const size_t step = colon == std::string_view::npos ? 25 : parse_one(text.substr(colon + 1));
    if (hi < lo) throw InputError("bin range hi < lo");
    for (size_t s = lo; s <= hi; s += step) bins.push_back(s);
    return bins;
  }
  size_t pos = 0;
  while (pos <= text.size()) {
    const size_t comma = text.find(',', pos);
    const auto piece =
        text.substr(pos, comma == std::string_view::npos ? text.size() - pos : comma - pos);
    if (!piece.empty()) bins.push_back(parse_one(piece));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  if (bins.empty()) throw InputError("empty bin list");
  return bins;
}

}  // namespace orgsift
