// orgsift: classifies text-producing accounts as organic or automated from
// three language-only features: average pairwise tweet dissimilarity, word
// introduction decay exponent, and URL rate.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "orgsift/classifier.hpp"
#include "orgsift/corpus.hpp"
#include "orgsift/errors.hpp"
#include "orgsift/evaluation.hpp"
#include "orgsift/pipeline.hpp"
#include "orgsift/synth.hpp"

namespace {

using namespace orgsift;

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitDegenerateStats = 3;
constexpr int kExitInternal = 4;

struct CommonArgs {
  std::string input;
  std::string output_dir = ".";
  size_t s = 400;
  int k = 10;
  uint64_t seed = 0;
  bool seed_given = false;
  std::string mask = "all";
  std::string lcs_mode = "subsequence";
  std::string url_mode = "extended";
  std::string estimator = "mc";
  unsigned replicates = 100;
  std::string grid = "0:10:0.05";
  unsigned workers = 1;
  bool strict = false;
  std::string format = "auto";
};

void add_common_flags(CLI::App* cmd, CommonArgs& args, bool needs_input) {
  if (needs_input) {
    cmd->add_option("--input", args.input, "corpus file (JSONL or CSV) or honeypot directory")
        ->required();
    cmd->add_option("--format", args.format, "input format: auto|jsonl|csv|honeypot")
        ->check(CLI::IsMember({"auto", "jsonl", "csv", "honeypot"}));
    cmd->add_flag("--strict", args.strict, "fail on the first malformed input line");
  }
  cmd->add_option("--output-dir", args.output_dir, "directory for output artifacts");
  cmd->add_option("--tweets,-s", args.s, "tweet bin: ordinal sample size per user");
  cmd->add_option("--folds,-k", args.k, "cross-validation fold count");
  cmd->add_option("--seed", args.seed, "base RNG seed (env ORGSIFT_SEED as fallback)")
      ->each([&args](const std::string&) { args.seed_given = true; });
  cmd->add_option("--mask", args.mask, "comma list of features: dissimilarity,gamma,url (or all)");
  cmd->add_option("--lcs-mode", args.lcs_mode, "dissimilarity matcher")
      ->check(CLI::IsMember({"subsequence", "substring"}));
  cmd->add_option("--url-mode", args.url_mode, "URL marker counting")
      ->check(CLI::IsMember({"paper", "extended"}));
  cmd->add_option("--gamma-estimator", args.estimator, "gap curve estimator")
      ->check(CLI::IsMember({"mc", "analytic"}));
  cmd->add_option("--replicates", args.replicates, "Monte Carlo shuffles for the gap curve");
  cmd->add_option("--grid", args.grid, "threshold sweep lo:hi:step");
  cmd->add_option("--workers", args.workers, "worker threads (outputs do not depend on this)");
}

uint64_t resolve_seed(const CommonArgs& args) {
  if (args.seed_given) return args.seed;
  if (const char* env = std::getenv("ORGSIFT_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw InputError(std::string("ORGSIFT_SEED is not an integer: ") + env);
    }
  }
  return 1;
}

CorpusFormat parse_format(const std::string& name) {
  if (name == "jsonl") return CorpusFormat::jsonl;
  if (name == "csv") return CorpusFormat::csv;
  if (name == "honeypot") return CorpusFormat::honeypot;
  return CorpusFormat::auto_detect;
}

ExtractConfig extract_config(const CommonArgs& args) {
  ExtractConfig cfg;
  cfg.s = args.s;
  cfg.seed = resolve_seed(args);
  cfg.dissimilarity.mode =
      args.lcs_mode == "substring" ? LcsMode::substring : LcsMode::subsequence;
  cfg.url_mode = args.url_mode == "paper" ? UrlMode::paper : UrlMode::extended;
  cfg.estimator =
      args.estimator == "analytic" ? GapEstimator::analytic : GapEstimator::monte_carlo;
  cfg.replicates = args.replicates;
  cfg.workers = std::max(1u, args.workers);
  return cfg;
}

struct LoadedRun {
  Corpus corpus;
  LoadStats stats;
  ExtractConfig cfg;
  CrossvalOptions options;
  std::string canonical;
  std::string fingerprint;
  RunPaths paths;
};

LoadedRun prepare_run(const CommonArgs& args) {
  LoadedRun run;
  run.cfg = extract_config(args);
  run.options.k = args.k;
  run.options.grid = Grid::parse(args.grid);
  run.options.seed = run.cfg.seed;
  run.options.mask = mask_from_string(args.mask);
  run.canonical = config_canonical(run.cfg, run.options.mask, args.k, run.options.grid, args.strict);
  run.fingerprint = fingerprint_of(run.canonical);
  run.paths.output_dir = args.output_dir;
  std::filesystem::create_directories(run.paths.output_dir);
  if (!args.input.empty()) {
    run.corpus = load_corpus(args.input, parse_format(args.format), args.strict, &run.stats);
    if (run.corpus.empty()) {
      std::cerr << "warning: corpus is empty\n";
    }
  }
  return run;
}

int cmd_gen(const CommonArgs& args, const ClassCounts& counts, size_t tweets_per_user) {
  const uint64_t seed = args.seed_given || std::getenv("ORGSIFT_SEED") ? resolve_seed(args)
                                                                       : kStandardCorpusSeed;
  const SyntheticCorpus corpus = gen_corpus(counts, tweets_per_user, seed);
  RunPaths paths{args.output_dir};
  std::filesystem::create_directories(paths.output_dir);
  write_jsonl(corpus, paths.of("corpus.jsonl"));
  write_manifest(corpus, paths.of("manifest.json"));
  std::cout << "wrote " << corpus.records.size() << " tweets for "
            << corpus.manifest["users"].size() << " users to "
            << paths.of("corpus.jsonl").string() << "\n";
  return kExitOk;
}

int cmd_extract(const CommonArgs& args, const std::string& dump_gaps) {
  LoadedRun run = prepare_run(args);
  const ExtractionResult extraction = extract_features(run.corpus, run.cfg);
  write_features_csv(run.paths.of("features.csv"), extraction, run.cfg.s, run.fingerprint);
  write_run_report(run.paths.of("run_report.json"), "extract", run.canonical, run.fingerprint,
                   run.stats, extraction);
  if (!dump_gaps.empty()) {
    const std::filesystem::path dir = run.paths.of(dump_gaps);
    std::filesystem::create_directories(dir);
    size_t index = 0;
    for (const auto& [user, records] : run.corpus) {
      if (records.size() < run.cfg.s) {
        ++index;
        continue;
      }
      const UserSample sample =
          sample_user(user, records, run.cfg.s, derive_seed(run.cfg.seed, 0x5A317ULL, index));
      try {
        const TokenBag bag = tokenize(sample);
        const GapCurve curve =
            run.cfg.estimator == GapEstimator::analytic
                ? gap_curve_analytic(bag)
                : gap_curve_mc(bag, run.cfg.replicates,
                               derive_seed(run.cfg.seed, 0x6A33AULL, index), 1);
        write_gap_curve_csv(dir / (user + ".csv"), curve);
      } catch (const StatsError&) {
        // excluded users already appear in the run report
      }
      ++index;
    }
  }
  std::cout << "features for " << extraction.rows.size() + extraction.unlabelled.size()
            << " users -> " << run.paths.of("features.csv").string() << "\n";
  return kExitOk;
}

int cmd_crossval(const CommonArgs& args, const std::string& bins_text) {
  LoadedRun run = prepare_run(args);

  if (!bins_text.empty()) {
    const std::vector<size_t> bins = parse_bins(bins_text);
    const auto rows = bin_sweep(run.corpus, run.cfg, run.options, bins,
                                [](const std::string& w) { std::cerr << "warning: " << w << "\n"; });
    write_auc_by_bin_csv(run.paths.of("auc_by_bin.csv"), rows, run.fingerprint);
    write_bin_sweep_svg(run.paths.of("auc_by_bin.svg"), rows);
    for (const auto& r : rows) {
      std::cout << "s=" << r.s << " auc=" << format_double(r.auc) << " n_opt="
                << format_double(r.n_opt) << "\n";
    }
    return kExitOk;
  }

  ExtractionResult extraction;
  const CrossvalResult cv = crossval_corpus(run.corpus, run.cfg, run.options, &extraction);
  write_roc_csv(run.paths.of("roc.csv"), {cv.curve}, run.fingerprint);
  write_roc_svg(run.paths.of("roc.svg"), {cv.curve});
  ConfusionReport overall;
  for (const auto& fold : cv.fold_reports) {
    overall.tp += fold.tp;
    overall.fp += fold.fp;
    overall.tn += fold.tn;
    overall.fn += fold.fn;
    for (const auto& [name, pc] : fold.per_class) {
      overall.per_class[name].total += pc.total;
      overall.per_class[name].flagged += pc.flagged;
    }
  }
  write_confusion_json(run.paths.of("confusion.json"), overall, cv.fold_reports, run.fingerprint);
  write_run_report(run.paths.of("run_report.json"), "crossval", run.canonical, run.fingerprint,
                   run.stats, extraction);
  std::cout << "auc=" << format_double(cv.curve.auc) << " n_opt=" << format_double(cv.curve.n_opt)
            << " sigma_opt=" << format_double(cv.curve.n_opt_sigma) << " users=" << cv.users
            << "\n";
  return kExitOk;
}

int cmd_calibrate(const CommonArgs& args, bool per_feature_windows) {
  LoadedRun run = prepare_run(args);
  ExtractionResult extraction;
  OrganicModel model =
      calibrate_corpus(run.corpus, run.cfg, run.options, per_feature_windows, &extraction);
  model.fingerprint = run.fingerprint;
  save_model(model, run.paths.of("model.json"));
  write_run_report(run.paths.of("run_report.json"), "calibrate", run.canonical, run.fingerprint,
                   run.stats, extraction);
  std::cout << "model -> " << run.paths.of("model.json").string() << " (window n="
            << format_double(*model.shared_window) << ")\n";
  return kExitOk;
}

int cmd_classify(const CommonArgs& args, const std::string& model_path, bool mask_given,
                 bool emit_report) {
  const OrganicModel model = load_model(model_path);
  CommonArgs adjusted = args;
  if (!adjusted.seed_given && model.seed) {
    adjusted.seed = model.seed;
    adjusted.seed_given = true;
  }
  adjusted.s = args.s == 400 && model.sample_size ? model.sample_size : args.s;
  adjusted.lcs_mode = model.config.lcs_mode;
  adjusted.url_mode = model.config.url_mode;
  adjusted.estimator = model.config.estimator;
  adjusted.replicates = model.config.replicates;
  if (mask_given && mask_from_string(args.mask) != model.mask) {
    throw MaskMismatch("requested mask '" + args.mask + "' differs from model mask '" +
                       mask_to_string(model.mask) + "'");
  }

  LoadedRun run = prepare_run(adjusted);
  const ExtractionResult extraction = extract_features(run.corpus, run.cfg);

  std::vector<UserFeatures> rows = extraction.rows;
  rows.insert(rows.end(), extraction.unlabelled.begin(), extraction.unlabelled.end());
  std::sort(rows.begin(), rows.end(),
            [](const UserFeatures& a, const UserFeatures& b) { return a.user_id < b.user_id; });

  std::vector<std::pair<UserFeatures, Verdict>> verdicts;
  verdicts.reserve(rows.size());
  for (const auto& r : rows) verdicts.emplace_back(r, classify(model, r.v));
  write_verdicts_csv(run.paths.of("verdicts.csv"), verdicts, model.fingerprint);
  write_run_report(run.paths.of("run_report.json"), emit_report ? "report" : "classify",
                   run.canonical, model.fingerprint, run.stats, extraction);

  if (emit_report) {
    const FinalReport report = final_report(model, extraction.rows);
    write_confusion_json(run.paths.of("confusion.json"), report.confusion, {}, model.fingerprint);
    write_fences_csv(run.paths.of("fences.csv"), model, model.fingerprint);
    std::cout << "organic recall=" << format_double(1.0 - report.confusion.fpr())
              << " automaton recall=" << format_double(report.confusion.tpr()) << "\n";
  } else {
    size_t automatons = 0;
    for (const auto& [row, v] : verdicts) {
      if (v.binary == BinaryClass::automaton) ++automatons;
    }
    std::cout << automatons << "/" << verdicts.size() << " users classified Automaton -> "
              << run.paths.of("verdicts.csv").string() << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"orgsift: organic vs automated text account classification"};
  app.require_subcommand(1);

  CommonArgs args;

  auto* gen = app.add_subcommand("gen", "generate a labelled synthetic corpus");
  ClassCounts counts{120, 30, 30, 20};
  size_t tweets_per_user = 400;
  gen->add_option("--humans", counts.human, "human user count");
  gen->add_option("--robots", counts.robot, "robot user count");
  gen->add_option("--cyborgs", counts.cyborg, "cyborg user count");
  gen->add_option("--spammers", counts.spammer, "spammer user count");
  gen->add_option("--tweets-per-user", tweets_per_user, "tweets generated per user");
  add_common_flags(gen, args, false);

  auto* extract = app.add_subcommand("extract", "compute per-user feature vectors");
  std::string dump_gaps;
  extract->add_option("--dump-gaps", dump_gaps, "also write per-user gap curves into this subdir");
  add_common_flags(extract, args, true);

  auto* crossval = app.add_subcommand("crossval", "k-fold cross-validation ROC/AUC");
  std::string bins_text;
  crossval->add_option("--bins", bins_text, "tweet bins, e.g. 25..500:25 or 25,50,400");
  add_common_flags(crossval, args, true);

  auto* calibrate = app.add_subcommand("calibrate", "fit the organic model and threshold window");
  bool per_feature_windows = false;
  calibrate->add_flag("--per-feature-windows", per_feature_windows,
                      "select one window per feature instead of a shared one");
  add_common_flags(calibrate, args, true);

  auto* classify = app.add_subcommand("classify", "apply a calibrated model to a corpus");
  std::string model_path;
  classify->add_option("--model", model_path, "model.json from calibrate")->required();
  add_common_flags(classify, args, true);

  auto* report = app.add_subcommand("report", "confusion matrix and fence plot data");
  std::string report_model_path;
  report->add_option("--model", report_model_path, "model.json from calibrate")->required();
  add_common_flags(report, args, true);

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_gen(args, counts, tweets_per_user);
    if (extract->parsed()) return cmd_extract(args, dump_gaps);
    if (crossval->parsed()) return cmd_crossval(args, bins_text);
    if (calibrate->parsed()) return cmd_calibrate(args, per_feature_windows);
    if (classify->parsed()) {
      return cmd_classify(args, model_path, classify->count("--mask") > 0, false);
    }
    if (report->parsed()) {
      return cmd_classify(args, report_model_path, report->count("--mask") > 0, true);
    }
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const StatsError& e) {
    std::cerr << "degenerate statistics: " << e.what() << "\n";
    return kExitDegenerateStats;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitOk;
}
