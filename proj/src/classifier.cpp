#include "orgsift/classifier.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "orgsift/errors.hpp"

namespace orgsift {

namespace {

using nlohmann::json;

// Relative variance floor below which a feature counts as constant.
constexpr double kVarianceEps = 1e-12;

json stats_to_json(const OrganicModel& model) {
  json stats = json::object();
  for (Feature f : kFeatures) {
    if (!(model.mask & feature_bit(f))) continue;
    stats[feature_name(f)] = {{"mean", model.stats[static_cast<unsigned>(f)].mean},
                              {"stddev", model.stats[static_cast<unsigned>(f)].stddev}};
  }
  return stats;
}

bool violates(const OrganicModel& model, Feature f, double z_signed, double n) {
  if (model.one_sided) {
    // suspicious directions: low dissimilarity, low gamma, high url
    const double directed = f == Feature::url ? z_signed : -z_signed;
    return directed > n;
  }
  return std::abs(z_signed) > n;
}

}  // namespace

const char* feature_name(Feature f) {
  switch (f) {
    case Feature::dissimilarity: return "dissimilarity";
    case Feature::gamma: return "gamma";
    case Feature::url: return "url";
  }
  return "dissimilarity";
}

std::string mask_to_string(FeatureMask mask) {
  std::string out;
  for (Feature f : kFeatures) {
    if (mask & feature_bit(f)) {
      if (!out.empty()) out += ',';
      out += feature_name(f);
    }
  }
  return out;
}

FeatureMask mask_from_string(std::string_view names) {
  FeatureMask mask = 0;
  size_t pos = 0;
  while (pos <= names.size()) {
    const size_t comma = names.find(',', pos);
    const std::string_view name =
        names.substr(pos, comma == std::string_view::npos ? names.size() - pos : comma - pos);
    if (name == "dissimilarity") mask |= feature_bit(Feature::dissimilarity);
    else if (name == "gamma") mask |= feature_bit(Feature::gamma);
    else if (name == "url") mask |= feature_bit(Feature::url);
    else if (name == "all") mask = kAllFeatures;
    else if (!name.empty()) throw InputError("unknown feature name: '" + std::string(name) + "'");
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  if (mask == 0) throw InputError("feature mask must name at least one feature");
  return mask;
}

double feature_value(const FeatureVector& v, Feature f) {
  switch (f) {
    case Feature::dissimilarity: return v.mu_lcs;
    case Feature::gamma: return v.gamma;
    case Feature::url: return v.mu_url;
  }
  return v.mu_lcs;
}

bool OrganicModel::has_window() const {
  if (shared_window) return true;
  for (Feature f : kFeatures) {
    if ((mask & feature_bit(f)) && !feature_windows[static_cast<unsigned>(f)]) return false;
  }
  return true;
}

double OrganicModel::window_for(Feature f) const {
  if (const auto& w = feature_windows[static_cast<unsigned>(f)]) return *w;
  if (shared_window) return *shared_window;
  throw Error("model has no threshold window for feature " + std::string(feature_name(f)));
}

OrganicModel calibrate(const std::vector<LabeledFeatures>& training, FeatureMask mask) {
  if (mask == 0) throw InputError("empty feature mask");
  std::vector<const FeatureVector*> organics;
  for (const auto& row : training) {
    if (to_binary(row.label) == BinaryClass::organic) organics.push_back(&row.v);
  }
  if (organics.size() < 2) {
    throw InsufficientTraining("need at least 2 organic training vectors, got " +
                               std::to_string(organics.size()));
  }

  OrganicModel model;
  model.mask = mask;
  const double count = static_cast<double>(organics.size());
  for (Feature f : kFeatures) {
    if (!(mask & feature_bit(f))) continue;
    double sum = 0.0;
    for (const auto* v : organics) sum += feature_value(*v, f);
    const double mean = sum / count;
    double ss = 0.0;
    for (const auto* v : organics) {
      const double d = feature_value(*v, f) - mean;
      ss += d * d;
    }
    const double stddev = std::sqrt(ss / count);
    if (stddev <= kVarianceEps * std::max(std::abs(mean), 1.0)) {
      throw DegenerateFeature(feature_name(f));
    }
    model.stats[static_cast<unsigned>(f)] = {mean, stddev};
  }
  return model;
}

Verdict classify(const OrganicModel& model, const FeatureVector& v, double n) {
  Verdict verdict;
  for (Feature f : kFeatures) {
    if (!(model.mask & feature_bit(f))) continue;
    const auto& st = model.stats[static_cast<unsigned>(f)];
    const double z = (feature_value(v, f) - st.mean) / st.stddev;
    verdict.z[static_cast<unsigned>(f)] = z;
    if (violates(model, f, z, n)) verdict.violated |= feature_bit(f);
  }
  verdict.binary = verdict.violated ? BinaryClass::automaton : BinaryClass::organic;
  return verdict;
}

Verdict classify(const OrganicModel& model, const FeatureVector& v) {
  Verdict verdict;
  for (Feature f : kFeatures) {
    if (!(model.mask & feature_bit(f))) continue;
    const auto& st = model.stats[static_cast<unsigned>(f)];
    const double z = (feature_value(v, f) - st.mean) / st.stddev;
    verdict.z[static_cast<unsigned>(f)] = z;
    if (violates(model, f, z, model.window_for(f))) verdict.violated |= feature_bit(f);
  }
  verdict.binary = verdict.violated ? BinaryClass::automaton : BinaryClass::organic;
  return verdict;
}

std::vector<double> Grid::values() const {
  if (step <= 0 || hi < lo) throw InputError("threshold grid must have positive step and hi >= lo");
  const size_t count = static_cast<size_t>(std::floor((hi - lo) / step + 0.5)) + 1;
  std::vector<double> out;
  out.reserve(count);
  for (size_t i = 0; i < count; ++i) out.push_back(lo + static_cast<double>(i) * step);
  return out;
}

Grid Grid::parse(std::string_view text) {
  Grid g;
  const size_t c1 = text.find(':');
  const size_t c2 = c1 == std::string_view::npos ? c1 : text.find(':', c1 + 1);
  try {
    if (c1 == std::string_view::npos) {
      g.lo = g.hi = std::stod(std::string(text));
      g.step = 1.0;
    } else if (c2 == std::string_view::npos) {
      throw std::invalid_argument("expected lo:hi:step");
    } else {
      g.lo = std::stod(std::string(text.substr(0, c1)));
      g.hi = std::stod(std::string(text.substr(c1 + 1, c2 - c1 - 1)));
      g.step = std::stod(std::string(text.substr(c2 + 1)));
    }
  } catch (const std::exception&) {
    throw InputError("bad grid spec '" + std::string(text) + "', expected lo:hi:step");
  }
  if (g.step <= 0 || g.hi < g.lo) {
    throw InputError("bad grid spec '" + std::string(text) + "': need step > 0 and hi >= lo");
  }
  return g;
}

WindowChoice select_window(const OrganicModel& model, const std::vector<LabeledFeatures>& validation,
                           const Grid& grid) {
  size_t automatons = 0, organics = 0;
  for (const auto& row : validation) {
    (to_binary(row.label) == BinaryClass::automaton ? automatons : organics)++;
  }
  if (automatons == 0 || organics == 0) {
    throw StatsError("window selection needs both classes in the validation set");
  }

  WindowChoice best;
  bool first = true;
  for (double n : grid.values()) {
    size_t tp = 0, fp = 0;
    for (const auto& row : validation) {
      const Verdict v = classify(model, row.v, n);
      if (v.binary == BinaryClass::automaton) {
        (to_binary(row.label) == BinaryClass::automaton ? tp : fp)++;
      }
    }
    const double tpr = static_cast<double>(tp) / static_cast<double>(automatons);
    const double fpr = static_cast<double>(fp) / static_cast<double>(organics);
    const double j = tpr - fpr;
    // >= so exact ties resolve to the larger window (fewer flagged humans)
    if (first || j >= best.youden) {
      best = {n, j, tpr, fpr};
      first = false;
    }
  }
  return best;
}

std::string model_to_json(const OrganicModel& model) {
  json j;
  j["version"] = model.version;
  j["mask"] = mask_to_string(model.mask);
  j["stats"] = stats_to_json(model);
  j["one_sided"] = model.one_sided;
  j["sample_size"] = model.sample_size;
  if (model.shared_window) j["window"] = *model.shared_window;
  if (model.shared_window_sigma) j["window_sigma"] = *model.shared_window_sigma;
  json fw = json::object();
  json fws = json::object();
  for (Feature f : kFeatures) {
    const unsigned i = static_cast<unsigned>(f);
    if (model.feature_windows[i]) fw[feature_name(f)] = *model.feature_windows[i];
    if (model.feature_window_sigmas[i]) fws[feature_name(f)] = *model.feature_window_sigmas[i];
  }
  if (!fw.empty()) j["feature_windows"] = fw;
  if (!fws.empty()) j["feature_window_sigmas"] = fws;
  j["config"] = {{"lcs_mode", model.config.lcs_mode},
                 {"case_fold", model.config.case_fold},
                 {"url_mode", model.config.url_mode},
                 {"estimator", model.config.estimator},
                 {"replicates", model.config.replicates},
                 {"stddev_divisor", "N"}};
  j["provenance"] = {{"seed", model.seed},
                     {"folds", model.folds},
                     {"fold_windows", model.fold_windows},
                     {"fingerprint", model.fingerprint}};
  return j.dump(2) + "\n";
}

OrganicModel model_from_json(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw InputError("model file is not a JSON object");
  if (!j.contains("version") || !j["version"].is_number_integer() ||
      j["version"].get<int>() != OrganicModel::kVersion) {
    throw InputError("unsupported model version");
  }
  OrganicModel model;
  try {
    model.mask = mask_from_string(j.at("mask").get<std::string>());
    for (Feature f : kFeatures) {
      if (!(model.mask & feature_bit(f))) continue;
      const json& st = j.at("stats").at(feature_name(f));
      const unsigned i = static_cast<unsigned>(f);
      model.stats[i].mean = st.at("mean").get<double>();
      model.stats[i].stddev = st.at("stddev").get<double>();
      if (!(model.stats[i].stddev > 0)) throw InputError("model stddev must be positive");
    }
    model.one_sided = j.at("one_sided").get<bool>();
    model.sample_size = j.at("sample_size").get<size_t>();
    if (j.contains("window")) model.shared_window = j["window"].get<double>();
    if (j.contains("window_sigma")) model.shared_window_sigma = j["window_sigma"].get<double>();
    if (j.contains("feature_windows")) {
      for (Feature f : kFeatures) {
        const unsigned i = static_cast<unsigned>(f);
        if (j["feature_windows"].contains(feature_name(f))) {
          model.feature_windows[i] = j["feature_windows"][feature_name(f)].get<double>();
        }
      }
    }
    if (j.contains("feature_window_sigmas")) {
      for (Feature f : kFeatures) {
        const unsigned i = static_cast<unsigned>(f);
        if (j["feature_window_sigmas"].contains(feature_name(f))) {
          model.feature_window_sigmas[i] =
              j["feature_window_sigmas"][feature_name(f)].get<double>();
        }
      }
    }
    const json& cfg = j.at("config");
    model.config.lcs_mode = cfg.at("lcs_mode").get<std::string>();
    model.config.case_fold = cfg.at("case_fold").get<bool>();
    model.config.url_mode = cfg.at("url_mode").get<std::string>();
    model.config.estimator = cfg.at("estimator").get<std::string>();
    model.config.replicates = cfg.at("replicates").get<unsigned>();
    const json& prov = j.at("provenance");
    model.seed = prov.at("seed").get<uint64_t>();
    model.folds = prov.at("folds").get<int>();
    model.fold_windows = prov.at("fold_windows").get<std::vector<double>>();
    model.fingerprint = prov.at("fingerprint").get<std::string>();
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed model file: ") + e.what());
  }
  return model;
}

void save_model(const OrganicModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << model_to_json(model);
}

OrganicModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open model " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return model_from_json(buf.str());
}

}  // namespace orgsift
