/*
 * Copyright 2026 The cpkit Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "cpkit/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <optional>
#include <sstream>

#include "CLI11.hpp"

#include "cpkit/conformal.hpp"
#include "cpkit/consensus.hpp"
#include "cpkit/errors.hpp"
#include "cpkit/io.hpp"
#include "cpkit/metrics.hpp"
#include "cpkit/random.hpp"
#include "cpkit/synthetic.hpp"
#include "cpkit/uncertainty.hpp"

namespace cpkit::cli {
namespace {

namespace fs = std::filesystem;
using io::json;

struct Options {
  // shared
  std::optional<std::uint64_t> seed;
  std::string format = "csv";
  std::string out;
  std::string classes;
  bool merge = false;
  std::size_t min_agreement = 2;
  bool raps_positive_part = false;

  // inputs
  std::string method;
  double alpha = 0.1;
  std::string calib;
  std::string test;
  std::string predictor;
  std::string sets;
  std::string consensus;
  std::string annotations;
  std::string manifest;
  std::string ind;
  std::string ood;
  std::string spec;
  std::size_t bootstrap = kDefaultBootstrapResamples;
  std::vector<std::string> methods = {"lac", "aps", "raps"};
  std::vector<double> alphas = kDefaultAlphas;
  std::string model = "model";
};

std::uint64_t resolve_seed(const Options& o) {
  if (o.seed) return *o.seed;
  if (const char* env = std::getenv("CPKIT_SEED"); env && *env) {
    try {
      std::size_t used = 0;
      const unsigned long long v = std::stoull(env, &used);
      if (used == std::string(env).size()) return v;
    } catch (const std::exception&) {
    }
    throw std::invalid_argument(std::string("CPKIT_SEED is not an unsigned integer: ") + env);
  }
  return 0;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

void emit(const Options& o, const std::string& content, std::ostream& out) {
  if (o.out.empty()) {
    out << content;
  } else {
    io::write_file(o.out, content);
  }
}

std::string render(const Options& o, const std::vector<std::pair<std::string, double>>& table,
                   const json& j) {
  return o.format == "json" ? j.dump(2) + "\n" : io::metric_table_csv(table);
}

// Label space for commands that only see class names in annotation/set files.
LabelSpace infer_label_space(const Options& o, const std::vector<std::string>& extra_names) {
  if (!o.classes.empty()) return LabelSpace(split_list(o.classes));
  if (o.merge) return bethesda_label_space();
  std::set<std::string> names(extra_names.begin(), extra_names.end());
  if (!o.annotations.empty()) {
    for (auto& n : io::annotation_label_names(o.annotations, o.merge)) names.insert(n);
  }
  return LabelSpace({names.begin(), names.end()});
}

int cmd_calibrate(const Options& o, std::ostream& out) {
  const Dataset cal = io::parse_softmax_csv(o.calib);
  const auto p = calibrate(cal, parse_method(o.method), o.alpha, resolve_seed(o),
                           {o.raps_positive_part});
  emit(o, io::predictor_to_json(p).dump(2) + "\n", out);
  return kOk;
}

int cmd_predict(const Options& o, std::ostream& out) {
  const auto p = io::load_predictor(o.predictor);
  const Dataset test = io::parse_softmax_csv(o.test, p.label_space());
  emit(o, io::prediction_sets_csv(predict_sets(p, test), p.label_space()), out);
  return kOk;
}

int cmd_evaluate(const Options& o, std::ostream& out) {
  if (o.consensus.empty() && o.annotations.empty()) {
    throw std::invalid_argument("evaluate needs --consensus and/or --annotations");
  }
  std::optional<io::ParsedConsensus> parsed;
  if (!o.consensus.empty()) parsed = io::parse_consensus_csv(o.consensus);

  std::optional<LabelSpace> ls;
  if (!o.classes.empty()) {
    ls.emplace(split_list(o.classes));
  } else if (parsed && parsed->label_space) {
    ls = parsed->label_space;
  } else {
    auto names = io::prediction_set_label_names(o.sets);
    if (parsed) {
      for (const auto& [id, name] : parsed->labels) names.push_back(name);
    }
    ls = infer_label_space(o, names);
  }
  const auto sets = io::parse_prediction_sets_csv(o.sets, *ls);

  std::vector<std::pair<std::string, double>> table;
  json j = json::object();
  if (parsed) {
    const ConsensusMap consensus = io::to_consensus_map(*parsed, *ls);
    std::vector<PredictionSet> covered;
    for (const auto& s : sets) {
      if (consensus.contains(s.sample_id())) covered.push_back(s);
    }
    const auto cov = coverage_metrics(covered, consensus);
    table.insert(table.end(), {{"cc", cov.cc},
                               {"ssc", cov.ssc},
                               {"mean_width", cov.mean_width},
                               {"n_no_consensus", static_cast<double>(sets.size() - covered.size())}});
    for (const auto& [size, g] : cov.per_size_coverage) {
      table.emplace_back("coverage_size_" + std::to_string(size), g.coverage);
      table.emplace_back("count_size_" + std::to_string(size), static_cast<double>(g.count));
    }
    j["coverage"] = io::coverage_json(cov);
    j["coverage"]["n_no_consensus"] = sets.size() - covered.size();
  }
  if (!o.annotations.empty()) {
    const auto annotations = io::parse_annotations_csv(o.annotations, *ls, o.merge);
    const auto agr = agreement_metrics(sets, annotations);
    table.insert(table.end(), {{"mean_precision", agr.mean_precision},
                               {"mean_recall", agr.mean_recall},
                               {"mean_f1", agr.mean_f1},
                               {"mean_jaccard", agr.mean_jaccard},
                               {"exact_match", agr.exact_match_accuracy},
                               {"n_empty_sets", static_cast<double>(agr.n_empty_sets)},
                               {"n_zero_f1", static_cast<double>(agr.n_zero_f1)}});
    j["agreement"] = io::agreement_json(agr);
  }
  emit(o, render(o, table, j), out);
  return kOk;
}

int cmd_consensus(const Options& o, std::ostream& out) {
  const LabelSpace ls = infer_label_space(o, {});
  const auto annotations = io::parse_annotations_csv(o.annotations, ls, o.merge);
  emit(o, io::consensus_csv(build_consensus(annotations, ls, o.min_agreement), ls), out);
  return kOk;
}

int cmd_kappa(const Options& o, std::ostream& out) {
  const LabelSpace ls = infer_label_space(o, {});
  const auto annotations = io::parse_annotations_csv(o.annotations, ls, o.merge);
  const auto k = fleiss_kappa(annotations, ls, o.bootstrap, resolve_seed(o));
  const std::vector<std::pair<std::string, double>> table = {
      {"kappa", k.kappa},
      {"ci_low", k.ci_low},
      {"ci_high", k.ci_high},
      {"n_items", static_cast<double>(k.n_items)},
      {"raters", static_cast<double>(k.raters)},
      {"n_excluded", static_cast<double>(k.n_excluded)}};
  emit(o, render(o, table, io::kappa_json(k)), out);
  return kOk;
}

int cmd_aleatoric(const Options& o, std::ostream& out) {
  const LabelSpace ls = infer_label_space(o, io::prediction_set_label_names(o.sets));
  const auto sets = io::parse_prediction_sets_csv(o.sets, ls);
  const auto annotations = io::parse_annotations_csv(o.annotations, ls, o.merge);
  const double capture = aleatoric_capture(sets, annotations);
  emit(o,
       render(o, {{"aleatoric_capture", capture}, {"n", static_cast<double>(sets.size())}},
              {{"aleatoric_capture", capture}, {"n", sets.size()}}),
       out);
  return kOk;
}

int cmd_ood_series(const Options& o, std::ostream& out) {
  const auto p = io::load_predictor(o.predictor);
  const auto series = io::load_noise_manifest(o.manifest, p.label_space());
  const auto profile = ood_width_profile(p, series);
  if (o.out.empty()) {
    out << (o.format == "json" ? io::width_profile_json(profile).dump(2) + "\n"
                               : io::width_profile_csv(profile));
    return kOk;
  }
  fs::create_directories(o.out);
  io::write_file(fs::path(o.out) / "width_profile.csv", io::width_profile_csv(profile));
  io::write_file(fs::path(o.out) / "width_profile.json",
                 io::width_profile_json(profile).dump(2) + "\n");
  return kOk;
}

int cmd_ood_compare(const Options& o, std::ostream& out) {
  const auto p = io::load_predictor(o.predictor);
  const Dataset ind = io::parse_softmax_csv(o.ind, p.label_space());
  const Dataset ood = io::parse_softmax_csv(o.ood, p.label_space());
  const auto c = ood_dataset_compare(p, ind, ood);
  const std::vector<std::pair<std::string, double>> table = {
      {"ind_mean_width", c.ind.mean_width},
      {"ood_mean_width", c.ood.mean_width},
      {"mean_width_difference", c.mean_width_difference},
      {"ind_full_set_fraction", c.ind.full_set_fraction},
      {"ood_full_set_fraction", c.ood.full_set_fraction}};
  emit(o, render(o, table, io::ood_comparison_json(c)), out);
  return kOk;
}

int cmd_sweep(const Options& o, std::ostream&) {
  SweepConfig config;
  config.methods.clear();
  for (const auto& m : o.methods) config.methods.push_back(parse_method(m));
  config.alphas = o.alphas;
  for (double a : config.alphas) {
    if (!(a > 0.0 && a < 1.0)) throw std::invalid_argument("alphas must lie in (0,1)");
  }
  config.model = o.model;
  config.seed = resolve_seed(o);
  config.min_agreement = o.min_agreement;
  config.raps_positive_part = o.raps_positive_part;

  const Dataset cal = io::parse_softmax_csv(o.calib);
  Dataset test = io::parse_softmax_csv(o.test, cal.label_space);
  test.annotations = io::parse_annotations_csv(o.annotations, cal.label_space, o.merge);
  if (auto v = validate_dataset(test, test.label_space); !v.empty()) {
    throw DataError("test dataset: " + v.front().sample_id + ": " + v.front().rule);
  }

  const fs::path dir(o.out);
  fs::create_directories(dir / "predictors");
  fs::create_directories(dir / "sets");
  EvaluationReport report{test.name, {}};
  for (auto& cell : sweep_cells(cal, test, config)) {
    const std::string stem = cell.row.method + "_alpha" + io::format_number(cell.row.alpha);
    io::write_file(dir / "predictors" / (stem + ".json"),
                   io::predictor_to_json(cell.predictor).dump(2) + "\n");
    io::write_file(dir / "sets" / (stem + ".csv"),
                   io::prediction_sets_csv(cell.sets, cal.label_space));
    report.rows.push_back(std::move(cell.row));
  }
  if (o.format == "json") {
    io::write_file(dir / "report.json", io::report_json(report).dump(2) + "\n");
  } else {
    io::write_file(dir / "report.csv", io::report_csv(report));
  }
  return kOk;
}

int cmd_synth(const Options& o, std::ostream&) {
  json j;
  try {
    j = json::parse(io::read_file(o.spec));
  } catch (const json::exception& e) {
    throw DataError(o.spec + ": " + e.what());
  }
  GeneratorSpec spec = io::spec_from_json(j);
  if (o.seed) spec.seed = *o.seed;
  const std::size_t n_cal = j.value("n_cal", spec.n);
  const std::size_t n_test = j.value("n_test", spec.n);
  const std::vector<double> sigmas = j.value("sigmas", kDefaultNoiseSigmas);

  const fs::path dir(o.out);
  fs::create_directories(dir / "noise");
  const auto split = generate_split(spec, n_cal, n_test);
  const LabelSpace& ls = split.calibration.label_space;
  io::write_file(dir / "calib.csv", io::softmax_csv(split.calibration));
  io::write_file(dir / "calib_annotations.csv", io::annotations_csv(split.calibration.annotations, ls));
  io::write_file(dir / "test.csv", io::softmax_csv(split.test));
  io::write_file(dir / "test_annotations.csv", io::annotations_csv(split.test.annotations, ls));
  io::write_file(dir / "ood_uniform.csv", io::softmax_csv(uniformize(split.test)));

  // The noise series reuses the test split's latent draws.
  GeneratorSpec test_spec = spec;
  test_spec.n = n_test;
  test_spec.seed = derive_seed(spec.seed, 2);
  test_spec.name = spec.name + "_test";
  const auto series = make_noise_series(test_spec, sigmas);
  json levels = json::array();
  for (std::size_t i = 0; i < series.levels.size(); ++i) {
    const std::string file = "noise/level_" + std::to_string(i) + ".csv";
    io::write_file(dir / file, io::softmax_csv(series.levels[i].dataset));
    levels.push_back({{"sigma", series.levels[i].sigma}, {"softmax_csv_path", file}});
  }
  io::write_file(dir / "noise_manifest.json", json{{"levels", levels}}.dump(2) + "\n");

  json manifest = {{"rng", kRngAlgorithm},
                   {"spec", io::spec_to_json(spec)},
                   {"seed", spec.seed},
                   {"n_cal", n_cal},
                   {"n_test", n_test},
                   {"calibration_seed", derive_seed(spec.seed, 1)},
                   {"test_seed", derive_seed(spec.seed, 2)},
                   {"sigmas", sigmas},
                   {"noise_model", "z = (c*e_y + eps0 + sigma*eps1) / sqrt(1 + sigma^2)"},
                   {"files",
                    {"calib.csv", "calib_annotations.csv", "test.csv", "test_annotations.csv",
                     "ood_uniform.csv", "noise_manifest.json"}}};
  io::write_file(dir / "manifest.json", manifest.dump(2) + "\n");
  return kOk;
}

void add_format(CLI::App* cmd, Options& o) {
  cmd->add_option("--format", o.format, "Report format")->check(CLI::IsMember({"csv", "json"}));
}

void add_label_options(CLI::App* cmd, Options& o) {
  cmd->add_option("--classes", o.classes, "Comma-separated class names (label space order)");
  cmd->add_flag("--merge", o.merge, "Merge raw Bethesda labels (ASC-US->LSIL, ASC-H/SCC->HSIL)");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Split-conformal prediction sets over classifier softmax outputs"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  auto* calibrate_cmd = app.add_subcommand("calibrate", "Calibrate a conformal predictor");
  calibrate_cmd->add_option("--method", o.method)->required()->check(
      CLI::IsMember({"lac", "aps", "raps"}, CLI::ignore_case));
  calibrate_cmd->add_option("--alpha", o.alpha)->required()->check(CLI::Range(0.0, 1.0));
  calibrate_cmd->add_option("--calib", o.calib)->required()->check(CLI::ExistingFile);
  calibrate_cmd->add_option("--out", o.out);
  calibrate_cmd->add_option("--seed", o.seed, "RAPS tuning split seed (default $CPKIT_SEED)");
  calibrate_cmd->add_flag("--raps-positive-part", o.raps_positive_part,
                          "Clamp the RAPS penalty at zero below k_reg");

  auto* predict_cmd = app.add_subcommand("predict", "Emit one prediction set per sample");
  predict_cmd->add_option("--predictor", o.predictor)->required()->check(CLI::ExistingFile);
  predict_cmd->add_option("--test", o.test)->required()->check(CLI::ExistingFile);
  predict_cmd->add_option("--out", o.out);

  auto* evaluate_cmd = app.add_subcommand("evaluate", "Coverage and agreement metrics");
  evaluate_cmd->add_option("--sets", o.sets)->required()->check(CLI::ExistingFile);
  evaluate_cmd->add_option("--consensus", o.consensus)->check(CLI::ExistingFile);
  evaluate_cmd->add_option("--annotations", o.annotations)->check(CLI::ExistingFile);
  evaluate_cmd->add_option("--out", o.out);
  add_label_options(evaluate_cmd, o);
  add_format(evaluate_cmd, o);

  auto* consensus_cmd = app.add_subcommand("consensus", "Majority-vote consensus labels");
  consensus_cmd->add_option("--annotations", o.annotations)->required()->check(CLI::ExistingFile);
  consensus_cmd->add_option("--min-agreement", o.min_agreement)->check(CLI::Range(2, 1000000));
  consensus_cmd->add_option("--out", o.out);
  add_label_options(consensus_cmd, o);

  auto* kappa_cmd = app.add_subcommand("kappa", "Fleiss' kappa with bootstrap CI");
  kappa_cmd->add_option("--annotations", o.annotations)->required()->check(CLI::ExistingFile);
  kappa_cmd->add_option("--bootstrap", o.bootstrap);
  kappa_cmd->add_option("--seed", o.seed);
  kappa_cmd->add_option("--out", o.out);
  add_label_options(kappa_cmd, o);
  add_format(kappa_cmd, o);

  auto* aleatoric_cmd = app.add_subcommand("aleatoric", "Set width vs. annotator disagreement");
  aleatoric_cmd->add_option("--sets", o.sets)->required()->check(CLI::ExistingFile);
  aleatoric_cmd->add_option("--annotations", o.annotations)->required()->check(CLI::ExistingFile);
  aleatoric_cmd->add_option("--out", o.out);
  add_label_options(aleatoric_cmd, o);
  add_format(aleatoric_cmd, o);

  auto* ood_cmd = app.add_subcommand("ood", "Epistemic uncertainty harness");
  ood_cmd->require_subcommand(1);
  auto* series_cmd = ood_cmd->add_subcommand("series", "Width profile over a noise series");
  series_cmd->add_option("--predictor", o.predictor)->required()->check(CLI::ExistingFile);
  series_cmd->add_option("--manifest", o.manifest)->required()->check(CLI::ExistingFile);
  series_cmd->add_option("--out", o.out, "Output directory");
  add_format(series_cmd, o);
  auto* compare_cmd = ood_cmd->add_subcommand("compare", "In-distribution vs. OOD widths");
  compare_cmd->add_option("--predictor", o.predictor)->required()->check(CLI::ExistingFile);
  compare_cmd->add_option("--ind", o.ind)->required()->check(CLI::ExistingFile);
  compare_cmd->add_option("--ood", o.ood)->required()->check(CLI::ExistingFile);
  compare_cmd->add_option("--out", o.out);
  add_format(compare_cmd, o);

  auto* sweep_cmd = app.add_subcommand("sweep", "Evaluate every method x alpha cell");
  sweep_cmd->add_option("--methods", o.methods)->delimiter(',')->check(
      CLI::IsMember({"lac", "aps", "raps"}, CLI::ignore_case));
  sweep_cmd->add_option("--alphas", o.alphas)->delimiter(',');
  sweep_cmd->add_option("--calib", o.calib)->required()->check(CLI::ExistingFile);
  sweep_cmd->add_option("--test", o.test)->required()->check(CLI::ExistingFile);
  sweep_cmd->add_option("--annotations", o.annotations)->required()->check(CLI::ExistingFile);
  sweep_cmd->add_option("--out", o.out, "Output directory")->required();
  sweep_cmd->add_option("--model", o.model, "Model tag for the report");
  sweep_cmd->add_option("--seed", o.seed);
  sweep_cmd->add_option("--min-agreement", o.min_agreement)->check(CLI::Range(2, 1000000));
  sweep_cmd->add_flag("--merge", o.merge);
  sweep_cmd->add_flag("--raps-positive-part", o.raps_positive_part);
  add_format(sweep_cmd, o);

  auto* synth_cmd = app.add_subcommand("synth", "Generate synthetic fixtures");
  synth_cmd->add_option("--spec", o.spec)->required()->check(CLI::ExistingFile);
  synth_cmd->add_option("--out", o.out, "Output directory")->required();
  synth_cmd->add_option("--seed", o.seed, "Overrides the spec seed");

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsageError;
  }

  try {
    if (calibrate_cmd->parsed()) return cmd_calibrate(o, out);
    if (predict_cmd->parsed()) return cmd_predict(o, out);
    if (evaluate_cmd->parsed()) return cmd_evaluate(o, out);
    if (consensus_cmd->parsed()) return cmd_consensus(o, out);
    if (kappa_cmd->parsed()) return cmd_kappa(o, out);
    if (aleatoric_cmd->parsed()) return cmd_aleatoric(o, out);
    if (series_cmd->parsed()) return cmd_ood_series(o, out);
    if (compare_cmd->parsed()) return cmd_ood_compare(o, out);
    if (sweep_cmd->parsed()) return cmd_sweep(o, out);
    if (synth_cmd->parsed()) return cmd_synth(o, out);
    throw InvariantError("no subcommand dispatched");
  } catch (const DataError& e) {
    err << "error: " << e.what() << "\n";
    return kDataError;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kDataError;
  } catch (const std::invalid_argument& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kInternalError;
  }
}

}  // namespace cpkit::cli
