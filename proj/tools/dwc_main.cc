// dwc: demand-weighted completeness pipeline.
//
//   dwc synth        --config gen.cfg --out DIR
//   dwc aggregate    --usage LOG... --kb KB --out DIR
//   dwc train        --dataset DS --model {freq|regr|nn} --out MODEL
//   dwc eval         --dataset DS --model {freq|regr|nn} --out DIR
//   dwc temporal     --train DS --future DS... --out DIR
//   dwc completeness --model MODEL --kb KB --usage LOG... --out DIR
//
// Exit status: 0 success, 2 usage or I/O error, 3 data error, 4 numeric
// failure.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dwc/aggregation.h"
#include "dwc/completeness.h"
#include "dwc/evaluation.h"
#include "dwc/ingestion.h"
#include "dwc/models.h"
#include "dwc/synthgen.h"
#include "json.hpp"

#ifndef DWC_VERSION
#define DWC_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace dwc {
namespace {

std::string ReadFile(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path + "' for reading");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void WriteFile(const fs::path &path, const std::string &content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "' for writing");
  out << content;
  if (!out) throw Error(ErrorCode::kIo, "write error on '" + path.string() + "'");
}

std::string FileDigest(const std::string &path) {
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx",
                static_cast<unsigned long long>(StableHash(ReadFile(path), 0)));
  return std::string("fnv1a64:") + hex;
}

std::string Timestamp() {
  std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buffer[32];
  std::strftime(buffer, sizeof(buffer), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  return buffer;
}

// Creates |dir|, refusing to reuse a non-empty one unless |force|.
void PrepareOutputDir(const std::string &dir, bool force) {
  std::error_code ec;
  if (fs::exists(dir, ec)) {
    if (!fs::is_directory(dir, ec)) {
      throw Error(ErrorCode::kIo, "--out '" + dir + "' exists and is not a directory");
    }
    if (!fs::is_empty(dir, ec) && !force) {
      throw Error(ErrorCode::kIo,
                  "--out '" + dir + "' is not empty; pass --force to overwrite");
    }
    return;
  }
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create '" + dir + "': " + ec.message());
}

void PrepareOutputFile(const std::string &path, bool force) {
  std::error_code ec;
  if (fs::exists(path, ec) && !force) {
    throw Error(ErrorCode::kIo, "'" + path + "' exists; pass --force to overwrite");
  }
  fs::path parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent, ec);
}

// Flat "key = value" config file. Values apply to options not given on the
// command line.
void ApplyConfigFile(CLI::App *cmd, const std::string &path) {
  std::istringstream in(ReadFile(path));
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto trim = [](std::string s) {
      s.erase(0, s.find_first_not_of(" \t\r"));
      s.erase(s.find_last_not_of(" \t\r") + 1);
      return s;
    };
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::kConfig, path + ":" + std::to_string(line_no) +
                                          ": expected 'key = value'");
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
      value = value.substr(1, value.size() - 2);
    }
    std::replace(key.begin(), key.end(), '_', '-');
    CLI::Option *opt = cmd->get_option_no_throw("--" + key);
    if (opt == nullptr || key == "config") {
      throw Error(ErrorCode::kConfig, path + ":" + std::to_string(line_no) +
                                          ": unknown key '" + key + "'");
    }
    if (opt->count() > 0) continue;  // command line wins
    try {
      if (opt->get_expected_max() == 0) {
        if (value == "true" || value == "1" || value == "on") {
          opt->add_result("true");
        } else if (value == "false" || value == "0" || value == "off") {
          continue;
        } else {
          throw Error(ErrorCode::kConfig, "flag '" + key + "' expects true/false");
        }
      } else if (opt->get_expected_max() > 1) {
        std::istringstream words(value);
        for (std::string word; words >> word;) opt->add_result(word);
      } else {
        opt->add_result(value);
      }
      opt->run_callback();
    } catch (const CLI::Error &e) {
      throw Error(ErrorCode::kConfig, path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

struct Manifest {
  std::string command;
  ordered_json seeds = ordered_json::object();
  ordered_json inputs = ordered_json::object();
  ordered_json extra = ordered_json::object();
  std::string started = Timestamp();

  void AddInput(const std::string &path) { inputs[path] = FileDigest(path); }

  void Write(const fs::path &path, const CLI::App &cmd) const {
    ordered_json j;
    j["command"] = command;
    j["tool"] = "dwc";
    j["tool_version"] = DWC_VERSION;
    j["config"] = cmd.config_to_str(true, false);
    j["seeds"] = seeds;
    j["inputs"] = inputs;
    for (const auto &[key, value] : extra.items()) j[key] = value;
    j["started_at"] = started;
    j["finished_at"] = Timestamp();
    WriteFile(path, j.dump(2) + "\n");
  }
};

std::vector<UsageRecord> LoadUsage(const std::vector<std::string> &paths,
                                   double max_malformed, Manifest *manifest) {
  std::vector<UsageRecord> records;
  UsageLogOptions options;
  options.max_malformed_fraction = max_malformed;
  for (const auto &path : paths) {
    UsageLog log = LoadUsageLog(path, options);
    if (!log.malformed.empty()) {
      std::cerr << "warning: " << path << ": skipped " << log.malformed.size()
                << " malformed line(s)\n";
    }
    manifest->AddInput(path);
    records.insert(records.end(), std::make_move_iterator(log.records.begin()),
                   std::make_move_iterator(log.records.end()));
  }
  return records;
}

KbSnapshot LoadKb(const std::string &path, Manifest *manifest) {
  KbSnapshot kb = LoadKbSnapshot(path);
  for (const auto &w : kb.warnings) std::cerr << "warning: " << path << ": " << w << "\n";
  manifest->AddInput(path);
  return kb;
}

// Options that must be given on the command line or in the --config file.
// CLI11's own check runs before the config file is applied.
std::vector<CLI::Option *> &RequiredOptions() {
  static std::vector<CLI::Option *> options;
  return options;
}

CLI::Option *Required(CLI::Option *option) {
  RequiredOptions().push_back(option);
  return option;
}

void CheckRequired(const CLI::App *cmd) {
  const auto &required = RequiredOptions();
  for (const CLI::Option *option : cmd->get_options()) {
    if (std::find(required.begin(), required.end(), option) != required.end() &&
        option->count() == 0) {
      throw Error(ErrorCode::kConfig, option->get_name() + " is required");
    }
  }
}

// Training options shared by train, eval and temporal.
struct TrainFlags {
  std::string model = "nn";
  TrainConfig cfg;
  std::string combine = "sum";
  bool no_fallback = false;

  void Register(CLI::App *cmd, bool model_required) {
    auto *opt = cmd->add_option("--model", model, "Predictor: freq, regr or nn")
                    ->check(CLI::IsMember({"freq", "regr", "nn"}));
    if (model_required) Required(opt);
    cmd->add_option("--seed", cfg.seed, "Random seed")->capture_default_str();
    cmd->add_option("--epochs", cfg.epochs, "Neural training epochs")
        ->check(CLI::PositiveNumber)->capture_default_str();
    cmd->add_option("--batch-size", cfg.batch_size, "Neural mini-batch size")
        ->check(CLI::PositiveNumber)->capture_default_str();
    cmd->add_option("--lr", cfg.learning_rate, "Adam learning rate")
        ->check(CLI::PositiveNumber)->capture_default_str();
    cmd->add_option("--hidden", cfg.hidden, "Hidden layer width")
        ->check(CLI::PositiveNumber)->capture_default_str();
    cmd->add_option("--l2", cfg.l2, "Ridge coefficient for regression")
        ->check(CLI::NonNegativeNumber)->capture_default_str();
    cmd->add_option("--freq-combine", combine,
                    "Frequency baseline: sum raw counts or mean of normalized")
        ->check(CLI::IsMember({"sum", "mean"}))->capture_default_str();
    cmd->add_flag("--no-fallback", no_fallback,
                  "Frequency baseline: fail on signatures with no known class");
  }

  TrainConfig Finish() {
    cfg.frequency_combine =
        combine == "sum" ? FrequencyCombine::kSumCounts : FrequencyCombine::kMeanNormalized;
    cfg.frequency_fallback = !no_fallback;
    cfg.Validate();
    return cfg;
  }
};

struct EvalFlags {
  double threshold = 0.95;
  std::string weighted = "off";
  std::string truncate_predicted = "on";
  std::string truncate_observed = "on";

  void Register(CLI::App *cmd) {
    cmd->add_option("--threshold", threshold, "Required-mass truncation threshold")
        ->check(CLI::Range(0.0, 1.0))->capture_default_str();
    cmd->add_option("--weighted", weighted, "Headline metric weighted by usage")
        ->check(CLI::IsMember({"on", "off"}))->capture_default_str();
    cmd->add_option("--truncate-predicted", truncate_predicted)
        ->check(CLI::IsMember({"on", "off"}))->capture_default_str();
    cmd->add_option("--truncate-observed", truncate_observed)
        ->check(CLI::IsMember({"on", "off"}))->capture_default_str();
  }

  EvalConfig Finish() const {
    EvalConfig cfg;
    cfg.threshold = threshold;
    cfg.weight_by_usage = weighted == "on";
    cfg.truncate_predicted = truncate_predicted == "on";
    cfg.truncate_observed = truncate_observed == "on";
    cfg.Validate();
    return cfg;
  }
};

ordered_json HeadlineJson(const EvaluationResult &result, bool weighted) {
  const MetricReport &r = result.Select(weighted);
  return {{"jaccard", r.jaccard},
          {"false_neg", r.false_neg},
          {"false_pos", r.false_pos},
          {"intersection", r.intersection}};
}

// "runs/d1/dataset.ndjson" is labelled "d1".
std::string DatasetLabel(const std::string &path) {
  fs::path p(path);
  std::string stem = p.stem().string();
  if (stem == "dataset" && p.has_parent_path()) {
    return p.parent_path().filename().string();
  }
  return stem;
}

int Run(int argc, char **argv) {
  CLI::App app{"Demand-weighted completeness of a knowledge base"};
  app.require_subcommand(1);
  app.set_version_flag("--version", DWC_VERSION);

  std::string config_path;
  std::string out;
  bool force = false;
  auto add_common = [&](CLI::App *cmd, const char *out_help) {
    cmd->add_option("--config", config_path, "Flat key = value defaults file");
    Required(cmd->add_option("--out", out, out_help));
    cmd->add_flag("--force", force, "Overwrite existing outputs");
  };

  // synth
  GenConfig gen;
  CLI::App *synth = app.add_subcommand("synth", "Generate a synthetic KB and usage logs");
  add_common(synth, "Output directory");
  synth->add_option("--seed", gen.seed)->capture_default_str();
  synth->add_option("--n-classes", gen.n_classes)->capture_default_str();
  synth->add_option("--n-relations", gen.n_relations)->capture_default_str();
  synth->add_option("--n-entities", gen.n_entities)->capture_default_str();
  synth->add_option("--n-signatures", gen.n_signatures)->capture_default_str();
  synth->add_option("--classes-per-entity-min", gen.classes_per_entity_min)->capture_default_str();
  synth->add_option("--classes-per-entity-max", gen.classes_per_entity_max)->capture_default_str();
  synth->add_option("--clauses-per-entity-min", gen.clauses_per_entity_min)->capture_default_str();
  synth->add_option("--clauses-per-entity-max", gen.clauses_per_entity_max)->capture_default_str();
  synth->add_option("--interaction-strength", gen.interaction_strength)->capture_default_str();
  synth->add_option("--drift-rate", gen.drift_rate)->capture_default_str();
  synth->add_option("--n-periods", gen.n_periods)->capture_default_str();
  synth->add_option("--n-topics", gen.n_topics)->capture_default_str();
  synth->add_option("--topic-cohesion", gen.topic_cohesion)->capture_default_str();
  synth->add_option("--usage-zipf", gen.usage_zipf)->capture_default_str();
  synth->add_option("--affinity-noise", gen.affinity_noise)->capture_default_str();
  synth->add_option("--topic-boost", gen.topic_boost)->capture_default_str();
  synth->add_option("--favored-per-class", gen.favored_per_class)->capture_default_str();
  synth->add_option("--favored-boost", gen.favored_boost)->capture_default_str();
  synth->add_option("--interaction-boost", gen.interaction_boost)->capture_default_str();
  synth->add_option("--fact-coverage", gen.fact_coverage)->capture_default_str();
  synth->add_option("--fact-threshold", gen.fact_threshold)->capture_default_str();
  synth->add_option("--emit-truth", gen.emit_truth, "Write truth.ndjson (true/false)")
      ->capture_default_str();

  // aggregate
  std::vector<std::string> usage_paths;
  std::string kb_path;
  int64_t min_support = 1;
  double max_malformed = 0.01;
  CLI::App *aggregate = app.add_subcommand("aggregate", "Build per-signature relation distributions");
  add_common(aggregate, "Output directory");
  Required(aggregate->add_option("--usage", usage_paths, "Usage log(s), NDJSON"));
  Required(aggregate->add_option("--kb", kb_path, "KB snapshot, NDJSON"));
  aggregate->add_option("--min-support", min_support, "Minimum clauses per signature")
      ->check(CLI::PositiveNumber)->capture_default_str();
  aggregate->add_option("--max-malformed", max_malformed,
                        "Tolerated fraction of malformed usage lines")
      ->check(CLI::Range(0.0, 1.0))->capture_default_str();

  // train
  std::string dataset_path;
  TrainFlags train_flags;
  CLI::App *train = app.add_subcommand("train", "Fit a predictor on a dataset");
  add_common(train, "Output model file");
  Required(train->add_option("--dataset", dataset_path, "Dataset NDJSON"));
  train_flags.Register(train, true);

  // eval
  int folds = 10;
  int jobs = 1;
  TrainFlags eval_train_flags;
  EvalFlags eval_flags;
  CLI::App *eval = app.add_subcommand("eval", "Grouped k-fold cross-validation");
  add_common(eval, "Output directory");
  Required(eval->add_option("--dataset", dataset_path, "Dataset NDJSON"));
  eval->add_option("--folds", folds, "Number of folds (>= 2)")
      ->check(CLI::Range(2, 1000))->capture_default_str();
  eval->add_option("--jobs", jobs, "Folds trained concurrently")
      ->check(CLI::PositiveNumber)->capture_default_str();
  eval_train_flags.Register(eval, true);
  eval_flags.Register(eval);

  // temporal
  std::string train_path;
  std::vector<std::string> future_paths;
  TrainFlags temporal_train_flags;
  EvalFlags temporal_eval_flags;
  CLI::App *temporal = app.add_subcommand("temporal", "Score one model on later periods");
  add_common(temporal, "Output directory");
  Required(temporal->add_option("--train", train_path, "Training dataset NDJSON"));
  Required(temporal->add_option("--future", future_paths, "Future dataset(s), in period order"));
  temporal_train_flags.Register(temporal, false);
  temporal_eval_flags.Register(temporal);

  // completeness
  std::string model_path;
  double threshold = 0.95;
  size_t top_k = 20;
  double zero_usage_weight = 0.0;
  CLI::App *completeness = app.add_subcommand("completeness", "Score KB entities against predicted demand");
  add_common(completeness, "Output directory");
  Required(completeness->add_option("--model", model_path, "Model file"));
  Required(completeness->add_option("--kb", kb_path, "KB snapshot, NDJSON"));
  Required(completeness->add_option("--usage", usage_paths, "Usage log(s) for entity weights"));
  completeness->add_option("--threshold", threshold)->check(CLI::Range(0.0, 1.0))->capture_default_str();
  completeness->add_option("--top-k", top_k, "Gap report length")->capture_default_str();
  completeness->add_option("--zero-usage-weight", zero_usage_weight,
                           "Weight of entities absent from the usage logs")
      ->check(CLI::NonNegativeNumber)->capture_default_str();
  completeness->add_option("--max-malformed", max_malformed)
      ->check(CLI::Range(0.0, 1.0))->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp &e) {
    return app.exit(e);
  } catch (const CLI::Success &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    app.exit(e);
    return 2;
  }

  CLI::App *cmd = app.get_subcommands().front();
  if (!config_path.empty()) ApplyConfigFile(cmd, config_path);
  CheckRequired(cmd);
  Manifest manifest;
  manifest.command = cmd->get_name();

  if (cmd == synth) {
    PrepareOutputDir(out, force);
    SyntheticCorpus corpus = Generate(gen);
    WriteCorpus(corpus, out);
    WriteFile(fs::path(out) / "gen.cfg", FormatGenConfig(gen));
    manifest.seeds["generator"] = gen.seed;
    if (!config_path.empty()) manifest.AddInput(config_path);
    manifest.Write(fs::path(out) / "manifest.json", *cmd);
    std::cerr << "wrote " << corpus.kb.entities.size() << " entities, "
              << corpus.usage.size() << " usage period(s) to " << out << "\n";
    return 0;
  }

  if (cmd == aggregate) {
    PrepareOutputDir(out, force);
    std::vector<UsageRecord> records = LoadUsage(usage_paths, max_malformed, &manifest);
    KbSnapshot kb = LoadKb(kb_path, &manifest);
    AggregateResult result = Aggregate(records, kb, min_support);
    WriteDataset((fs::path(out) / "dataset.ndjson").string(), result.dataset);
    manifest.extra["signatures"] = result.dataset.size();
    manifest.extra["classes"] = result.dataset.vocabulary().num_classes();
    manifest.extra["relations"] = result.dataset.vocabulary().num_relations();
    manifest.extra["skipped_records"] = result.skipped_records;
    manifest.extra["skipped_clauses"] = result.skipped_clauses;
    manifest.extra["dropped_signatures"] = result.dropped_signatures;
    manifest.Write(fs::path(out) / "manifest.json", *cmd);
    std::cerr << result.dataset.size() << " signatures, "
              << result.dataset.vocabulary().num_classes() << " classes, "
              << result.dataset.vocabulary().num_relations() << " relations; "
              << result.skipped_records << " record(s) for unknown entities skipped\n";
    return 0;
  }

  if (cmd == train) {
    PrepareOutputFile(out, force);
    TrainConfig cfg = train_flags.Finish();
    SignatureDataset ds = LoadDataset(dataset_path);
    manifest.AddInput(dataset_path);
    manifest.seeds["train"] = cfg.seed;
    ModelKind kind = ParseModelKind(train_flags.model);
    std::unique_ptr<PredictorModel> model;
    if (kind == ModelKind::kNeural) {
      NeuralTrainSummary summary;
      model = FitNeural(ds, cfg, &summary);
      manifest.extra["initial_loss"] = summary.initial_loss();
      manifest.extra["final_loss"] = summary.final_loss();
      std::cerr << "neural: loss " << summary.initial_loss() << " -> "
                << summary.final_loss() << " after " << cfg.epochs << " epochs\n";
    } else if (kind == ModelKind::kRegression) {
      RegressionFitSummary summary;
      model = FitRegression(ds, cfg, &summary);
      manifest.extra["max_abs_residual"] = summary.max_abs_residual;
      manifest.extra["min_norm_fallback"] = summary.min_norm_fallback;
      std::cerr << "regression: max training residual " << summary.max_abs_residual
                << (summary.min_norm_fallback ? " (minimal-norm fallback)" : "") << "\n";
    } else {
      model = FitFrequency(ds, cfg);
    }
    manifest.extra["parameters"] = model->ParameterCount();
    SaveModel(*model, out);
    manifest.Write(out + ".manifest.json", *cmd);
    return 0;
  }

  if (cmd == eval) {
    PrepareOutputDir(out, force);
    TrainConfig cfg = eval_train_flags.Finish();
    EvalConfig ecfg = eval_flags.Finish();
    SignatureDataset ds = LoadDataset(dataset_path);
    manifest.AddInput(dataset_path);
    manifest.seeds["train"] = cfg.seed;
    manifest.seeds["folds"] = cfg.seed;
    ModelKind kind = ParseModelKind(eval_train_flags.model);
    CvReport report = CrossValidate(ds, kind, cfg, ecfg, folds, cfg.seed, jobs);
    const std::string label = DatasetLabel(dataset_path);
    std::string tsv = ReportTsvHeader() + ReportTsvRow(ModelKindName(kind), label, report.mean);
    std::string fold_tsv = ReportTsvHeader();
    ordered_json j;
    j["model"] = ModelKindName(kind);
    j["dataset"] = label;
    j["folds"] = folds;
    j["threshold"] = ecfg.threshold;
    j["weighted"] = ecfg.weight_by_usage;
    j["headline"] = HeadlineJson(report.mean, ecfg.weight_by_usage);
    j["mean"] = ReportJson(ModelKindName(kind), label, report.mean);
    ordered_json per_fold = ordered_json::array();
    for (int f = 0; f < folds; ++f) {
      fold_tsv += ReportTsvRow(ModelKindName(kind), label + "#" + std::to_string(f),
                               report.folds[f]);
      ordered_json fj = ReportJson(ModelKindName(kind), label, report.folds[f]);
      fj["fold"] = f;
      fj["size"] = report.fold_sizes[f];
      per_fold.push_back(std::move(fj));
    }
    j["per_fold"] = std::move(per_fold);
    WriteFile(fs::path(out) / "report.tsv", tsv);
    WriteFile(fs::path(out) / "folds.tsv", fold_tsv);
    WriteFile(fs::path(out) / "report.json", j.dump(2) + "\n");
    manifest.Write(fs::path(out) / "manifest.json", *cmd);
    std::cout << tsv;
    return 0;
  }

  if (cmd == temporal) {
    PrepareOutputDir(out, force);
    TrainConfig cfg = temporal_train_flags.Finish();
    EvalConfig ecfg = temporal_eval_flags.Finish();
    SignatureDataset base = LoadDataset(train_path);
    manifest.AddInput(train_path);
    manifest.seeds["train"] = cfg.seed;
    std::vector<std::pair<std::string, SignatureDataset>> future;
    for (size_t i = 0; i < future_paths.size(); ++i) {
      future.emplace_back("T" + std::to_string(i + 1), LoadDataset(future_paths[i]));
      manifest.AddInput(future_paths[i]);
    }
    ModelKind kind = ParseModelKind(temporal_train_flags.model);
    std::vector<TemporalRow> rows = TemporalEval(base, future, kind, cfg, ecfg);
    std::string tsv = ReportTsvHeader();
    ordered_json j = ordered_json::array();
    for (size_t i = 0; i < rows.size(); ++i) {
      tsv += ReportTsvRow(ModelKindName(kind), rows[i].label, rows[i].result);
      ordered_json rj = ReportJson(ModelKindName(kind), rows[i].label, rows[i].result);
      rj["source"] = future_paths[i];
      rj["headline"] = HeadlineJson(rows[i].result, ecfg.weight_by_usage);
      j.push_back(std::move(rj));
    }
    WriteFile(fs::path(out) / "report.tsv", tsv);
    WriteFile(fs::path(out) / "report.json", j.dump(2) + "\n");
    manifest.Write(fs::path(out) / "manifest.json", *cmd);
    std::cout << tsv;
    return 0;
  }

  if (cmd == completeness) {
    PrepareOutputDir(out, force);
    std::unique_ptr<PredictorModel> model = LoadModel(model_path);
    manifest.AddInput(model_path);
    KbSnapshot kb = LoadKb(kb_path, &manifest);
    std::vector<UsageRecord> records = LoadUsage(usage_paths, max_malformed, &manifest);
    std::vector<EntityId> entities;
    for (const auto &[entity, info] : kb.entities) entities.push_back(entity);
    SubsetOptions options;
    options.threshold = threshold;
    options.zero_usage_weight = zero_usage_weight;
    CompletenessReport report =
        AssessCompleteness(*model, kb, entities, EntityUsage(records), options);
    WriteFile(fs::path(out) / "entities.tsv", EntityTsv(report));
    WriteFile(fs::path(out) / "gaps.tsv", GapTsv(report, top_k));
    WriteFile(fs::path(out) / "report.json", CompletenessJson(report, top_k).dump(2) + "\n");
    manifest.extra["subset_score"] = report.subset_score;
    manifest.Write(fs::path(out) / "manifest.json", *cmd);
    std::printf("subset completeness %.4f (max %.4f) over %zu entities\n",
                report.subset_score, report.max_score, report.per_entity.size());
    return 0;
  }
  return 2;
}

}  // namespace
}  // namespace dwc

int main(int argc, char **argv) {
  try {
    return dwc::Run(argc, argv);
  } catch (const dwc::Error &e) {
    std::cerr << "dwc: " << dwc::ErrorCodeName(e.code()) << ": " << e.what() << "\n";
    return dwc::ExitCodeFor(e.code());
  } catch (const std::exception &e) {
    std::cerr << "dwc: " << e.what() << "\n";
    return 1;
  }
}
