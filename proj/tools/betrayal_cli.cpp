// Command line front end over the pipeline stages.
//
// Every subcommand works file-to-file under one output directory, records a
// run manifest, and skips work whose inputs have not changed.  Exit codes:
// 0 success, 1 runtime failure, 2 bad input or usage.

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "betrayal/pipeline.hpp"

namespace {

namespace pipeline = betrayal::pipeline;
namespace model = betrayal::model;
using betrayal::gamelog::json;

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitInput = 2;

// Options shared by more than one subcommand, bound per subcommand.
struct CommonOpts {
  std::string out;
  std::string task = "longterm";
  std::string lexicons;
  std::uint64_t seed = 0;
  bool strict_balance = false;
  bool convoy_as_friendly = false;
  bool strict_reciprocity = false;
};

struct GridOpts {
  std::vector<std::string> k;
  std::vector<std::string> scorers;
  std::vector<std::string> weights;
  std::vector<std::string> regularizers;
  std::vector<double> c_values;
  std::string objective;
  bool full = false;
  std::size_t folds = 5;
  std::size_t replicates = 1000;
};

struct SynthOpts {
  std::size_t games = 60;
  std::size_t min_seasons = 10;
  std::size_t max_seasons = 16;
  double hazard = 0.08;
  double message_rate = 3.0;
  double effect_positive = 1.0;
  double effect_planning = 1.0;
  double effect_politeness = 1.0;
};

void add_out_option(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("-o,--out", opts.out, "output directory")->required();
}

void add_task_option(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("-t,--task", opts.task, "prediction task")
      ->check(CLI::IsMember({"longterm", "imminent"}))
      ->capture_default_str();
}

void add_grid_options(CLI::App* cmd, GridOpts& grid) {
  cmd->add_option("--grid-k", grid.k,
                  "feature counts to search (numbers or 'all')")
      ->delimiter(',');
  cmd->add_option("--grid-scorers", grid.scorers,
                  "selection scorers to search (anova_f, chi2)")
      ->delimiter(',');
  cmd->add_option("--grid-weights", grid.weights,
                  "class weightings to search (none, balanced)")
      ->delimiter(',');
  cmd->add_option("--grid-regs", grid.regularizers,
                  "penalties to search (l1, l2)")
      ->delimiter(',');
  cmd->add_option("--grid-c", grid.c_values,
                  "inverse regularization strengths to search")
      ->delimiter(',');
  cmd->add_option("--objective", grid.objective,
                  "model selection objective (accuracy, f1); defaults by task")
      ->check(CLI::IsMember({"accuracy", "f1"}));
  cmd->add_flag("--full-grid", grid.full,
                "search the complete configuration space");
  cmd->add_option("--folds", grid.folds, "cross-validation folds")
      ->capture_default_str();
  cmd->add_option("--replicates", grid.replicates,
                  "bootstrap replicates for the MCC interval")
      ->capture_default_str();
}

void add_synth_options(CLI::App* cmd, SynthOpts& opts) {
  cmd->add_option("--games", opts.games, "games to generate")
      ->capture_default_str();
  cmd->add_option("--min-seasons", opts.min_seasons, "shortest game length")
      ->capture_default_str();
  cmd->add_option("--max-seasons", opts.max_seasons, "longest game length")
      ->capture_default_str();
  cmd->add_option("--hazard", opts.hazard,
                  "per-season dissolution probability of a friendship")
      ->capture_default_str();
  cmd->add_option("--message-rate", opts.message_rate,
                  "mean messages per direction per active season")
      ->capture_default_str();
  cmd->add_option("--effect-positive", opts.effect_positive,
                  "betrayer positive-sentiment multiplier")
      ->capture_default_str();
  cmd->add_option("--effect-planning", opts.effect_planning,
                  "betrayer planning-talk multiplier")
      ->capture_default_str();
  cmd->add_option("--effect-politeness", opts.effect_politeness,
                  "victim politeness multiplier near the betrayal")
      ->capture_default_str();
}

model::GridSpec build_grid(pipeline::Task task, const GridOpts& opts) {
  auto grid = pipeline::default_grid(task);
  if (!opts.objective.empty())
    grid.objective = model::parse_objective(opts.objective);
  if (opts.full) grid = model::GridSpec::full(grid.objective);
  if (!opts.k.empty()) {
    grid.k_features.clear();
    for (const auto& k : opts.k) {
      if (k == "all") {
        grid.k_features.push_back(model::kAllFeatures);
      } else {
        try {
          grid.k_features.push_back(std::stoul(k));
        } catch (const std::exception&) {
          throw pipeline::InputError("bad --grid-k entry '" + k + "'");
        }
      }
    }
  }
  if (!opts.scorers.empty()) {
    grid.scorers.clear();
    for (const auto& s : opts.scorers)
      grid.scorers.push_back(model::parse_scorer(s));
  }
  if (!opts.weights.empty()) {
    grid.class_weights.clear();
    for (const auto& w : opts.weights)
      grid.class_weights.push_back(model::parse_class_weight(w));
  }
  if (!opts.regularizers.empty()) {
    grid.regularizers.clear();
    for (const auto& r : opts.regularizers)
      grid.regularizers.push_back(model::parse_regularizer(r));
  }
  if (!opts.c_values.empty()) grid.c_values = opts.c_values;
  return grid;
}

betrayal::synth::SynthSpec build_spec(const SynthOpts& opts,
                                      std::uint64_t seed) {
  betrayal::synth::SynthSpec spec;
  spec.n_games = opts.games;
  spec.min_seasons = opts.min_seasons;
  spec.max_seasons = opts.max_seasons;
  spec.hazard = opts.hazard;
  spec.message_rate = opts.message_rate;
  spec.effects.betrayer_positive_sentiment = opts.effect_positive;
  spec.effects.betrayer_planning = opts.effect_planning;
  spec.effects.victim_politeness_near = opts.effect_politeness;
  spec.seed = seed;
  return spec;
}

// One record per invocation: the resolved parameters and what the stage
// reported.  Content depends only on inputs, so reruns rewrite the same
// bytes.
void write_run_manifest(const pipeline::Paths& paths, const std::string& cmd,
                        const json& params, const json& summary) {
  const json manifest{{"command", cmd}, {"params", params},
                      {"summary", summary}};
  pipeline::write_file_atomic(paths.out / ("run_" + cmd + ".json"),
                              manifest.dump(2) + "\n");
}

const char* cache_note(bool cached) { return cached ? " (cached)" : ""; }

int dispatch(const std::string& cmd, const CommonOpts& common,
             const GridOpts& grid_opts, const SynthOpts& synth_opts,
             const std::vector<std::string>& inputs) {
  const pipeline::Paths paths{common.out};

  if (cmd == "ingest") {
    std::vector<pipeline::fs::path> files(inputs.begin(), inputs.end());
    const auto s = pipeline::run_ingest(files, paths);
    write_run_manifest(paths, cmd, json{{"inputs", inputs}},
                       json{{"n_games", s.n_games},
                            {"n_messages_raw", s.n_messages_raw},
                            {"n_messages_kept", s.n_messages_kept}});
    std::printf("ingest: %zu games, kept %zu of %zu messages%s\n", s.n_games,
                s.n_messages_kept, s.n_messages_raw, cache_note(s.cached));
    return kExitOk;
  }

  if (cmd == "synth") {
    const auto spec = build_spec(synth_opts, common.seed);
    const auto s = pipeline::run_synth(spec, paths);
    write_run_manifest(paths, cmd, betrayal::synth::to_json(spec),
                       json{{"n_games", s.n_games},
                            {"n_friendships", s.n_friendships},
                            {"n_betrayals", s.n_betrayals}});
    std::printf("synth: %zu games, %zu friendships, %zu betrayals%s\n",
                s.n_games, s.n_friendships, s.n_betrayals,
                cache_note(s.cached));
    return kExitOk;
  }

  if (cmd == "relate") {
    betrayal::relations::ClassifyOptions copts;
    copts.convoy_as_friendly = common.convoy_as_friendly;
    betrayal::relations::SpanOptions sopts;
    sopts.strict_reciprocity = common.strict_reciprocity;
    const auto s = pipeline::run_relate(paths, copts, sopts);
    write_run_manifest(
        paths, cmd,
        json{{"convoy_as_friendly", common.convoy_as_friendly},
             {"strict_reciprocity", common.strict_reciprocity}},
        json{{"n_acts", s.n_acts},
             {"n_spans", s.n_spans},
             {"n_betrayals", s.n_betrayals},
             {"dissolve_rate", s.dissolve_rate},
             {"resolve_rate", s.resolve_rate},
             {"rate_ratio", s.rate_ratio}});
    std::printf("relate: %zu acts, %zu friendships, %zu betrayals%s\n",
                s.n_acts, s.n_spans, s.n_betrayals, cache_note(s.cached));
    return kExitOk;
  }

  if (cmd == "cohort") {
    const auto s =
        pipeline::run_cohort(paths, common.seed, common.strict_balance);
    write_run_manifest(paths, cmd,
                       json{{"seed", common.seed},
                            {"strict_balance", common.strict_balance}},
                       json{{"n_betrayals", s.n_betrayals},
                            {"n_candidates", s.n_candidates},
                            {"n_pairs", s.n_pairs},
                            {"p_length", s.p_length},
                            {"p_start", s.p_start},
                            {"n_longterm", s.n_longterm},
                            {"n_imminent", s.n_imminent}});
    std::printf(
        "cohort: %zu pairs (p_length=%.3f, p_start=%.3f), %zu longterm and "
        "%zu imminent instances%s\n",
        s.n_pairs, s.p_length, s.p_start, s.n_longterm, s.n_imminent,
        cache_note(s.cached));
    return kExitOk;
  }

  const auto task = pipeline::parse_task(common.task);

  if (cmd == "featurize") {
    const auto s = pipeline::run_featurize(paths, task, common.lexicons);
    write_run_manifest(paths, cmd,
                       json{{"task", common.task},
                            {"lexicons", common.lexicons.empty()
                                             ? "builtin"
                                             : common.lexicons}},
                       json{{"n_instances", s.n_instances},
                            {"n_features", s.n_features},
                            {"n_pruned", s.n_pruned}});
    std::printf("featurize: %zu instances, %zu features, %zu pruned "
                "connectives%s\n",
                s.n_instances, s.n_features, s.n_pruned, cache_note(s.cached));
    return kExitOk;
  }

  if (cmd == "train") {
    const auto grid = build_grid(task, grid_opts);
    const auto s = pipeline::run_train(paths, task, grid, grid_opts.folds,
                                       common.seed, grid_opts.replicates);
    write_run_manifest(paths, cmd,
                       json{{"task", common.task},
                            {"grid", pipeline::grid_json(grid)},
                            {"folds", grid_opts.folds},
                            {"seed", common.seed},
                            {"replicates", grid_opts.replicates}},
                       json{{"best", pipeline::config_json(s.best)},
                            {"accuracy", s.accuracy},
                            {"f1", s.f1},
                            {"mcc", s.mcc},
                            {"mcc_ci",
                             json::array({s.mcc_ci_low, s.mcc_ci_high})},
                            {"majority_accuracy", s.majority_accuracy},
                            {"n_rows", s.n_rows}});
    std::printf(
        "train(%s): %zu rows; accuracy %.3f (majority %.3f), F1 %.3f, MCC "
        "%.3f [%.3f, %.3f]%s\n",
        common.task.c_str(), s.n_rows, s.accuracy, s.majority_accuracy, s.f1,
        s.mcc, s.mcc_ci_low, s.mcc_ci_high, cache_note(s.cached));
    return kExitOk;
  }

  if (cmd == "evaluate") {
    pipeline::fs::path model_path, features_path;
    if (inputs.size() > 0) model_path = inputs[0];
    if (inputs.size() > 1) features_path = inputs[1];
    const auto s = pipeline::run_evaluate(paths, task, model_path,
                                          features_path);
    write_run_manifest(paths, cmd, json{{"task", common.task}},
                       json{{"accuracy", s.accuracy},
                            {"f1", s.f1},
                            {"mcc", s.mcc},
                            {"majority_accuracy", s.majority_accuracy},
                            {"fp_within_two_seasons", s.fp_within_two_seasons},
                            {"n_rows", s.n_rows}});
    std::printf("evaluate(%s): %zu rows; accuracy %.3f (majority %.3f), F1 "
                "%.3f, MCC %.3f%s\n",
                common.task.c_str(), s.n_rows, s.accuracy,
                s.majority_accuracy, s.f1, s.mcc, cache_note(s.cached));
    return kExitOk;
  }

  if (cmd == "report") {
    pipeline::ReportOptions opt;
    opt.task = task;
    opt.classify.convoy_as_friendly = common.convoy_as_friendly;
    opt.spans.strict_reciprocity = common.strict_reciprocity;
    opt.strict_balance = common.strict_balance;
    opt.lexicon_dir = common.lexicons;
    opt.grid = build_grid(task, grid_opts);
    opt.k_folds = grid_opts.folds;
    opt.seed = common.seed;
    opt.bootstrap_replicates = grid_opts.replicates;
    const auto s = pipeline::run_report(paths, opt);
    write_run_manifest(
        paths, cmd,
        json{{"task", common.task},
             {"seed", common.seed},
             {"grid", pipeline::grid_json(opt.grid)},
             {"folds", opt.k_folds},
             {"replicates", opt.bootstrap_replicates},
             {"strict_balance", opt.strict_balance},
             {"convoy_as_friendly", common.convoy_as_friendly},
             {"strict_reciprocity", common.strict_reciprocity},
             {"lexicons",
              common.lexicons.empty() ? "builtin" : common.lexicons}},
        json{{"n_pairs", s.cohort.n_pairs},
             {"n_rows", s.train.n_rows},
             {"best", pipeline::config_json(s.train.best)},
             {"accuracy", s.train.accuracy},
             {"f1", s.train.f1},
             {"mcc", s.train.mcc},
             {"mcc_ci",
              json::array({s.train.mcc_ci_low, s.train.mcc_ci_high})}});
    std::printf(
        "report(%s): %zu pairs, %zu rows; accuracy %.3f (majority %.3f), F1 "
        "%.3f, MCC %.3f [%.3f, %.3f]\n",
        common.task.c_str(), s.cohort.n_pairs, s.train.n_rows,
        s.train.accuracy, s.train.majority_accuracy, s.train.f1, s.train.mcc,
        s.train.mcc_ci_low, s.train.mcc_ci_high);
    return kExitOk;
  }

  throw pipeline::InputError("unknown command '" + cmd + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"relationship labeling and betrayal prediction from Diplomacy "
               "game logs"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "betrayal 1.0.0");
  app.set_config("--config", "", "flat key=value config file; flags override");

  CommonOpts common;
  GridOpts grid;
  SynthOpts synth;
  std::vector<std::string> inputs;

  auto* ingest = app.add_subcommand(
      "ingest", "normalize raw game logs into a working corpus");
  add_out_option(ingest, common);
  ingest->add_option("files", inputs, "game log files (jsonl)")
      ->required()
      ->expected(-1);

  auto* synth_cmd = app.add_subcommand(
      "synth", "generate a corpus with known relationship structure");
  add_out_option(synth_cmd, common);
  synth_cmd->add_option("--seed", common.seed, "generator seed")
      ->capture_default_str();
  add_synth_options(synth_cmd, synth);

  auto* relate = app.add_subcommand(
      "relate", "label acts, friendships and betrayals in the corpus");
  add_out_option(relate, common);
  relate->add_flag("--convoy-as-friendly", common.convoy_as_friendly,
                   "count convoys as friendly acts");
  relate->add_flag("--strict-reciprocity", common.strict_reciprocity,
                   "require two friendly acts per direction in a span");

  auto* cohort = app.add_subcommand(
      "cohort", "match betrayals to controls and expand task instances");
  add_out_option(cohort, common);
  cohort->add_option("--seed", common.seed, "matching seed")
      ->capture_default_str();
  cohort->add_flag("--strict-balance", common.strict_balance,
                   "fail when matched cohorts differ on a covariate");

  auto* featurize = app.add_subcommand(
      "featurize", "score instance conversations against the cue lexicons");
  add_out_option(featurize, common);
  add_task_option(featurize, common);
  featurize->add_option("--lexicons", common.lexicons,
                        "lexicon directory (default: built-in lists)");

  auto* train = app.add_subcommand(
      "train", "grid search, cross-validate and fit the task model");
  add_out_option(train, common);
  add_task_option(train, common);
  train->add_option("--seed", common.seed, "fold and bootstrap seed")
      ->capture_default_str();
  add_grid_options(train, grid);

  auto* evaluate = app.add_subcommand(
      "evaluate", "apply a saved model to a feature table");
  add_out_option(evaluate, common);
  add_task_option(evaluate, common);
  evaluate->add_option("files", inputs,
                       "optional model and feature table paths")
      ->expected(0, 2);

  auto* report = app.add_subcommand(
      "report", "run the full chain from corpus to figures and rankings");
  add_out_option(report, common);
  add_task_option(report, common);
  report->add_option("--seed", common.seed, "seed for matching and folds")
      ->capture_default_str();
  report->add_option("--lexicons", common.lexicons,
                     "lexicon directory (default: built-in lists)");
  report->add_flag("--convoy-as-friendly", common.convoy_as_friendly,
                   "count convoys as friendly acts");
  report->add_flag("--strict-reciprocity", common.strict_reciprocity,
                   "require two friendly acts per direction in a span");
  report->add_flag("--strict-balance", common.strict_balance,
                   "fail when matched cohorts differ on a covariate");
  add_grid_options(report, grid);

  // lets a config file address subcommand options via [section] or
  // dotted keys (e.g. synth.games=12), and lets --config appear after the
  // subcommand name by falling unmatched options through to the parent
  for (auto* sub : app.get_subcommands(nullptr)) {
    sub->configurable();
    sub->fallthrough();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  const std::string cmd = app.get_subcommands().front()->get_name();
  try {
    return dispatch(cmd, common, grid, synth, inputs);
  } catch (const pipeline::InputError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitInput;
  } catch (const betrayal::cohort::InsufficientControls& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitInput;
  } catch (const betrayal::synth::InvalidSpec& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitInput;
  } catch (const betrayal::model::ArtifactError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitInput;
  } catch (const betrayal::model::SingleClass& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitInput;
  } catch (const betrayal::model::TooFewGroups& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitInput;
  } catch (const betrayal::gamelog::SyntaxError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitInput;
  } catch (const betrayal::gamelog::SchemaError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitInput;
  } catch (const betrayal::gamelog::ConsistencyError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitInput;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitInput;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "failed: %s\n", e.what());
    return kExitRuntime;
  }
}
