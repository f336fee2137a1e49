#pragma once

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "betrayal/cohort.hpp"
#include "betrayal/gamelog.hpp"
#include "betrayal/lingcues.hpp"
#include "betrayal/model.hpp"
#include "betrayal/relations.hpp"
#include "betrayal/rng.hpp"
#include "betrayal/stats.hpp"
#include "betrayal/svg.hpp"
#include "betrayal/synth.hpp"

// File-to-file stages behind the command line tool.  Every stage reads and
// writes conventional filenames under one output directory, records a
// manifest of input/output content hashes, and skips itself when nothing it
// depends on has changed.  Outputs carry no timestamps or absolute paths, so
// rerunning a stage with the same inputs and seed reproduces identical bytes.
namespace betrayal::pipeline {

namespace fs = std::filesystem;
using gamelog::json;

// Bad or missing user-supplied data: wrong files, malformed rows, datasets
// too small to work with.  The CLI reports these as input errors.
struct InputError : std::runtime_error {
  explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

struct InsufficientData : InputError {
  explicit InsufficientData(const std::string& what) : InputError(what) {}
};

// Failure to produce an output (disk, permissions).
struct IoError : std::runtime_error {
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

// Raised under --strict-balance when matching leaves the cohorts detectably
// different on a covariate.
struct BalanceFailure : std::runtime_error {
  BalanceFailure(double p_length, double p_start)
      : std::runtime_error(
            "matched cohorts differ on a covariate (p_length=" +
            std::to_string(p_length) + ", p_start=" + std::to_string(p_start) +
            ", threshold 0.05)") {}
};

enum class Task { longterm, imminent };

inline std::string to_string(Task t) {
  return t == Task::longterm ? "longterm" : "imminent";
}

inline Task parse_task(const std::string& name) {
  if (name == "longterm") return Task::longterm;
  if (name == "imminent") return Task::imminent;
  throw InputError("unknown task '" + name + "' (expected longterm|imminent)");
}

// --- files ---------------------------------------------------------------

inline std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw InputError("cannot read " + p.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Writes via a sibling temp file and an atomic rename, so readers never see
// a half-written output and a failed run never clobbers a previous one.
inline void write_file_atomic(const fs::path& p, const std::string& content) {
  std::error_code ec;
  if (p.has_parent_path()) fs::create_directories(p.parent_path(), ec);
  const fs::path tmp = p.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << content;
    if (!out.flush()) throw IoError("short write to " + tmp.string());
  }
  fs::rename(tmp, p, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + ": " + ec.message());
}

inline std::string hash_bytes(const std::string& bytes) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(
                    rng::fnv1a(bytes.data(), bytes.size())));
  return buf;
}

inline std::string file_hash(const fs::path& p) {
  return hash_bytes(read_file(p));
}

inline json load_json(const fs::path& p) {
  try {
    return json::parse(read_file(p));
  } catch (const json::parse_error& e) {
    throw InputError(p.string() + ": " + e.what());
  }
}

template <typename Fn>
inline void for_each_jsonl(const fs::path& p, Fn&& fn) {
  std::istringstream in(read_file(p));
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      fn(json::parse(line), line_no);
    } catch (const json::exception& e) {
      throw InputError(p.string() + ":" + std::to_string(line_no) + ": " +
                       e.what());
    }
  }
}

// --- layout ----------------------------------------------------------------

// One output directory holds every stage product under fixed names; task
// specific files carry the task name so both tasks can coexist.
struct Paths {
  fs::path out;

  fs::path corpus() const { return out / "corpus.jsonl"; }
  fs::path corpus_stats() const { return out / "corpus_stats.json"; }
  fs::path truth() const { return out / "synth_truth.json"; }
  fs::path acts() const { return out / "acts.jsonl"; }
  fs::path spans() const { return out / "spans.jsonl"; }
  fs::path betrayals() const { return out / "betrayals.jsonl"; }
  fs::path transitions_csv() const { return out / "transitions.csv"; }
  fs::path transitions_json() const { return out / "transitions.json"; }
  fs::path pairs() const { return out / "pairs.jsonl"; }
  fs::path balance() const { return out / "balance.json"; }
  fs::path cohort_summary() const { return out / "cohort_summary.json"; }
  fs::path instances(Task t) const {
    return out / ("instances_" + to_string(t) + ".jsonl");
  }
  fs::path pruned() const { return out / "pruned_connectives.json"; }
  fs::path features(Task t) const {
    return out / ("features_" + to_string(t) + ".csv");
  }
  fs::path model(Task t) const {
    return out / ("model_" + to_string(t) + ".txt");
  }
  fs::path cv(Task t) const { return out / ("cv_" + to_string(t) + ".json"); }
  fs::path eval(Task t) const {
    return out / ("eval_" + to_string(t) + ".json");
  }
  fs::path figure_data(Task t) const {
    return out / ("cues_by_t_" + to_string(t) + ".csv");
  }
  fs::path figure(const std::string& name, Task t) const {
    return out / (name + "_" + to_string(t) + ".svg");
  }
  fs::path ranking_csv(Task t) const {
    return out / ("ranking_" + to_string(t) + ".csv");
  }
  fs::path ranking_svg(Task t) const {
    return out / ("ranking_" + to_string(t) + ".svg");
  }
  fs::path report(Task t) const {
    return out / ("report_" + to_string(t) + ".json");
  }
  fs::path manifest(const std::string& stage) const {
    return out / "manifests" / (stage + ".json");
  }
};

// --- manifests ---------------------------------------------------------------

// What a stage consumed and produced.  Input keys are paths as given;
// output keys are relative to the output directory so two runs in different
// directories still produce identical bytes.
struct StageManifest {
  std::string stage;
  json params;
  std::map<std::string, std::string> inputs;
  std::map<std::string, std::string> outputs;
};

inline json to_json(const StageManifest& m) {
  return json{{"stage", m.stage},
              {"params", m.params},
              {"inputs", m.inputs},
              {"outputs", m.outputs}};
}

// A stage is fresh when its previous manifest recorded the same parameters
// and input hashes and every recorded output still matches on disk.
inline bool stage_fresh(const Paths& paths, const StageManifest& want) {
  const fs::path mpath = paths.manifest(want.stage);
  if (!fs::exists(mpath)) return false;
  json j;
  try {
    j = load_json(mpath);
  } catch (const std::exception&) {
    return false;  // unreadable manifest means rerun, not failure
  }
  try {
    if (j.at("stage").get<std::string>() != want.stage) return false;
    if (j.at("params") != want.params) return false;
    const auto inputs = j.at("inputs").get<std::map<std::string, std::string>>();
    if (inputs != want.inputs) return false;
    for (const auto& [rel, hash] :
         j.at("outputs").get<std::map<std::string, std::string>>()) {
      const fs::path p = paths.out / rel;
      if (!fs::exists(p) || file_hash(p) != hash) return false;
    }
  } catch (const std::exception&) {
    return false;
  }
  return true;
}

inline void finish_stage(const Paths& paths, StageManifest m,
                         const std::vector<fs::path>& outputs) {
  for (const auto& p : outputs)
    m.outputs[fs::relative(p, paths.out).generic_string()] = file_hash(p);
  write_file_atomic(paths.manifest(m.stage), to_json(m).dump(2) + "\n");
}

// Inputs that live under the output directory are keyed relative to it, so
// runs in differently named directories still write identical manifests.
inline std::map<std::string, std::string> hash_inputs(
    const Paths& paths, const std::vector<fs::path>& inputs) {
  std::map<std::string, std::string> out;
  for (const auto& p : inputs) {
    std::error_code ec;
    const fs::path rel = fs::relative(p, paths.out, ec);
    const std::string rel_str = rel.generic_string();
    const bool inside = !ec && !rel_str.empty() && rel_str != "." &&
                        rel_str.rfind("..", 0) != 0;
    out[inside ? rel_str : p.generic_string()] = file_hash(p);
  }
  return out;
}

// --- corpus io ---------------------------------------------------------------

inline std::vector<gamelog::GameLog> load_corpus_file(const fs::path& p) {
  std::vector<gamelog::GameLog> corpus;
  std::istringstream in(read_file(p));
  try {
    corpus = gamelog::load_corpus(in);
  } catch (const std::exception& e) {
    throw InputError(p.string() + ": " + e.what());
  }
  if (corpus.empty()) throw InputError(p.string() + ": no games");
  return corpus;
}

inline std::string corpus_to_jsonl(const std::vector<gamelog::GameLog>& games) {
  std::string out;
  for (const auto& g : games) out += gamelog::to_json(g).dump() + "\n";
  return out;
}

// --- ingest --------------------------------------------------------------

struct IngestSummary {
  std::size_t n_games = 0;
  std::size_t n_messages_raw = 0;
  std::size_t n_messages_kept = 0;
  bool cached = false;
};

inline std::size_t count_messages(const gamelog::GameLog& g) {
  std::size_t n = 0;
  for (const auto& s : g.seasons) n += s.messages.size();
  return n;
}

// Normalizes one or more raw logs into the working corpus: drops broadcast
// and admin traffic, keeps power-to-power messages, and records corpus-level
// volume statistics.
inline IngestSummary run_ingest(const std::vector<fs::path>& inputs,
                                const Paths& paths) {
  if (inputs.empty()) throw InputError("ingest: no input files");
  StageManifest m{"ingest", json{{"inputs", inputs.size()}},
                  hash_inputs(paths, inputs), {}};
  if (stage_fresh(paths, m)) {
    const json j = load_json(paths.corpus_stats());
    IngestSummary s;
    s.n_games = j.at("n_games").get<std::size_t>();
    s.n_messages_raw = j.at("n_messages_raw").get<std::size_t>();
    s.n_messages_kept = j.at("n_messages_kept").get<std::size_t>();
    s.cached = true;
    return s;
  }

  IngestSummary summary;
  std::vector<gamelog::GameLog> kept;
  for (const auto& p : inputs) {
    for (auto& game : load_corpus_file(p)) {
      summary.n_messages_raw += count_messages(game);
      kept.push_back(gamelog::filter_messages(game));
      summary.n_messages_kept += count_messages(kept.back());
    }
  }
  summary.n_games = kept.size();

  const auto stats = gamelog::corpus_statistics(kept);
  const auto dist = [](const gamelog::DistSummary& d) {
    return json{{"n", d.n}, {"q1", d.q1}, {"median", d.median}, {"q3", d.q3}};
  };
  const json stats_json{{"n_games", stats.n_games},
                        {"n_messages", stats.n_messages},
                        {"n_messages_raw", summary.n_messages_raw},
                        {"n_messages_kept", summary.n_messages_kept},
                        {"messages_per_game", dist(stats.messages_per_game)},
                        {"sentences_per_message",
                         dist(stats.sentences_per_message)},
                        {"words_per_sentence", dist(stats.words_per_sentence)}};

  write_file_atomic(paths.corpus(), corpus_to_jsonl(kept));
  write_file_atomic(paths.corpus_stats(), stats_json.dump(2) + "\n");
  finish_stage(paths, m, {paths.corpus(), paths.corpus_stats()});
  return summary;
}

// --- synth ---------------------------------------------------------------

struct SynthSummary {
  std::size_t n_games = 0;
  std::size_t n_friendships = 0;
  std::size_t n_betrayals = 0;
  bool cached = false;
};

// Generates a corpus with a known relationship structure in place of
// ingesting real logs; downstream stages cannot tell the difference.
inline SynthSummary run_synth(const synth::SynthSpec& spec, const Paths& paths) {
  StageManifest m{"synth", synth::to_json(spec), {}, {}};
  if (stage_fresh(paths, m)) {
    const json j = load_json(paths.truth());
    SynthSummary s;
    s.n_games = spec.n_games;
    s.n_friendships = j.at("n_friendships").get<std::size_t>();
    s.n_betrayals = j.at("n_betrayals").get<std::size_t>();
    s.cached = true;
    return s;
  }

  const auto result = synth::generate(spec);
  write_file_atomic(paths.corpus(), corpus_to_jsonl(result.games));
  write_file_atomic(paths.truth(),
                    synth::to_json(spec, result.truth).dump(2) + "\n");
  finish_stage(paths, m, {paths.corpus(), paths.truth()});

  SynthSummary s;
  s.n_games = result.games.size();
  s.n_friendships = result.truth.dyads.size();
  s.n_betrayals = result.truth.n_betrayals();
  return s;
}

// --- relate --------------------------------------------------------------

struct RelateSummary {
  std::size_t n_acts = 0;
  std::size_t n_spans = 0;
  std::size_t n_betrayals = 0;
  double dissolve_rate = std::numeric_limits<double>::quiet_NaN();
  double resolve_rate = std::numeric_limits<double>::quiet_NaN();
  double rate_ratio = std::numeric_limits<double>::quiet_NaN();
  bool cached = false;
};

inline const char* act_kind_name(relations::ActKind k) {
  return k == relations::ActKind::friendly ? "friendly" : "hostile";
}

inline json span_json(const relations::FriendshipSpan& s) {
  return json{{"game_id", s.game_id},
              {"a", s.dyad.a},
              {"b", s.dyad.b},
              {"first", s.first_friendly_season},
              {"last", s.last_friendly_season},
              {"length", s.length_seasons},
              {"start_offset", s.start_offset}};
}

// Labels every dyad's acts, extracts stable friendships and betrayals, and
// tabulates how relationship states persist season over season.
inline RelateSummary run_relate(const Paths& paths,
                                const relations::ClassifyOptions& copts = {},
                                const relations::SpanOptions& sopts = {}) {
  StageManifest m{"relate",
                  json{{"convoy_as_friendly", copts.convoy_as_friendly},
                       {"strict_reciprocity", sopts.strict_reciprocity}},
                  hash_inputs(paths, {paths.corpus()}),
                  {}};
  if (stage_fresh(paths, m)) {
    const json j = load_json(paths.transitions_json());
    RelateSummary s;
    s.n_acts = j.at("n_acts").get<std::size_t>();
    s.n_spans = j.at("n_spans").get<std::size_t>();
    s.n_betrayals = j.at("n_betrayals").get<std::size_t>();
    s.dissolve_rate = j.at("dissolve_rate").is_null()
                          ? std::numeric_limits<double>::quiet_NaN()
                          : j.at("dissolve_rate").get<double>();
    s.resolve_rate = j.at("resolve_rate").is_null()
                         ? std::numeric_limits<double>::quiet_NaN()
                         : j.at("resolve_rate").get<double>();
    s.rate_ratio = j.at("rate_ratio").is_null()
                       ? std::numeric_limits<double>::quiet_NaN()
                       : j.at("rate_ratio").get<double>();
    s.cached = true;
    return s;
  }

  const auto corpus = load_corpus_file(paths.corpus());
  RelateSummary summary;
  std::string acts_out, spans_out, betrayals_out;
  std::vector<relations::DyadTimeline> timelines;
  for (const auto& game : corpus) {
    auto rel = relations::analyze_game(game, copts, sopts);
    for (const auto& tl : rel.timelines) {
      for (const auto& act : tl.acts) {
        acts_out += json{{"game_id", tl.game_id},
                         {"a", tl.pair.a},
                         {"b", tl.pair.b},
                         {"season", act.season_index},
                         {"kind", act_kind_name(act.kind)},
                         {"actor", act.actor},
                         {"recipient", act.recipient}}
                        .dump() +
                    "\n";
        ++summary.n_acts;
      }
    }
    for (const auto& span : rel.spans) {
      spans_out += span_json(span).dump() + "\n";
      ++summary.n_spans;
    }
    for (const auto& rec : rel.betrayals) {
      json j = span_json(rec.span);
      j["betrayer"] = rec.betrayer;
      j["victim"] = rec.victim;
      j["betrayal_season"] = rec.betrayal_season;
      betrayals_out += j.dump() + "\n";
      ++summary.n_betrayals;
    }
    for (auto& tl : rel.timelines) timelines.push_back(std::move(tl));
  }

  std::string cells_csv = "kind,age,exposures,transitions,probability\n";
  if (summary.n_acts > 0) {
    const auto stats = relations::transition_statistics(timelines);
    summary.dissolve_rate = stats.dissolve_rate;
    summary.resolve_rate = stats.resolve_rate;
    summary.rate_ratio = stats.rate_ratio;
    char buf[40];
    for (const auto& [key, cell] : stats.cells) {
      std::snprintf(buf, sizeof buf, "%.17g", cell.probability());
      cells_csv += std::string(act_kind_name(key.first)) + "," +
                   std::to_string(key.second) + "," +
                   std::to_string(cell.exposures) + "," +
                   std::to_string(cell.transitions) + "," + buf + "\n";
    }
  }
  const json summary_json{{"n_acts", summary.n_acts},
                          {"n_spans", summary.n_spans},
                          {"n_betrayals", summary.n_betrayals},
                          {"dissolve_rate", summary.dissolve_rate},
                          {"resolve_rate", summary.resolve_rate},
                          {"rate_ratio", summary.rate_ratio}};

  write_file_atomic(paths.acts(), acts_out);
  write_file_atomic(paths.spans(), spans_out);
  write_file_atomic(paths.betrayals(), betrayals_out);
  write_file_atomic(paths.transitions_csv(), cells_csv);
  write_file_atomic(paths.transitions_json(), summary_json.dump(2) + "\n");
  finish_stage(paths, m,
               {paths.acts(), paths.spans(), paths.betrayals(),
                paths.transitions_csv(), paths.transitions_json()});
  return summary;
}

// --- cohort --------------------------------------------------------------

inline relations::FriendshipSpan span_from_json(const json& j) {
  relations::FriendshipSpan s;
  s.game_id = j.at("game_id").get<std::string>();
  s.dyad.a = j.at("a").get<std::string>();
  s.dyad.b = j.at("b").get<std::string>();
  s.first_friendly_season = j.at("first").get<std::size_t>();
  s.last_friendly_season = j.at("last").get<std::size_t>();
  s.length_seasons = j.at("length").get<std::size_t>();
  s.start_offset = j.at("start_offset").get<std::size_t>();
  return s;
}

struct CohortSummary {
  std::size_t n_betrayals = 0;
  std::size_t n_candidates = 0;
  std::size_t n_pairs = 0;
  double p_length = std::numeric_limits<double>::quiet_NaN();
  double p_start = std::numeric_limits<double>::quiet_NaN();
  std::size_t n_longterm = 0;
  std::size_t n_imminent = 0;
  double imminent_positive_fraction = std::numeric_limits<double>::quiet_NaN();
  bool cached = false;
};

// Matches each betrayal with the closest never-betrayed friendship on
// length and start, checks covariate balance, and expands both cohorts into
// the per-season instances of the two prediction tasks.
inline CohortSummary run_cohort(const Paths& paths, std::uint64_t seed,
                                bool strict_balance) {
  StageManifest m{"cohort",
                  json{{"seed", seed}, {"strict_balance", strict_balance}},
                  hash_inputs(paths, {paths.spans(), paths.betrayals()}),
                  {}};
  const auto opt_double = [](const json& j) {
    return j.is_null() ? std::numeric_limits<double>::quiet_NaN()
                       : j.get<double>();
  };
  if (stage_fresh(paths, m)) {
    const json j = load_json(paths.cohort_summary());
    CohortSummary s;
    s.n_betrayals = j.at("n_betrayals").get<std::size_t>();
    s.n_candidates = j.at("n_candidates").get<std::size_t>();
    s.n_pairs = j.at("n_pairs").get<std::size_t>();
    s.p_length = opt_double(j.at("p_length"));
    s.p_start = opt_double(j.at("p_start"));
    s.n_longterm = j.at("n_longterm").get<std::size_t>();
    s.n_imminent = j.at("n_imminent").get<std::size_t>();
    s.imminent_positive_fraction =
        opt_double(j.at("imminent_positive_fraction"));
    s.cached = true;
    return s;
  }

  std::vector<relations::BetrayalRecord> betrayals;
  for_each_jsonl(paths.betrayals(), [&](const json& j, std::size_t) {
    relations::BetrayalRecord rec;
    rec.span = span_from_json(j);
    rec.betrayer = j.at("betrayer").get<std::string>();
    rec.victim = j.at("victim").get<std::string>();
    rec.betrayal_season = j.at("betrayal_season").get<std::size_t>();
    betrayals.push_back(std::move(rec));
  });

  // a friendship qualifies as a control only when that dyad never appears
  // in the betrayal list for the same game
  std::set<std::string> betrayed;
  for (const auto& rec : betrayals)
    betrayed.insert(rec.span.game_id + "/" + rec.span.dyad.key());
  std::vector<relations::FriendshipSpan> candidates;
  for_each_jsonl(paths.spans(), [&](const json& j, std::size_t) {
    auto span = span_from_json(j);
    if (!betrayed.count(span.game_id + "/" + span.dyad.key()))
      candidates.push_back(std::move(span));
  });

  const auto match = cohort::match_controls(betrayals, candidates, seed);
  if (strict_balance &&
      (match.balance.p_length <= 0.05 || match.balance.p_start <= 0.05))
    throw BalanceFailure(match.balance.p_length, match.balance.p_start);

  std::string pairs_out;
  for (const auto& pair : match.pairs) {
    json b = span_json(pair.betrayal.span);
    b["betrayer"] = pair.betrayal.betrayer;
    b["victim"] = pair.betrayal.victim;
    b["betrayal_season"] = pair.betrayal.betrayal_season;
    pairs_out += json{{"betrayal", b},
                      {"control", span_json(pair.control)},
                      {"distance", pair.distance}}
                     .dump() +
                 "\n";
  }

  const auto longterm = cohort::label_longterm_task(match.pairs);
  const auto imminent = cohort::label_imminent_task(betrayals);
  const auto instances_jsonl = [](const std::vector<cohort::TaskInstance>& v) {
    std::string out;
    for (const auto& inst : v)
      out += json{{"game_id", inst.game_id},
                  {"dyad", inst.dyad},
                  {"season", inst.season_index},
                  {"t", inst.t},
                  {"label", inst.label}}
                 .dump() +
             "\n";
    return out;
  };

  CohortSummary s;
  s.n_betrayals = betrayals.size();
  s.n_candidates = candidates.size();
  s.n_pairs = match.pairs.size();
  s.p_length = match.balance.p_length;
  s.p_start = match.balance.p_start;
  s.n_longterm = longterm.size();
  s.n_imminent = imminent.instances.size();
  s.imminent_positive_fraction = imminent.positive_fraction;

  const json balance_json{{"n_pairs", s.n_pairs},
                          {"p_length", s.p_length},
                          {"p_start", s.p_start}};
  const json summary_json{
      {"n_betrayals", s.n_betrayals},
      {"n_candidates", s.n_candidates},
      {"n_pairs", s.n_pairs},
      {"p_length", s.p_length},
      {"p_start", s.p_start},
      {"n_longterm", s.n_longterm},
      {"n_imminent", s.n_imminent},
      {"imminent_positive_fraction", s.imminent_positive_fraction}};

  write_file_atomic(paths.pairs(), pairs_out);
  write_file_atomic(paths.balance(), balance_json.dump(2) + "\n");
  write_file_atomic(paths.instances(Task::longterm),
                    instances_jsonl(longterm));
  write_file_atomic(paths.instances(Task::imminent),
                    instances_jsonl(imminent.instances));
  write_file_atomic(paths.cohort_summary(), summary_json.dump(2) + "\n");
  finish_stage(paths, m,
               {paths.pairs(), paths.balance(), paths.instances(Task::longterm),
                paths.instances(Task::imminent), paths.cohort_summary()});
  return s;
}

// --- featurize -------------------------------------------------------------

struct FeaturizeSummary {
  std::size_t n_instances = 0;
  std::size_t n_features = 0;
  std::size_t n_pruned = 0;
  bool cached = false;
};

inline std::vector<cohort::TaskInstance> read_instances(const fs::path& p) {
  std::vector<cohort::TaskInstance> out;
  for_each_jsonl(p, [&](const json& j, std::size_t) {
    cohort::TaskInstance inst;
    inst.game_id = j.at("game_id").get<std::string>();
    inst.dyad = j.at("dyad").get<std::string>();
    const auto bar = inst.dyad.find('|');
    if (bar == std::string::npos)
      throw InputError(p.string() + ": dyad without role separator");
    inst.betrayer = inst.dyad.substr(0, bar);
    inst.victim = inst.dyad.substr(bar + 1);
    inst.season_index = j.at("season").get<std::size_t>();
    inst.t = j.at("t").get<long>();
    inst.label = j.at("label").get<int>();
    out.push_back(std::move(inst));
  });
  return out;
}

inline std::size_t count_lines(const std::string& text) {
  return static_cast<std::size_t>(
      std::count(text.begin(), text.end(), '\n'));
}

// Scores every instance's dyad-season conversation against the cue
// lexicons.  Connective families that appear in too many messages corpus
// wide are pruned before extraction, so the same phrase list adapts to the
// register of the corpus at hand.
inline FeaturizeSummary run_featurize(const Paths& paths, Task task,
                                      const std::string& lexicon_dir = "") {
  std::vector<fs::path> inputs{paths.corpus(), paths.instances(task)};
  if (!lexicon_dir.empty()) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(lexicon_dir))
      if (entry.is_regular_file()) files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    inputs.insert(inputs.end(), files.begin(), files.end());
  }
  StageManifest m{"featurize_" + to_string(task),
                  json{{"task", to_string(task)},
                       {"lexicons", lexicon_dir.empty() ? "builtin"
                                                        : lexicon_dir}},
                  hash_inputs(paths, inputs),
                  {}};
  if (stage_fresh(paths, m)) {
    FeaturizeSummary s;
    const std::string csv = read_file(paths.features(task));
    s.n_instances = count_lines(csv) - 1;
    s.n_features = lingcues::SeasonFeatures::kSize;
    s.n_pruned = load_json(paths.pruned()).at("pruned").size();
    s.cached = true;
    return s;
  }

  const auto corpus_raw = load_corpus_file(paths.corpus());
  std::vector<gamelog::GameLog> corpus;
  corpus.reserve(corpus_raw.size());
  for (const auto& g : corpus_raw)
    corpus.push_back(gamelog::filter_messages(g));

  auto instances = read_instances(paths.instances(task));

  constexpr double kPruneThreshold = 0.2;
  auto lex = lexicon_dir.empty() ? lingcues::LexiconSet::builtin()
                                 : lingcues::load_lexicons(lexicon_dir);
  std::vector<std::string> texts;
  for (const auto& g : corpus)
    for (const auto& season : g.seasons)
      for (const auto& msg : season.messages) texts.push_back(msg.text);
  if (texts.empty())
    throw InputError("featurize: corpus has no usable messages");
  lex = lingcues::prune_frequent_connectives(texts, std::move(lex),
                                             kPruneThreshold);
  const lingcues::CueExtractor extractor(lex);

  std::map<std::string, const gamelog::GameLog*> by_id;
  for (const auto& g : corpus) by_id[g.game_id] = &g;
  for (auto& inst : instances) {
    const auto it = by_id.find(inst.game_id);
    if (it == by_id.end())
      throw InputError("featurize: instance references unknown game '" +
                       inst.game_id + "'");
    const auto& game = *it->second;
    if (inst.season_index >= game.seasons.size())
      throw InputError("featurize: instance season out of range in game '" +
                       inst.game_id + "'");
    const auto f = lingcues::aggregate_season_features(
        game.seasons[inst.season_index].messages, inst.betrayer, inst.victim,
        extractor);
    const auto values = f.values();
    inst.features.assign(values.begin(), values.end());
  }

  const auto names = lingcues::SeasonFeatures::feature_names();
  std::ostringstream csv;
  cohort::write_csv(csv, instances, names);

  const json pruned_json{{"threshold", kPruneThreshold},
                         {"pruned", lex.pruned}};

  write_file_atomic(paths.features(task), csv.str());
  write_file_atomic(paths.pruned(), pruned_json.dump(2) + "\n");
  finish_stage(paths, m, {paths.features(task), paths.pruned()});

  FeaturizeSummary s;
  s.n_instances = instances.size();
  s.n_features = names.size();
  s.n_pruned = lex.pruned.size();
  return s;
}

// --- feature table io ------------------------------------------------------

struct LabeledData {
  std::vector<cohort::TaskInstance> instances;
  model::Dataset dataset;
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

// Reads the feature table back into instances plus a model-ready dataset.
// The first five columns identify the instance; the rest are features.
inline LabeledData read_features_csv(const fs::path& p) {
  const std::string text = read_file(p);
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line))
    throw InputError(p.string() + ": empty feature table");
  const auto header = split_csv_line(line);
  const std::vector<std::string> id_cols{"game_id", "dyad", "season", "t",
                                         "label"};
  if (header.size() < id_cols.size() ||
      !std::equal(id_cols.begin(), id_cols.end(), header.begin()))
    throw InputError(p.string() + ": unexpected feature table header");

  LabeledData data;
  data.dataset.feature_names.assign(header.begin() + 5, header.end());
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size())
      throw InputError(p.string() + ":" + std::to_string(line_no) +
                       ": wrong column count");
    try {
      cohort::TaskInstance inst;
      inst.game_id = fields[0];
      inst.dyad = fields[1];
      const auto bar = inst.dyad.find('|');
      if (bar == std::string::npos) throw std::invalid_argument("dyad");
      inst.betrayer = inst.dyad.substr(0, bar);
      inst.victim = inst.dyad.substr(bar + 1);
      inst.season_index = std::stoul(fields[2]);
      inst.t = std::stol(fields[3]);
      inst.label = std::stoi(fields[4]);
      inst.features.reserve(fields.size() - 5);
      for (std::size_t i = 5; i < fields.size(); ++i)
        inst.features.push_back(std::stod(fields[i]));
      data.dataset.X.push_back(inst.features);
      data.dataset.y.push_back(inst.label);
      data.dataset.groups.push_back(inst.game_id);
      data.instances.push_back(std::move(inst));
    } catch (const std::exception&) {
      throw InputError(p.string() + ":" + std::to_string(line_no) +
                       ": malformed row");
    }
  }
  if (data.instances.empty())
    throw InputError(p.string() + ": no instances");
  return data;
}

// --- train ---------------------------------------------------------------

// Below these sizes cross-validated model selection is noise, so the stage
// refuses to run rather than report unstable numbers.
constexpr std::size_t kMinTrainingInstances = 20;

inline json config_json(const model::ModelConfig& cfg) {
  return json{{"k_features", cfg.k_features == model::kAllFeatures
                                 ? json("all")
                                 : json(cfg.k_features)},
              {"scorer", model::to_string(cfg.scorer)},
              {"class_weight", model::to_string(cfg.class_weight)},
              {"regularizer", model::to_string(cfg.regularizer)},
              {"C", cfg.C},
              {"objective", model::to_string(cfg.objective)}};
}

inline model::ModelConfig config_from_json(const json& j) {
  model::ModelConfig cfg;
  cfg.k_features = j.at("k_features").is_string()
                       ? model::kAllFeatures
                       : j.at("k_features").get<std::size_t>();
  cfg.scorer = model::parse_scorer(j.at("scorer").get<std::string>());
  cfg.class_weight =
      model::parse_class_weight(j.at("class_weight").get<std::string>());
  cfg.regularizer =
      model::parse_regularizer(j.at("regularizer").get<std::string>());
  cfg.C = j.at("C").get<double>();
  cfg.objective = model::parse_objective(j.at("objective").get<std::string>());
  return cfg;
}

inline json grid_json(const model::GridSpec& grid) {
  json k = json::array();
  for (auto v : grid.k_features)
    k.push_back(v == model::kAllFeatures ? json("all") : json(v));
  json scorers = json::array(), weights = json::array(), regs = json::array();
  for (auto v : grid.scorers) scorers.push_back(model::to_string(v));
  for (auto v : grid.class_weights) weights.push_back(model::to_string(v));
  for (auto v : grid.regularizers) regs.push_back(model::to_string(v));
  return json{{"k_features", k},
              {"scorers", scorers},
              {"class_weights", weights},
              {"regularizers", regs},
              {"c_values", grid.c_values},
              {"objective", model::to_string(grid.objective)}};
}

// Default search space: coarse feature counts, balanced class weights with
// an l2 penalty, and C across five decades.  This keeps a full report run
// interactive; the complete grid is available on request.
inline model::GridSpec default_grid(Task task) {
  model::GridSpec g;
  g.k_features = {8, 16, model::kAllFeatures};
  g.scorers = {model::Scorer::anova_f};
  g.class_weights = {model::ClassWeight::balanced};
  g.regularizers = {model::Regularizer::l2};
  g.c_values = {1e-3, 1e-2, 1e-1, 1.0, 10.0};
  g.objective = task == Task::imminent ? model::Objective::f1
                                       : model::Objective::accuracy;
  return g;
}

struct TrainSummary {
  model::ModelConfig best;
  double accuracy = 0.0;
  double f1 = 0.0;
  double mcc = 0.0;
  double mcc_ci_low = 0.0;
  double mcc_ci_high = 0.0;
  double majority_accuracy = 0.0;
  std::size_t n_rows = 0;
  bool cached = false;
};

inline json confusion_json(const model::Confusion& c) {
  return json{{"tp", c.tp}, {"fp", c.fp}, {"fn", c.fn}, {"tn", c.tn}};
}

// Cross-validated grid search over the feature table, with the winning
// configuration refit on all rows and saved as the task model.
inline TrainSummary run_train(const Paths& paths, Task task,
                              const model::GridSpec& grid,
                              std::size_t k_folds = 5, std::uint64_t seed = 0,
                              std::size_t bootstrap_replicates = 1000) {
  StageManifest m{"train_" + to_string(task),
                  json{{"task", to_string(task)},
                       {"grid", grid_json(grid)},
                       {"k_folds", k_folds},
                       {"seed", seed},
                       {"bootstrap_replicates", bootstrap_replicates}},
                  hash_inputs(paths, {paths.features(task)}),
                  {}};
  if (stage_fresh(paths, m)) {
    const json j = load_json(paths.cv(task));
    TrainSummary s;
    s.best = config_from_json(j.at("best"));
    const auto& metrics = j.at("metrics");
    s.accuracy = metrics.at("accuracy").get<double>();
    s.f1 = metrics.at("f1").get<double>();
    s.mcc = metrics.at("mcc").get<double>();
    s.mcc_ci_low = metrics.at("mcc_ci").at(0).get<double>();
    s.mcc_ci_high = metrics.at("mcc_ci").at(1).get<double>();
    s.majority_accuracy = metrics.at("majority_accuracy").get<double>();
    s.n_rows = j.at("n_rows").get<std::size_t>();
    s.cached = true;
    return s;
  }

  const auto data = read_features_csv(paths.features(task));
  const auto& ds = data.dataset;
  if (ds.n_rows() < kMinTrainingInstances)
    throw InsufficientData(to_string(task) + ": " +
                           std::to_string(ds.n_rows()) +
                           " instances, need at least " +
                           std::to_string(kMinTrainingInstances));
  const std::set<std::string> games(ds.groups.begin(), ds.groups.end());
  if (games.size() < k_folds)
    throw InsufficientData(to_string(task) + ": " +
                           std::to_string(games.size()) +
                           " games cannot fill " + std::to_string(k_folds) +
                           " folds");
  const bool has_pos = std::count(ds.y.begin(), ds.y.end(), 1) > 0;
  const bool has_neg = std::count(ds.y.begin(), ds.y.end(), 0) > 0;
  if (!has_pos || !has_neg)
    throw InsufficientData(to_string(task) + ": both labels required");

  const auto result =
      model::grid_search(ds, grid, k_folds, seed, bootstrap_replicates);

  std::ostringstream artifact;
  model::save_model(artifact, result.model);

  json table = json::array();
  for (const auto& row : result.table) {
    json r = config_json(row.config);
    r["mean_objective"] = row.mean_objective;
    table.push_back(std::move(r));
  }
  const auto& rep = result.report;
  const json cv_json{
      {"task", to_string(task)},
      {"n_rows", ds.n_rows()},
      {"n_features", ds.n_features()},
      {"n_games", games.size()},
      {"k_folds", k_folds},
      {"seed", seed},
      {"grid_size", grid.size()},
      {"best", config_json(result.best)},
      {"metrics",
       json{{"accuracy", rep.accuracy},
            {"f1", rep.f1},
            {"mcc", rep.mcc},
            {"majority_accuracy", rep.majority_accuracy},
            {"chance_mcc", rep.chance_mcc},
            {"mcc_ci", json::array({rep.mcc_bootstrap.ci_low,
                                    rep.mcc_bootstrap.ci_high})},
            {"mcc_se", rep.mcc_bootstrap.se},
            {"bootstrap_replicates", rep.mcc_bootstrap.replicates},
            {"confusion", confusion_json(rep.confusion)},
            {"fold_accuracy", rep.fold_accuracy},
            {"fold_f1", rep.fold_f1},
            {"fold_mcc", rep.fold_mcc}}},
      {"table", table}};

  write_file_atomic(paths.model(task), artifact.str());
  write_file_atomic(paths.cv(task), cv_json.dump(2) + "\n");
  finish_stage(paths, m, {paths.model(task), paths.cv(task)});

  TrainSummary s;
  s.best = result.best;
  s.accuracy = rep.accuracy;
  s.f1 = rep.f1;
  s.mcc = rep.mcc;
  s.mcc_ci_low = rep.mcc_bootstrap.ci_low;
  s.mcc_ci_high = rep.mcc_bootstrap.ci_high;
  s.majority_accuracy = rep.majority_accuracy;
  s.n_rows = ds.n_rows();
  return s;
}

// --- evaluate --------------------------------------------------------------

struct EvaluateSummary {
  double accuracy = 0.0;
  double f1 = 0.0;
  double mcc = 0.0;
  double majority_accuracy = 0.0;
  double fp_within_two_seasons = std::numeric_limits<double>::quiet_NaN();
  std::size_t n_rows = 0;
  bool cached = false;
};

// Applies a saved model to a feature table.  For the imminent task it also
// reports how many false alarms land within two seasons of the real
// betrayal, where a wrong season is still a useful warning.
inline EvaluateSummary run_evaluate(const Paths& paths, Task task,
                                    fs::path model_path = {},
                                    fs::path features_path = {}) {
  if (model_path.empty()) model_path = paths.model(task);
  if (features_path.empty()) features_path = paths.features(task);
  StageManifest m{"evaluate_" + to_string(task),
                  json{{"task", to_string(task)}},
                  hash_inputs(paths, {model_path, features_path}),
                  {}};
  const auto opt_double = [](const json& j) {
    return j.is_null() ? std::numeric_limits<double>::quiet_NaN()
                       : j.get<double>();
  };
  if (stage_fresh(paths, m)) {
    const json j = load_json(paths.eval(task));
    EvaluateSummary s;
    s.accuracy = j.at("accuracy").get<double>();
    s.f1 = j.at("f1").get<double>();
    s.mcc = j.at("mcc").get<double>();
    s.majority_accuracy = j.at("majority_accuracy").get<double>();
    s.fp_within_two_seasons = opt_double(j.at("fp_within_two_seasons"));
    s.n_rows = j.at("n_rows").get<std::size_t>();
    s.cached = true;
    return s;
  }

  std::istringstream artifact(read_file(model_path));
  const auto trained = model::load_model(artifact);
  const auto data = read_features_csv(features_path);

  // the artifact stores selected feature names: catch tables whose layout
  // differs from what the model was fit on
  for (std::size_t j = 0; j < trained.selected_indices.size(); ++j) {
    const std::size_t idx = trained.selected_indices[j];
    if (idx >= data.dataset.feature_names.size() ||
        data.dataset.feature_names[idx] != trained.feature_names[j])
      throw InputError("evaluate: feature table does not match the model");
  }

  std::vector<int> preds;
  preds.reserve(data.dataset.n_rows());
  for (const auto& row : data.dataset.X)
    preds.push_back(model::predict_label(trained, row));
  const auto report = model::evaluate(preds, data.dataset.y);

  EvaluateSummary s;
  s.accuracy = report.accuracy;
  s.f1 = report.f1;
  s.mcc = report.mcc;
  s.majority_accuracy = report.majority_accuracy;
  s.n_rows = data.dataset.n_rows();
  if (task == Task::imminent)
    s.fp_within_two_seasons =
        cohort::fp_proximity_fraction(data.instances, preds);

  const json eval_json{{"task", to_string(task)},
                       {"n_rows", s.n_rows},
                       {"accuracy", s.accuracy},
                       {"f1", s.f1},
                       {"mcc", s.mcc},
                       {"majority_accuracy", s.majority_accuracy},
                       {"confusion", confusion_json(report.confusion)},
                       {"fp_within_two_seasons", s.fp_within_two_seasons}};
  write_file_atomic(paths.eval(task), eval_json.dump(2) + "\n");
  finish_stage(paths, m, {paths.eval(task)});
  return s;
}

// --- figures ---------------------------------------------------------------

struct FiguresSummary {
  std::size_t n_cells = 0;
  bool cached = false;
};

constexpr std::size_t kFigureMinCell = 5;  // rows per (label, t) cell

// Cue trajectories against the countdown to betrayal: per (label, t) cell,
// the mean of every feature with a bootstrap confidence band.  Charts of the
// sentiment, planning and politeness pairs plot the betrayal cohort.
inline FiguresSummary run_figures(const Paths& paths, Task task,
                                  std::uint64_t seed,
                                  std::size_t replicates = 400) {
  StageManifest m{"figures_" + to_string(task),
                  json{{"task", to_string(task)},
                       {"seed", seed},
                       {"replicates", replicates}},
                  hash_inputs(paths, {paths.features(task)}),
                  {}};
  if (stage_fresh(paths, m)) {
    FiguresSummary s;
    s.n_cells = count_lines(read_file(paths.figure_data(task))) - 1;
    s.cached = true;
    return s;
  }

  const auto data = read_features_csv(paths.features(task));
  const auto& names = data.dataset.feature_names;

  std::map<std::pair<int, long>, std::vector<std::size_t>> cells;
  for (std::size_t i = 0; i < data.instances.size(); ++i)
    cells[{data.instances[i].label, data.instances[i].t}].push_back(i);

  struct Cell {
    int label;
    long t;
    std::size_t n;
    std::vector<double> mean, lo, hi;
  };
  std::vector<Cell> rows;
  const auto mean_stat = [](std::span<const double> v) {
    return stats::detail::mean(v);
  };
  for (const auto& [key, members] : cells) {
    if (members.size() < kFigureMinCell) continue;
    Cell cell{key.first, key.second, members.size(), {}, {}, {}};
    for (std::size_t f = 0; f < names.size(); ++f) {
      std::vector<double> sample;
      sample.reserve(members.size());
      for (std::size_t i : members) sample.push_back(data.dataset.X[i][f]);
      const std::uint64_t cell_seed =
          seed ^ rng::fnv1a(to_string(task) + "/" + std::to_string(key.first) +
                            "/" + std::to_string(key.second) + "/" + names[f]);
      const auto boot =
          stats::bootstrap(sample, mean_stat, replicates, cell_seed);
      cell.mean.push_back(boot.point);
      cell.lo.push_back(boot.ci_low);
      cell.hi.push_back(boot.ci_high);
    }
    rows.push_back(std::move(cell));
  }

  std::string csv = "label,t,n,feature,mean,ci_low,ci_high\n";
  for (const auto& cell : rows)
    for (std::size_t f = 0; f < names.size(); ++f)
      csv += std::to_string(cell.label) + "," + std::to_string(cell.t) + "," +
             std::to_string(cell.n) + "," + names[f] + "," +
             model::detail::fmt_double(cell.mean[f]) + "," +
             model::detail::fmt_double(cell.lo[f]) + "," +
             model::detail::fmt_double(cell.hi[f]) + "\n";

  const auto feature_index = [&](const std::string& name) {
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end())
      throw InputError("figures: feature table lacks column '" + name + "'");
    return static_cast<std::size_t>(it - names.begin());
  };
  // betrayal cohort only, plotted on a reversed axis so the betrayal sits
  // at zero on the right and time flows toward it
  const auto series_for = [&](const std::string& feature,
                              const std::string& label) {
    svg::Series s;
    s.name = label;
    const std::size_t f = feature_index(feature);
    for (const auto& cell : rows) {
      if (cell.label != 1) continue;
      s.points.push_back({-static_cast<double>(cell.t), cell.mean[f]});
      s.err_low.push_back(cell.lo[f]);
      s.err_high.push_back(cell.hi[f]);
    }
    return s;
  };
  const std::string x_label = "seasons relative to betrayal (0 = betrayal)";
  const auto chart = [&](const std::string& title, const std::string& y_label,
                         const std::string& bf, const std::string& vf) {
    return svg::line_chart(title, x_label, y_label,
                           {series_for(bf, "betrayer"),
                            series_for(vf, "victim")});
  };

  write_file_atomic(paths.figure_data(task), csv);
  write_file_atomic(paths.figure("sentiment", task),
                    chart("Positive sentiment before betrayal",
                          "positive sentences per sentence", "b_frac_positive",
                          "v_frac_positive"));
  write_file_atomic(paths.figure("planning", task),
                    chart("Planning talk before betrayal",
                          "planning markers per sentence", "b_planning_rate",
                          "v_planning_rate"));
  write_file_atomic(paths.figure("politeness", task),
                    chart("Politeness before betrayal", "mean politeness score",
                          "b_mean_politeness", "v_mean_politeness"));
  finish_stage(paths, m,
               {paths.figure_data(task), paths.figure("sentiment", task),
                paths.figure("planning", task),
                paths.figure("politeness", task)});

  FiguresSummary s;
  s.n_cells = rows.size() * names.size();
  return s;
}

// --- report ----------------------------------------------------------------

struct ReportOptions {
  Task task = Task::longterm;
  relations::ClassifyOptions classify;
  relations::SpanOptions spans;
  bool strict_balance = false;
  std::string lexicon_dir;
  model::GridSpec grid;
  std::size_t k_folds = 5;
  std::uint64_t seed = 0;
  std::size_t bootstrap_replicates = 1000;
};

struct ReportSummary {
  RelateSummary relate;
  CohortSummary cohort;
  FeaturizeSummary featurize;
  TrainSummary train;
  EvaluateSummary evaluate;
  FiguresSummary figures;
};

// The full chain from a corpus to a readable result: relationships, matched
// cohorts, features, model selection, evaluation, figures and a coefficient
// ranking, all under one output directory.
inline ReportSummary run_report(const Paths& paths, const ReportOptions& opt) {
  ReportSummary summary;
  summary.relate = run_relate(paths, opt.classify, opt.spans);
  summary.cohort = run_cohort(paths, opt.seed, opt.strict_balance);
  summary.featurize = run_featurize(paths, opt.task, opt.lexicon_dir);
  summary.train = run_train(paths, opt.task, opt.grid, opt.k_folds, opt.seed,
                            opt.bootstrap_replicates);
  summary.evaluate = run_evaluate(paths, opt.task);
  summary.figures = run_figures(paths, opt.task, opt.seed);

  const Task task = opt.task;
  StageManifest m{"report_" + to_string(task),
                  json{{"task", to_string(task)}},
                  hash_inputs(paths, {paths.model(task), paths.cv(task),
                               paths.eval(task), paths.cohort_summary()}),
                  {}};
  if (stage_fresh(paths, m)) return summary;

  std::istringstream artifact(read_file(paths.model(task)));
  const auto trained = model::load_model(artifact);
  const auto ranked = model::rank_features(trained);

  std::string ranking_csv = "rank,feature,weight\n";
  json ranking_json = json::array();
  std::vector<std::pair<std::string, double>> bars;
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    ranking_csv += std::to_string(i + 1) + "," + ranked[i].name + "," +
                   model::detail::fmt_double(ranked[i].weight) + "\n";
    ranking_json.push_back(
        json{{"feature", ranked[i].name}, {"weight", ranked[i].weight}});
    if (bars.size() < 15) bars.emplace_back(ranked[i].name, ranked[i].weight);
  }

  const json report_json{
      {"task", to_string(task)},
      {"relationships", load_json(paths.transitions_json())},
      {"cohort", load_json(paths.cohort_summary())},
      {"cv", load_json(paths.cv(task))},
      {"eval", load_json(paths.eval(task))},
      {"ranking", ranking_json},
      {"figures",
       json::array({paths.figure("sentiment", task).filename().string(),
                     paths.figure("planning", task).filename().string(),
                     paths.figure("politeness", task).filename().string()})}};

  write_file_atomic(paths.ranking_csv(task), ranking_csv);
  write_file_atomic(
      paths.ranking_svg(task),
      svg::bar_chart("Model coefficients (" + to_string(task) + ")", bars));
  write_file_atomic(paths.report(task), report_json.dump(2) + "\n");
  finish_stage(paths, m,
               {paths.ranking_csv(task), paths.ranking_svg(task),
                paths.report(task)});
  return summary;
}

}  // namespace betrayal::pipeline
