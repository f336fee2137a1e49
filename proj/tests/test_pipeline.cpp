#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "betrayal/pipeline.hpp"

using namespace betrayal;
namespace fs = std::filesystem;
using gamelog::json;

namespace {

// Fresh scratch directory per test section, removed on destruction.
struct TempDir {
  fs::path path;

  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() /
           ("betrayal_test_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

synth::SynthSpec small_world() {
  synth::SynthSpec spec;
  spec.n_games = 40;
  spec.min_seasons = 10;
  spec.max_seasons = 14;
  spec.hazard = 0.06;
  spec.message_rate = 2.0;
  spec.seed = 7;
  return spec;
}

// Runs the corpus-to-instances part of the chain once.
pipeline::CohortSummary seed_world(const pipeline::Paths& paths) {
  pipeline::run_synth(small_world(), paths);
  pipeline::run_relate(paths);
  return pipeline::run_cohort(paths, 7, false);
}

model::GridSpec tiny_grid() {
  model::GridSpec grid;
  grid.k_features = {16};
  grid.c_values = {0.01, 1.0};
  return grid;
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& entry : fs::recursive_directory_iterator(dir))
    if (entry.is_regular_file())
      out[fs::relative(entry.path(), dir).generic_string()] =
          pipeline::read_file(entry.path());
  return out;
}

}  // namespace

TEST_CASE("atomic writes replace content and leave no temp files") {
  TempDir dir("atomic");
  const fs::path p = dir.path / "nested" / "file.txt";
  pipeline::write_file_atomic(p, "first");
  CHECK(pipeline::read_file(p) == "first");
  pipeline::write_file_atomic(p, "second");
  CHECK(pipeline::read_file(p) == "second");
  std::size_t files = 0;
  for (const auto& e : fs::directory_iterator(p.parent_path())) {
    (void)e;
    ++files;
  }
  CHECK(files == 1);
  CHECK(pipeline::hash_bytes("second") == pipeline::file_hash(p));
  CHECK_THROWS_AS(pipeline::read_file(dir.path / "absent"),
                  pipeline::InputError);
}

TEST_CASE("task names round trip and bad names are rejected") {
  CHECK(pipeline::parse_task("longterm") == pipeline::Task::longterm);
  CHECK(pipeline::parse_task("imminent") == pipeline::Task::imminent);
  CHECK(pipeline::to_string(pipeline::Task::imminent) == "imminent");
  CHECK_THROWS_AS(pipeline::parse_task("soon"), pipeline::InputError);
}

TEST_CASE("synth and relate stages agree with direct generation") {
  TempDir dir("relate");
  const pipeline::Paths paths{dir.path};

  const auto synth_summary = pipeline::run_synth(small_world(), paths);
  const auto direct = synth::generate(small_world());
  CHECK(synth_summary.n_games == direct.games.size());
  CHECK(synth_summary.n_friendships == direct.truth.dyads.size());
  CHECK(synth_summary.n_betrayals == direct.truth.n_betrayals());
  CHECK_FALSE(synth_summary.cached);

  const auto relate_summary = pipeline::run_relate(paths);
  CHECK(relate_summary.n_spans == direct.truth.dyads.size());
  CHECK(relate_summary.n_betrayals == direct.truth.n_betrayals());
  CHECK(relate_summary.n_acts > 0);

  SECTION("files hold one record per line") {
    std::size_t spans = 0;
    pipeline::for_each_jsonl(paths.spans(),
                             [&](const json&, std::size_t) { ++spans; });
    CHECK(spans == relate_summary.n_spans);
    std::size_t betrayals = 0;
    pipeline::for_each_jsonl(paths.betrayals(), [&](const json& j,
                                                    std::size_t) {
      ++betrayals;
      CHECK(j.at("betrayal_season").get<std::size_t>() >
            j.at("first").get<std::size_t>());
      CHECK((j.at("betrayer").get<std::string>() == j.at("a") ||
             j.at("betrayer").get<std::string>() == j.at("b")));
    });
    CHECK(betrayals == relate_summary.n_betrayals);
  }

  SECTION("transitions table carries csv cells and pooled rates") {
    const auto csv = pipeline::read_file(paths.transitions_csv());
    CHECK(csv.rfind("kind,age,exposures,transitions,probability\n", 0) == 0);
    const json t = pipeline::load_json(paths.transitions_json());
    CHECK(t.at("n_spans").get<std::size_t>() == relate_summary.n_spans);
  }

  SECTION("second call is a cached no-op with identical bytes") {
    const auto before = snapshot(dir.path);
    const auto again = pipeline::run_relate(paths);
    CHECK(again.cached);
    CHECK(again.n_spans == relate_summary.n_spans);
    CHECK(snapshot(dir.path) == before);
  }

  SECTION("option changes invalidate the relate stage") {
    relations::SpanOptions strict;
    strict.strict_reciprocity = true;
    const auto strict_summary = pipeline::run_relate(paths, {}, strict);
    CHECK_FALSE(strict_summary.cached);
  }
}

TEST_CASE("cohort stage matches every betrayal and expands both tasks") {
  TempDir dir("cohort");
  const pipeline::Paths paths{dir.path};
  const auto summary = seed_world(paths);

  CHECK(summary.n_pairs == summary.n_betrayals);
  CHECK(summary.n_candidates >= summary.n_betrayals);
  CHECK(summary.n_longterm > 0);
  CHECK(summary.n_imminent > 0);
  CHECK(summary.imminent_positive_fraction > 0.0);
  CHECK(summary.imminent_positive_fraction < 1.0);

  SECTION("instances never touch the betrayal or final friendly season") {
    pipeline::for_each_jsonl(
        paths.instances(pipeline::Task::longterm),
        [&](const json& j, std::size_t) {
          if (j.at("label").get<int>() == 1) CHECK(j.at("t").get<long>() >= 2);
        });
  }

  SECTION("controls are never reused across pairs") {
    std::set<std::string> seen;
    pipeline::for_each_jsonl(paths.pairs(), [&](const json& j, std::size_t) {
      const auto& c = j.at("control");
      const std::string key = c.at("game_id").get<std::string>() + "/" +
                              c.at("a").get<std::string>() + "-" +
                              c.at("b").get<std::string>();
      CHECK(seen.insert(key).second);
    });
    CHECK(seen.size() == summary.n_pairs);
  }

  SECTION("summary reload is cache-hit identical") {
    const auto again = pipeline::run_cohort(paths, 7, false);
    CHECK(again.cached);
    CHECK(again.n_pairs == summary.n_pairs);
    CHECK(again.n_longterm == summary.n_longterm);
    CHECK(again.imminent_positive_fraction ==
          summary.imminent_positive_fraction);
  }

  SECTION("a different seed reruns the stage") {
    const auto again = pipeline::run_cohort(paths, 8, false);
    CHECK_FALSE(again.cached);
  }
}

TEST_CASE("featurize writes rows that match direct cue extraction") {
  TempDir dir("featurize");
  const pipeline::Paths paths{dir.path};
  const auto cohort_summary = seed_world(paths);

  const auto summary =
      pipeline::run_featurize(paths, pipeline::Task::longterm);
  CHECK(summary.n_instances == cohort_summary.n_longterm);
  CHECK(summary.n_features == lingcues::SeasonFeatures::kSize);

  const auto data =
      pipeline::read_features_csv(paths.features(pipeline::Task::longterm));
  REQUIRE(data.instances.size() == summary.n_instances);
  REQUIRE(data.dataset.n_features() == summary.n_features);
  CHECK(data.dataset.feature_names ==
        lingcues::SeasonFeatures::feature_names());

  SECTION("a sampled row equals the independently computed features") {
    // recompute from the corpus with the same pruning the stage applied
    const auto corpus = pipeline::load_corpus_file(paths.corpus());
    std::vector<std::string> texts;
    for (const auto& g : corpus)
      for (const auto& s : g.seasons)
        for (const auto& m : s.messages) texts.push_back(m.text);
    const auto lex = lingcues::prune_frequent_connectives(
        texts, lingcues::LexiconSet::builtin(), 0.2);
    const lingcues::CueExtractor extractor(lex);

    const auto& inst = data.instances[data.instances.size() / 2];
    const gamelog::GameLog* game = nullptr;
    for (const auto& g : corpus)
      if (g.game_id == inst.game_id) game = &g;
    REQUIRE(game != nullptr);
    const auto expected = lingcues::aggregate_season_features(
        game->seasons[inst.season_index].messages, inst.betrayer, inst.victim,
        extractor);
    const auto values = expected.values();
    REQUIRE(inst.features.size() == values.size());
    for (std::size_t i = 0; i < values.size(); ++i)
      CHECK(inst.features[i] == values[i]);  // %.17g survives the round trip
  }

  SECTION("labels and groups match the instance columns") {
    for (std::size_t i = 0; i < data.instances.size(); ++i) {
      CHECK(data.dataset.y[i] == data.instances[i].label);
      CHECK(data.dataset.groups[i] == data.instances[i].game_id);
    }
  }
}

TEST_CASE("feature table rejects malformed input") {
  TempDir dir("badcsv");
  const fs::path p = dir.path / "features.csv";

  pipeline::write_file_atomic(p, "game_id,dyad,season\n");
  CHECK_THROWS_AS(pipeline::read_features_csv(p), pipeline::InputError);

  pipeline::write_file_atomic(
      p, "game_id,dyad,season,t,label,f0\ng1,A|B,3,2,1\n");
  CHECK_THROWS_AS(pipeline::read_features_csv(p), pipeline::InputError);

  pipeline::write_file_atomic(
      p, "game_id,dyad,season,t,label,f0\ng1,A|B,3,2,one,0.5\n");
  CHECK_THROWS_AS(pipeline::read_features_csv(p), pipeline::InputError);

  pipeline::write_file_atomic(p, "game_id,dyad,season,t,label,f0\n");
  CHECK_THROWS_AS(pipeline::read_features_csv(p), pipeline::InputError);

  pipeline::write_file_atomic(
      p, "game_id,dyad,season,t,label,f0\ng1,A|B,3,2,1,0.5\n");
  const auto data = pipeline::read_features_csv(p);
  CHECK(data.instances.size() == 1);
  CHECK(data.instances[0].betrayer == "A");
  CHECK(data.instances[0].victim == "B");
  CHECK(data.dataset.X[0][0] == 0.5);
}

TEST_CASE("train stage enforces minimum data requirements") {
  TempDir dir("traingate");
  const pipeline::Paths paths{dir.path};
  const fs::path p = paths.features(pipeline::Task::longterm);

  std::string csv = "game_id,dyad,season,t,label,f0\n";
  for (int i = 0; i < 10; ++i)
    csv += "g" + std::to_string(i) + ",A|B,1,2," + std::to_string(i % 2) +
           ",0.5\n";
  pipeline::write_file_atomic(p, csv);
  CHECK_THROWS_AS(
      pipeline::run_train(paths, pipeline::Task::longterm, tiny_grid()),
      pipeline::InsufficientData);  // below the instance floor

  csv = "game_id,dyad,season,t,label,f0\n";
  for (int i = 0; i < 30; ++i)
    csv += "g1,A|B,1,2," + std::to_string(i % 2) + ",0.5\n";
  pipeline::write_file_atomic(p, csv);
  CHECK_THROWS_AS(
      pipeline::run_train(paths, pipeline::Task::longterm, tiny_grid()),
      pipeline::InsufficientData);  // one game cannot fill five folds

  csv = "game_id,dyad,season,t,label,f0\n";
  for (int i = 0; i < 30; ++i)
    csv += "g" + std::to_string(i % 6) + ",A|B,1,2,1,0.5\n";
  pipeline::write_file_atomic(p, csv);
  CHECK_THROWS_AS(
      pipeline::run_train(paths, pipeline::Task::longterm, tiny_grid()),
      pipeline::InsufficientData);  // single class
}

TEST_CASE("train, evaluate and figures produce consistent artifacts") {
  TempDir dir("train");
  const pipeline::Paths paths{dir.path};
  seed_world(paths);
  pipeline::run_featurize(paths, pipeline::Task::longterm);

  const auto trained = pipeline::run_train(paths, pipeline::Task::longterm,
                                           tiny_grid(), 5, 7, 200);
  CHECK(trained.n_rows > 0);
  CHECK(trained.mcc_ci_low <= trained.mcc_ci_high);

  SECTION("saved model reloads and the cv table covers the grid") {
    std::istringstream artifact(
        pipeline::read_file(paths.model(pipeline::Task::longterm)));
    const auto m = model::load_model(artifact);
    CHECK(m.config == trained.best);
    const json cv = pipeline::load_json(paths.cv(pipeline::Task::longterm));
    CHECK(cv.at("table").size() == tiny_grid().size());
    CHECK(cv.at("n_rows").get<std::size_t>() == trained.n_rows);
  }

  SECTION("cached rerun returns the same summary") {
    const auto again = pipeline::run_train(paths, pipeline::Task::longterm,
                                           tiny_grid(), 5, 7, 200);
    CHECK(again.cached);
    CHECK(again.best == trained.best);
    CHECK(again.mcc == trained.mcc);
    CHECK(again.mcc_ci_low == trained.mcc_ci_low);
  }

  SECTION("evaluate scores the table the model was fit on") {
    const auto eval = pipeline::run_evaluate(paths, pipeline::Task::longterm);
    CHECK(eval.n_rows == trained.n_rows);
    CHECK(eval.accuracy >= 0.0);
    CHECK(eval.accuracy <= 1.0);
    CHECK(std::isnan(eval.fp_within_two_seasons));  // longterm has no alarm
  }

  SECTION("evaluate rejects a feature table with a different layout") {
    // rename a column the model actually selected
    std::istringstream artifact(
        pipeline::read_file(paths.model(pipeline::Task::longterm)));
    const auto m = model::load_model(artifact);
    REQUIRE_FALSE(m.feature_names.empty());
    const std::string& column = m.feature_names.front();

    const fs::path f = paths.features(pipeline::Task::longterm);
    std::string csv = pipeline::read_file(f);
    const auto pos = csv.find(column);
    REQUIRE(pos != std::string::npos);
    csv.replace(pos, column.size(), column + "x");
    const fs::path tampered = dir.path / "tampered.csv";
    pipeline::write_file_atomic(tampered, csv);
    CHECK_THROWS_AS(
        pipeline::run_evaluate(paths, pipeline::Task::longterm, {}, tampered),
        pipeline::InputError);
  }

  SECTION("figure data covers every populated cell") {
    const auto figures =
        pipeline::run_figures(paths, pipeline::Task::longterm, 7, 200);
    CHECK(figures.n_cells > 0);
    const auto csv =
        pipeline::read_file(paths.figure_data(pipeline::Task::longterm));
    CHECK(csv.rfind("label,t,n,feature,mean,ci_low,ci_high\n", 0) == 0);
    for (const char* name : {"sentiment", "planning", "politeness"}) {
      const auto svg_text =
          pipeline::read_file(paths.figure(name, pipeline::Task::longterm));
      CHECK(svg_text.rfind("<svg", 0) == 0);
      CHECK(svg_text.find("polyline") != std::string::npos);
    }
  }
}

TEST_CASE("imminent evaluation reports alarm proximity") {
  TempDir dir("imminent");
  const pipeline::Paths paths{dir.path};
  seed_world(paths);
  pipeline::run_featurize(paths, pipeline::Task::imminent);
  pipeline::run_train(paths, pipeline::Task::imminent, tiny_grid(), 5, 7, 200);
  const auto eval = pipeline::run_evaluate(paths, pipeline::Task::imminent);
  CHECK(eval.n_rows > 0);
  // NaN only when the model raised no false alarms at all
  if (!std::isnan(eval.fp_within_two_seasons)) {
    CHECK(eval.fp_within_two_seasons >= 0.0);
    CHECK(eval.fp_within_two_seasons <= 1.0);
  }
}

TEST_CASE("full report chain is reproducible byte for byte") {
  TempDir a("reportA"), b("reportB");
  pipeline::ReportOptions opt;
  opt.task = pipeline::Task::longterm;
  opt.grid = tiny_grid();
  opt.seed = 7;
  opt.bootstrap_replicates = 200;

  for (const auto* dir : {&a, &b}) {
    const pipeline::Paths paths{dir->path};
    pipeline::run_synth(small_world(), paths);
    pipeline::run_report(paths, opt);
  }

  const auto sa = snapshot(a.path), sb = snapshot(b.path);
  REQUIRE(sa.size() == sb.size());
  for (const auto& [rel, content] : sa) {
    INFO(rel);
    REQUIRE(sb.count(rel) == 1);
    CHECK(content == sb.at(rel));
  }

  SECTION("report artifacts aggregate the chain") {
    const pipeline::Paths paths{a.path};
    const json report =
        pipeline::load_json(paths.report(pipeline::Task::longterm));
    CHECK(report.at("task") == "longterm");
    CHECK(report.at("cv").at("best").is_object());
    CHECK(report.at("ranking").is_array());
    CHECK(report.at("ranking").size() > 0);
    const auto ranking =
        pipeline::read_file(paths.ranking_csv(pipeline::Task::longterm));
    CHECK(ranking.rfind("rank,feature,weight\n", 0) == 0);
    const auto bar =
        pipeline::read_file(paths.ranking_svg(pipeline::Task::longterm));
    CHECK(bar.rfind("<svg", 0) == 0);
  }
}

TEST_CASE("ingest filters to power-to-power traffic") {
  TempDir dir("ingest");
  const pipeline::Paths paths{dir.path};
  const fs::path src = fs::path(BETRAYAL_FIXTURE_DIR) / "mini_corpus.jsonl";

  const auto summary = pipeline::run_ingest({src}, paths);
  CHECK(summary.n_games == 2);
  CHECK(summary.n_messages_kept < summary.n_messages_raw);

  const auto corpus = pipeline::load_corpus_file(paths.corpus());
  for (const auto& g : corpus)
    for (const auto& s : g.seasons)
      for (const auto& m : s.messages) {
        CHECK_FALSE(m.broadcast());
        CHECK_FALSE(m.admin);
      }

  const json stats = pipeline::load_json(paths.corpus_stats());
  CHECK(stats.at("n_games").get<std::size_t>() == 2);
  CHECK(stats.at("n_messages_kept").get<std::size_t>() ==
        summary.n_messages_kept);

  const auto again = pipeline::run_ingest({src}, paths);
  CHECK(again.cached);
  CHECK(again.n_messages_raw == summary.n_messages_raw);

  CHECK_THROWS_AS(pipeline::run_ingest({dir.path / "absent.jsonl"}, paths),
                  pipeline::InputError);
  CHECK_THROWS_AS(pipeline::run_ingest({}, paths), pipeline::InputError);
}

TEST_CASE("line charts render deterministic markup with escapes") {
  svg::Series s;
  s.name = "a & b";
  s.points = {{0.0, 1.0}, {1.0, 2.0}, {2.0, 1.5}};
  s.err_low = {0.8, 1.7, 1.2};
  s.err_high = {1.2, 2.3, 1.8};
  const auto one = svg::line_chart("x < y", "t", "value", {s});
  const auto two = svg::line_chart("x < y", "t", "value", {s});
  CHECK(one == two);
  CHECK(one.rfind("<svg", 0) == 0);
  CHECK(one.find("x &lt; y") != std::string::npos);
  CHECK(one.find("a &amp; b") != std::string::npos);
  CHECK(one.find("polyline") != std::string::npos);
  // three circles for three points
  std::size_t circles = 0, at = 0;
  while ((at = one.find("<circle", at)) != std::string::npos) {
    ++circles;
    ++at;
  }
  CHECK(circles == 3);

  const auto bars = svg::bar_chart("w", {{"up", 0.5}, {"down", -0.25}});
  CHECK(bars.find("#1f77b4") != std::string::npos);   // positive fill
  CHECK(bars.find("#d62728") != std::string::npos);   // negative fill
  CHECK(bars.find("up") != std::string::npos);
  CHECK(bars.find("down") != std::string::npos);
}

TEST_CASE("strict balance aborts a detectably skewed matching") {
  TempDir dir("balance");
  const pipeline::Paths paths{dir.path};
  pipeline::run_synth(small_world(), paths);
  pipeline::run_relate(paths);

  const auto loose = pipeline::run_cohort(paths, 7, false);
  // survivors live much longer than betrayed friendships in this world, so
  // the matched cohorts stay skewed on length
  REQUIRE(loose.p_length <= 0.05);
  CHECK_THROWS_AS(pipeline::run_cohort(paths, 7, true),
                  pipeline::BalanceFailure);
}
