#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <set>
#include <sstream>

#include "betrayal/relations.hpp"
#include "betrayal/synth.hpp"

using namespace betrayal;

namespace {

synth::SynthSpec small_spec() {
  synth::SynthSpec spec;
  spec.n_games = 6;
  spec.min_seasons = 10;
  spec.max_seasons = 14;
  spec.message_rate = 2.0;
  spec.seed = 17;
  return spec;
}

std::string dyad_key(const std::string& game, const std::string& a,
                     const std::string& b) {
  return game + "|" + a + "|" + b;
}

}  // namespace

TEST_CASE("zero hazard leaves every friendship intact") {
  auto spec = small_spec();
  spec.hazard = 0.0;
  const auto out = synth::generate(spec);
  CHECK(out.truth.dyads.size() == 18);
  CHECK(out.truth.n_betrayals() == 0);

  std::size_t spans = 0, betrayals = 0;
  for (const auto& game : out.games) {
    const auto rel = relations::analyze_game(game);
    spans += rel.spans.size();
    betrayals += rel.betrayals.size();
  }
  CHECK(spans == 18);
  CHECK(betrayals == 0);
}

TEST_CASE("certain hazard betrays at the first eligible season") {
  auto spec = small_spec();
  spec.hazard = 1.0;
  const auto out = synth::generate(spec);
  CHECK(out.truth.n_betrayals() == out.truth.dyads.size());
  for (const auto& d : out.truth.dyads) {
    CHECK(d.betrayed);
    CHECK(d.betrayal_season == d.first_friendly + 3);
    CHECK(d.last_friendly + 1 == d.betrayal_season);
  }
}

TEST_CASE("generation is deterministic for a fixed seed") {
  const auto spec = small_spec();
  const auto first = synth::generate(spec);
  const auto second = synth::generate(spec);
  REQUIRE(first.games.size() == second.games.size());
  for (std::size_t i = 0; i < first.games.size(); ++i)
    CHECK(gamelog::to_json(first.games[i]).dump() ==
          gamelog::to_json(second.games[i]).dump());
  CHECK(synth::to_json(spec, first.truth).dump() ==
        synth::to_json(spec, second.truth).dump());
}

TEST_CASE("synthetic games survive a parser round trip") {
  const auto out = synth::generate(small_spec());
  for (const auto& game : out.games) {
    const std::string line = gamelog::to_json(game).dump();
    const auto parsed = gamelog::parse_game_log(line, 1);
    CHECK(gamelog::to_json(parsed).dump() == line);
  }
}

TEST_CASE("relationship analysis recovers the planted history") {
  synth::SynthSpec spec;
  spec.n_games = 40;
  spec.hazard = 0.25;
  spec.message_rate = 1.5;
  spec.seed = 23;
  const auto out = synth::generate(spec);

  std::map<std::string, relations::BetrayalRecord> found;
  std::map<std::string, relations::FriendshipSpan> found_spans;
  for (const auto& game : out.games) {
    const auto rel = relations::analyze_game(game);
    for (const auto& rec : rel.betrayals)
      found.emplace(dyad_key(game.game_id, rec.span.dyad.a, rec.span.dyad.b),
                    rec);
    for (const auto& span : rel.spans)
      found_spans.emplace(dyad_key(game.game_id, span.dyad.a, span.dyad.b),
                          span);
  }

  CHECK(found_spans.size() == out.truth.dyads.size());

  std::size_t recovered = 0;
  for (const auto& d : out.truth.dyads) {
    const auto key = dyad_key(d.game_id, d.a, d.b);
    REQUIRE(found_spans.count(key) == 1);
    const auto& span = found_spans.at(key);
    CHECK(span.first_friendly_season == d.first_friendly);
    CHECK(span.last_friendly_season == d.last_friendly);
    if (!d.betrayed) {
      CHECK(found.count(key) == 0);
      continue;
    }
    const auto it = found.find(key);
    if (it != found.end() && it->second.betrayer == d.betrayer &&
        it->second.betrayal_season == d.betrayal_season)
      ++recovered;
  }
  const std::size_t planted = out.truth.n_betrayals();
  REQUIRE(planted > 10);
  CHECK(found.size() == planted);  // nothing spurious
  CHECK(static_cast<double>(recovered) >=
        0.99 * static_cast<double>(planted));
}

TEST_CASE("ground truth bookkeeping is consistent") {
  auto spec = small_spec();
  spec.hazard = 0.3;
  const auto out = synth::generate(spec);
  CHECK(out.truth.dyads.size() == 3 * spec.n_games);
  CHECK(out.truth.n_betrayals() + out.truth.n_survivors() ==
        out.truth.dyads.size());
  for (const auto& d : out.truth.dyads) {
    CHECK(d.a < d.b);
    if (d.betrayed) {
      CHECK(d.betrayal_season >= d.first_friendly + 3);
      CHECK(d.last_friendly == d.betrayal_season - 1);
      CHECK((d.betrayer == d.a || d.betrayer == d.b));
      CHECK(d.victim == (d.betrayer == d.a ? d.b : d.a));
    } else {
      CHECK(d.betrayer.empty());
    }
  }
}

TEST_CASE("filler vocabulary avoids every cue phrase") {
  const auto lex = lingcues::LexiconSet::builtin();
  std::set<std::string> cue_tokens;
  const auto add_phrase = [&](const std::string& phrase) {
    std::string tok;
    for (char c : phrase) {
      if (c == ' ') {
        if (!tok.empty()) cue_tokens.insert(tok);
        tok.clear();
      } else if (c != '^') {
        tok.push_back(c);
      }
    }
    if (!tok.empty()) cue_tokens.insert(tok);
  };
  for (const auto& entry : lex.connectives) add_phrase(entry.first);
  for (const auto& p : lex.planning_markers) add_phrase(p);
  for (const auto& p : lex.claim_markers) add_phrase(p);
  for (const auto& p : lex.premise_markers) add_phrase(p);
  for (const auto& p : lex.subjectivity_phrases) add_phrase(p);
  for (const auto& entry : lex.sentiment) add_phrase(entry.first);
  for (const auto& p : lex.negators) add_phrase(p);
  for (const auto& cue : lex.politeness_cues) {
    std::string alt;
    for (char c : cue.pattern) {
      if (c == '|') {
        add_phrase(alt);
        alt.clear();
      } else {
        alt.push_back(c);
      }
    }
    add_phrase(alt);
  }

  for (const auto& word : synth::filler_words()) {
    INFO(word);
    CHECK_FALSE(cue_tokens.contains(word));
  }
}

TEST_CASE("planted effects shift the measured cues") {
  synth::SynthSpec spec;
  spec.n_games = 40;
  spec.hazard = 0.2;
  spec.message_rate = 3.0;
  spec.effects.betrayer_positive_sentiment = 1.5;
  spec.effects.betrayer_planning = 0.6;
  spec.effects.victim_politeness_near = 0.5;
  spec.seed = 31;
  const auto out = synth::generate(spec);

  const lingcues::CueExtractor extractor(lingcues::LexiconSet::builtin());
  double sum_pos = 0.0, sum_plan = 0.0;
  std::size_t n_win = 0;
  double near_polite = 0.0, far_polite = 0.0;
  std::size_t n_near = 0, n_far = 0;

  std::map<std::string, const gamelog::GameLog*> by_id;
  for (const auto& game : out.games) by_id[game.game_id] = &game;

  for (const auto& d : out.truth.dyads) {
    if (!d.betrayed) continue;
    const auto& game = *by_id.at(d.game_id);
    for (std::size_t s = d.first_friendly; s + 2 <= d.betrayal_season; ++s) {
      const auto f = lingcues::aggregate_season_features(
          game.seasons[s].messages, d.betrayer, d.victim, extractor);
      const auto imb = f.imbalance();
      sum_pos += imb.frac_positive;
      sum_plan += imb.planning_rate;
      ++n_win;
      const std::size_t t = d.betrayal_season - s;
      if (t <= 2) {
        near_polite += f.from_v.mean_politeness;
        ++n_near;
      } else if (t >= 4) {
        far_polite += f.from_v.mean_politeness;
        ++n_far;
      }
    }
  }
  REQUIRE(n_win > 100);
  REQUIRE(n_near > 20);
  REQUIRE(n_far > 20);
  CHECK(sum_pos / static_cast<double>(n_win) > 0.0);
  CHECK(sum_plan / static_cast<double>(n_win) < 0.0);
  CHECK(near_polite / static_cast<double>(n_near) <
        far_polite / static_cast<double>(n_far));
}

TEST_CASE("invalid specs are rejected") {
  const auto bad = [](auto mutate) {
    auto spec = small_spec();
    mutate(spec);
    CHECK_THROWS_AS(synth::validate(spec), synth::InvalidSpec);
  };
  bad([](auto& s) { s.hazard = 1.5; });
  bad([](auto& s) { s.hazard = -0.1; });
  bad([](auto& s) { s.message_rate = 0.0; });
  bad([](auto& s) { s.max_seasons = s.min_seasons - 1; });
  bad([](auto& s) { s.n_games = 0; });
  bad([](auto& s) { s.min_seasons = 5; s.max_seasons = 5; });
  bad([](auto& s) { s.effects.betrayer_planning = 0.0; });
}

TEST_CASE("null effects are recognized") {
  CHECK(synth::EffectSizes{}.is_null());
  synth::EffectSizes shifted;
  shifted.betrayer_positive_sentiment = 1.5;
  CHECK_FALSE(shifted.is_null());
}

TEST_CASE("ground truth survives its json round trip") {
  const auto spec = small_spec();
  const auto out = synth::generate(spec);
  const auto j = synth::to_json(spec, out.truth);
  const auto back = synth::truth_from_json(j);
  REQUIRE(back.dyads.size() == out.truth.dyads.size());
  CHECK(back.n_betrayals() == out.truth.n_betrayals());
  for (std::size_t i = 0; i < back.dyads.size(); ++i) {
    CHECK(back.dyads[i].game_id == out.truth.dyads[i].game_id);
    CHECK(back.dyads[i].a == out.truth.dyads[i].a);
    CHECK(back.dyads[i].first_friendly == out.truth.dyads[i].first_friendly);
    CHECK(back.dyads[i].last_friendly == out.truth.dyads[i].last_friendly);
    CHECK(back.dyads[i].betrayed == out.truth.dyads[i].betrayed);
    if (back.dyads[i].betrayed) {
      CHECK(back.dyads[i].betrayer == out.truth.dyads[i].betrayer);
      CHECK(back.dyads[i].betrayal_season ==
            out.truth.dyads[i].betrayal_season);
    }
  }
  CHECK(j.at("n_betrayals").get<std::size_t>() == out.truth.n_betrayals());
}
