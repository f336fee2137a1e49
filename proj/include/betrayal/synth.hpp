#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "betrayal/gamelog.hpp"
#include "betrayal/lingcues.hpp"
#include "betrayal/rng.hpp"

// Synthetic game generator for desk-scale validation.  Games are built
// from pre-planned dyad arcs: three disjoint power pairs per game trade
// support orders until a per-season hazard dissolves the friendship into
// two hostile moves by the betrayer.  Message text is token salad drawn
// from the shipped lexicons plus a filler vocabulary that deliberately
// avoids every cue phrase, so planted rate shifts are the only signal.
namespace betrayal::synth {

struct InvalidSpec : std::runtime_error {
  explicit InvalidSpec(const std::string& what)
      : std::runtime_error("synth spec: " + what) {}
};

// Multiplicative rate shifts applied to betrayal dyads before the strike.
// Betrayer shifts act across the whole friendship; the victim politeness
// shift only applies within two seasons of the betrayal.
struct EffectSizes {
  double betrayer_positive_sentiment = 1.0;
  double betrayer_planning = 1.0;
  double victim_politeness_near = 1.0;

  bool is_null() const {
    return betrayer_positive_sentiment == 1.0 && betrayer_planning == 1.0 &&
           victim_politeness_near == 1.0;
  }
  bool operator==(const EffectSizes&) const = default;
};

struct SynthSpec {
  std::size_t n_games = 60;
  std::size_t min_seasons = 10;
  std::size_t max_seasons = 16;
  // probability per eligible season that a friendship dissolves
  double hazard = 0.08;
  // mean messages per direction per active season (always at least one)
  double message_rate = 3.0;
  EffectSizes effects;
  std::uint64_t seed = 1;

  bool operator==(const SynthSpec&) const = default;
};

inline void validate(const SynthSpec& spec) {
  if (spec.n_games == 0) throw InvalidSpec("n_games must be positive");
  if (spec.min_seasons < 6)
    throw InvalidSpec("need at least 6 seasons for a betrayal arc");
  if (spec.max_seasons < spec.min_seasons)
    throw InvalidSpec("max_seasons below min_seasons");
  if (!(spec.hazard >= 0.0 && spec.hazard <= 1.0))
    throw InvalidSpec("hazard outside [0, 1]");
  if (!(spec.message_rate > 0.0)) throw InvalidSpec("message_rate must be > 0");
  const auto positive = [](double v) { return v > 0.0; };
  if (!positive(spec.effects.betrayer_positive_sentiment) ||
      !positive(spec.effects.betrayer_planning) ||
      !positive(spec.effects.victim_politeness_near))
    throw InvalidSpec("effect sizes must be positive");
}

struct TrueDyad {
  std::string game_id;
  std::string a, b;  // the friendship pair, a < b
  std::size_t first_friendly = 0;
  std::size_t last_friendly = 0;
  bool betrayed = false;
  std::size_t betrayal_season = 0;  // first hostile season when betrayed
  std::string betrayer, victim;     // empty when the friendship survives
};

struct GroundTruth {
  std::vector<TrueDyad> dyads;

  std::size_t n_betrayals() const {
    std::size_t n = 0;
    for (const auto& d : dyads) n += d.betrayed;
    return n;
  }
  std::size_t n_survivors() const { return dyads.size() - n_betrayals(); }
};

struct SynthResult {
  std::vector<gamelog::GameLog> games;
  GroundTruth truth;
};

// Vocabulary used for non-cue tokens.  Every word here must stay clear of
// the cue lexicons and politeness patterns; a test enforces the claim.
inline const std::vector<std::string>& filler_words() {
  static const std::vector<std::string> kFiller{
      "army",    "fleet",   "garrison", "troops",  "border", "region",
      "province", "supply",  "harbor",   "channel", "river",  "valley",
      "bridge",  "road",    "city",     "town",    "port",   "fort",
      "camp",    "field",   "coast",    "inland",  "courier", "envoy",
      "letter",  "note",    "orders",   "spring",  "autumn", "turn",
      "board",   "table",   "piece",    "corner",  "flank",  "column",
      "line",    "front",   "march",    "quarter"};
  return kFiller;
}

namespace detail {

// Classic home centers keep the boards readable in dumps.
inline const std::vector<std::pair<std::string, std::string>>& home_map() {
  static const std::vector<std::pair<std::string, std::string>> kHomes{
      {"AUSTRIA", "VIE"}, {"ENGLAND", "LON"}, {"FRANCE", "PAR"},
      {"GERMANY", "BER"}, {"ITALY", "ROM"},   {"RUSSIA", "MOS"},
      {"TURKEY", "ANK"}};
  return kHomes;
}

inline std::string home_of(const std::string& power) {
  for (const auto& [p, t] : home_map())
    if (p == power) return t;
  throw std::logic_error("unknown power: " + power);
}

// Base per-sentence (politeness: per-message) cue emission rates.
inline constexpr double kPositiveRate = 0.22;
inline constexpr double kNegativeRate = 0.12;
inline constexpr double kPlanningRate = 0.30;
inline constexpr double kPoliteRate = 0.50;
inline constexpr double kClaimRate = 0.12;
inline constexpr double kPremiseRate = 0.12;
inline constexpr double kSubjectivityRate = 0.10;
inline constexpr double kConnectiveRate = 0.35;
inline constexpr double kQuestionRate = 0.15;
// victim politeness shifts only at relative index <= kNearWindow
inline constexpr std::size_t kNearWindow = 2;

struct Vocabulary {
  std::vector<std::string> positive, negative, planning, claims, premises,
      subjectivity, connectives;
};

inline Vocabulary build_vocabulary(const lingcues::LexiconSet& lex) {
  Vocabulary v;
  for (const auto& [word, sign] : lex.sentiment)
    (sign > 0 ? v.positive : v.negative).push_back(word);
  v.planning.assign(lex.planning_markers.begin(), lex.planning_markers.end());
  v.claims.assign(lex.claim_markers.begin(), lex.claim_markers.end());
  v.premises.assign(lex.premise_markers.begin(), lex.premise_markers.end());
  v.subjectivity.assign(lex.subjectivity_phrases.begin(),
                        lex.subjectivity_phrases.end());
  for (const auto& entry : lex.connectives) v.connectives.push_back(entry.first);
  if (v.positive.empty() || v.planning.empty())
    throw InvalidSpec("lexicons too small to synthesize from");
  return v;
}

inline const std::string& pick(const std::vector<std::string>& items,
                               rng::Xoshiro256& gen) {
  return items[gen.bounded(items.size())];
}

inline void insert_phrase(std::vector<std::string>& words,
                          const std::string& phrase, rng::Xoshiro256& gen) {
  // never at position 0: sentence-initial politeness anchors stay untouched
  const std::size_t at = 1 + gen.bounded(words.size());
  std::vector<std::string> tokens;
  std::string tok;
  for (char c : phrase) {
    if (c == ' ') {
      if (!tok.empty()) tokens.push_back(tok);
      tok.clear();
    } else {
      tok.push_back(c);
    }
  }
  if (!tok.empty()) tokens.push_back(tok);
  words.insert(words.begin() + static_cast<long>(at), tokens.begin(),
               tokens.end());
}

struct MessageRates {
  double positive = kPositiveRate;
  double planning = kPlanningRate;
  double polite = kPoliteRate;
};

inline std::string compose_message(const Vocabulary& vocab,
                                   const MessageRates& rates,
                                   rng::Xoshiro256& gen) {
  const std::size_t n_sentences = 1 + gen.bounded(3);
  const bool polite = gen.bernoulli(std::min(1.0, rates.polite));
  const std::size_t polite_sentence = gen.bounded(n_sentences);

  std::string text;
  for (std::size_t s = 0; s < n_sentences; ++s) {
    std::vector<std::string> words;
    const std::size_t n_words = 4 + gen.bounded(5);
    const auto& filler = filler_words();
    for (std::size_t w = 0; w < n_words; ++w)
      words.push_back(filler[gen.bounded(filler.size())]);

    if (gen.bernoulli(std::min(1.0, rates.positive)))
      insert_phrase(words, pick(vocab.positive, gen), gen);
    if (gen.bernoulli(kNegativeRate))
      insert_phrase(words, pick(vocab.negative, gen), gen);
    if (gen.bernoulli(std::min(1.0, rates.planning)))
      insert_phrase(words, pick(vocab.planning, gen), gen);
    if (gen.bernoulli(kConnectiveRate))
      insert_phrase(words, pick(vocab.connectives, gen), gen);
    if (gen.bernoulli(kClaimRate))
      insert_phrase(words, pick(vocab.claims, gen), gen);
    if (gen.bernoulli(kPremiseRate))
      insert_phrase(words, pick(vocab.premises, gen), gen);
    if (gen.bernoulli(kSubjectivityRate))
      insert_phrase(words, pick(vocab.subjectivity, gen), gen);
    if (polite && s == polite_sentence)
      insert_phrase(words, "thanks", gen);

    for (std::size_t w = 0; w < words.size(); ++w) {
      if (w) text.push_back(' ');
      text += words[w];
    }
    text += gen.bernoulli(kQuestionRate) ? "? " : ". ";
  }
  if (!text.empty() && text.back() == ' ') text.pop_back();
  return text;
}

}  // namespace detail

inline SynthResult generate(const SynthSpec& spec,
                            const lingcues::LexiconSet& lex) {
  validate(spec);
  const auto vocab = detail::build_vocabulary(lex);
  rng::Xoshiro256 gen(spec.seed);

  SynthResult result;
  for (std::size_t g = 0; g < spec.n_games; ++g) {
    gamelog::GameLog game;
    char id[32];
    std::snprintf(id, sizeof(id), "synth-%04zu", g);
    game.game_id = id;
    game.variant = "standard";
    for (const auto& home : detail::home_map()) game.powers.insert(home.first);

    const std::size_t n_seasons =
        spec.min_seasons +
        gen.bounded(spec.max_seasons - spec.min_seasons + 1);

    std::vector<std::string> powers(game.powers.begin(), game.powers.end());
    gen.shuffle(powers);
    const std::string loner = powers[6];

    // plan the three dyad arcs up front
    struct Arc {
      std::string a, b;        // a < b
      std::size_t first = 0;
      std::size_t betrayal = 0;  // 0 means the friendship survives
      std::string betrayer, victim;
    };
    std::vector<Arc> arcs;
    for (int pair = 0; pair < 3; ++pair) {
      Arc arc;
      arc.a = powers[2 * pair];
      arc.b = powers[2 * pair + 1];
      if (arc.b < arc.a) std::swap(arc.a, arc.b);
      arc.first = gen.bounded(3);
      for (std::size_t s = arc.first + 3; s + 1 < n_seasons; ++s)
        if (gen.bernoulli(spec.hazard)) {
          arc.betrayal = s;
          const bool a_strikes = gen.bernoulli(0.5);
          arc.betrayer = a_strikes ? arc.a : arc.b;
          arc.victim = a_strikes ? arc.b : arc.a;
          break;
        }
      arcs.push_back(arc);

      TrueDyad truth;
      truth.game_id = game.game_id;
      truth.a = arc.a;
      truth.b = arc.b;
      truth.first_friendly = arc.first;
      truth.betrayed = arc.betrayal != 0;
      if (truth.betrayed) {
        truth.betrayal_season = arc.betrayal;
        truth.last_friendly = arc.betrayal - 1;
        truth.betrayer = arc.betrayer;
        truth.victim = arc.victim;
      } else {
        truth.last_friendly = n_seasons - 1;
      }
      result.truth.dyads.push_back(truth);
    }

    for (std::size_t s = 0; s < n_seasons; ++s) {
      gamelog::SeasonRecord season;
      season.index = s;
      season.year = 1901 + static_cast<int>(s / 2);
      season.phase = s % 2 == 0 ? gamelog::Phase::spring : gamelog::Phase::fall;
      for (const auto& [p, t] : detail::home_map()) {
        season.occupancy[t] = p;
        season.centers[t] = p;
      }

      for (const auto& arc : arcs) {
        const bool friends =
            s >= arc.first && (arc.betrayal == 0 || s < arc.betrayal);
        const bool striking =
            arc.betrayal != 0 && (s == arc.betrayal || s == arc.betrayal + 1);
        for (const std::string& power : {arc.a, arc.b}) {
          const std::string& other = power == arc.a ? arc.b : arc.a;
          gamelog::Order order;
          order.power = power;
          order.unit = gamelog::UnitType::army;
          order.location = detail::home_of(power);
          if (friends && s >= arc.first) {
            // alternate the supporting side so both directions appear
            const bool my_turn = (s % 2 == 0) == (power == arc.a);
            if (my_turn)
              order.action = gamelog::SupportHold{other, detail::home_of(other)};
            else
              order.action = gamelog::Hold{};
          } else if (striking && power == arc.betrayer) {
            order.action = gamelog::Move{detail::home_of(arc.victim)};
          } else {
            order.action = gamelog::Hold{};
          }
          season.orders.push_back(order);
        }
      }
      {
        gamelog::Order order;
        order.power = loner;
        order.unit = gamelog::UnitType::army;
        order.location = detail::home_of(loner);
        // occasional wander into an unowned sea space; never hostile
        if (gen.bernoulli(0.3))
          order.action = gamelog::Move{"NTH"};
        else
          order.action = gamelog::Hold{};
        season.orders.push_back(order);
      }

      for (const auto& arc : arcs) {
        const std::size_t last_talk =
            arc.betrayal == 0 ? n_seasons - 1
                              : std::min(arc.betrayal + 1, n_seasons - 1);
        if (s < arc.first || s > last_talk) continue;
        for (const std::string& sender : {arc.a, arc.b}) {
          const std::string& recipient = sender == arc.a ? arc.b : arc.a;
          detail::MessageRates rates;
          if (arc.betrayal != 0 && s < arc.betrayal) {
            const std::size_t t = arc.betrayal - s;
            if (sender == arc.betrayer) {
              rates.positive *= spec.effects.betrayer_positive_sentiment;
              rates.planning *= spec.effects.betrayer_planning;
            } else if (t <= detail::kNearWindow) {
              rates.polite *= spec.effects.victim_politeness_near;
            }
          }
          const std::size_t count =
              1 + gen.poisson(std::max(0.0, spec.message_rate - 1.0));
          for (std::size_t m = 0; m < count; ++m) {
            gamelog::Message msg;
            msg.sender = sender;
            msg.recipient = recipient;
            msg.season_index = s;
            msg.text = detail::compose_message(vocab, rates, gen);
            season.messages.push_back(msg);
          }
        }
      }
      if (gen.bernoulli(0.1)) {
        gamelog::Message msg;
        msg.sender = loner;
        msg.recipient = gamelog::kBroadcast;
        msg.season_index = s;
        msg.text = "the board turns again. watch the northern coast.";
        season.messages.push_back(msg);
      }
      if (gen.bernoulli(0.05)) {
        gamelog::Message msg;
        msg.sender = loner;
        msg.recipient = powers[gen.bounded(6)];
        msg.season_index = s;
        msg.admin = true;
        msg.text = "resuming after the adjudication pause.";
        season.messages.push_back(msg);
      }

      game.seasons.push_back(std::move(season));
    }
    result.games.push_back(std::move(game));
  }
  return result;
}

inline SynthResult generate(const SynthSpec& spec) {
  return generate(spec, lingcues::LexiconSet::builtin());
}

inline gamelog::json to_json(const TrueDyad& d) {
  gamelog::json j{{"game_id", d.game_id},
                  {"a", d.a},
                  {"b", d.b},
                  {"first_friendly", d.first_friendly},
                  {"last_friendly", d.last_friendly},
                  {"betrayed", d.betrayed}};
  if (d.betrayed) {
    j["betrayal_season"] = d.betrayal_season;
    j["betrayer"] = d.betrayer;
    j["victim"] = d.victim;
  }
  return j;
}

inline gamelog::json to_json(const SynthSpec& spec) {
  return gamelog::json{
      {"n_games", spec.n_games},
      {"min_seasons", spec.min_seasons},
      {"max_seasons", spec.max_seasons},
      {"hazard", spec.hazard},
      {"message_rate", spec.message_rate},
      {"seed", spec.seed},
      {"effects",
       {{"betrayer_positive_sentiment",
         spec.effects.betrayer_positive_sentiment},
        {"betrayer_planning", spec.effects.betrayer_planning},
        {"victim_politeness_near", spec.effects.victim_politeness_near}}}};
}

inline gamelog::json to_json(const SynthSpec& spec, const GroundTruth& truth) {
  gamelog::json dyads = gamelog::json::array();
  for (const auto& d : truth.dyads) dyads.push_back(to_json(d));
  return gamelog::json{{"spec", to_json(spec)},
                       {"n_friendships", truth.dyads.size()},
                       {"n_betrayals", truth.n_betrayals()},
                       {"dyads", dyads}};
}

inline GroundTruth truth_from_json(const gamelog::json& j) {
  GroundTruth truth;
  for (const auto& dj : j.at("dyads")) {
    TrueDyad d;
    d.game_id = dj.at("game_id").get<std::string>();
    d.a = dj.at("a").get<std::string>();
    d.b = dj.at("b").get<std::string>();
    d.first_friendly = dj.at("first_friendly").get<std::size_t>();
    d.last_friendly = dj.at("last_friendly").get<std::size_t>();
    d.betrayed = dj.at("betrayed").get<bool>();
    if (d.betrayed) {
      d.betrayal_season = dj.at("betrayal_season").get<std::size_t>();
      d.betrayer = dj.at("betrayer").get<std::string>();
      d.victim = dj.at("victim").get<std::string>();
    }
    truth.dyads.push_back(d);
  }
  return truth;
}

}  // namespace betrayal::synth
