#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "betrayal/gamelog.hpp"

namespace betrayal::relations {

struct UnknownTerritory : std::runtime_error {
  explicit UnknownTerritory(const std::string& terr)
      : std::runtime_error("unknown territory '" + terr + "'") {}
};

enum class ActKind { friendly, hostile };

// One behavioral signal between two powers, extracted from a season's orders.
// evidence holds indices into that season's order list.
struct Act {
  std::size_t season_index = 0;
  ActKind kind = ActKind::friendly;
  std::string actor;
  std::string recipient;
  std::vector<std::size_t> evidence;
};

// Unordered pair of powers, stored sorted.
struct Dyad {
  std::string a;
  std::string b;

  Dyad() = default;
  Dyad(std::string x, std::string y) : a(std::move(x)), b(std::move(y)) {
    if (b < a) std::swap(a, b);
  }
  bool matches(const std::string& actor, const std::string& recipient) const {
    return (a == actor && b == recipient) || (a == recipient && b == actor);
  }
  std::string other(const std::string& p) const { return p == a ? b : a; }
  std::string key() const { return a + "-" + b; }
  auto operator<=>(const Dyad&) const = default;
};

struct DyadTimeline {
  std::string game_id;
  Dyad pair;
  std::vector<Act> acts;  // sorted by season, then emission order
};

// Interval of sustained, reciprocated friendship. Bounds are the first and
// last friendly-act seasons; length counts game seasons, not acts.
struct FriendshipSpan {
  std::string game_id;
  Dyad dyad;
  std::size_t first_friendly_season = 0;
  std::size_t last_friendly_season = 0;
  std::size_t length_seasons = 0;  // last - first + 1
  std::size_t start_offset = 0;    // seasons since game start
  std::vector<Act> acts;           // the friendly acts inside the span
};

struct BetrayalRecord {
  FriendshipSpan span;
  std::string betrayer;
  std::string victim;
  std::size_t betrayal_season = 0;  // first hostile act; relative index t=0
  std::vector<Act> hostile_acts;    // the hostile episode, betrayer's act first
};

// Seasons are indexed backward from the betrayal: t=0 at the first hostile
// act, larger t further in the past, negative t after the betrayal.
inline long relative_index(const BetrayalRecord& rec, std::size_t season) {
  return static_cast<long>(rec.betrayal_season) - static_cast<long>(season);
}

struct ClassifyOptions {
  bool convoy_as_friendly = false;
};

struct SpanOptions {
  // Default reads "reciprocated" as both directions appearing somewhere in
  // the span. Strict mode demands at least two acts per direction.
  bool strict_reciprocity = false;
};

constexpr std::size_t kMaxFriendlyGap = 5;   // seasons between friendly acts
constexpr std::size_t kMinSpanLength = 3;    // seasons
constexpr std::size_t kMinFriendlyActs = 2;
constexpr std::size_t kMinHostileActs = 2;   // to call a dissolution a betrayal

struct TransitionCell {
  std::size_t exposures = 0;
  std::size_t transitions = 0;
  double probability() const {
    return exposures == 0 ? 0.0
                          : static_cast<double>(transitions) /
                                static_cast<double>(exposures);
  }
};

// Age buckets: exact ages 1..9 plus one pooled bucket for >= 10 (stored as 10).
constexpr std::size_t kMaxAgeBucket = 10;

struct TransitionStats {
  std::map<std::pair<ActKind, std::size_t>, TransitionCell> cells;
  double dissolve_rate = std::numeric_limits<double>::quiet_NaN();
  double resolve_rate = std::numeric_limits<double>::quiet_NaN();
  double rate_ratio = std::numeric_limits<double>::quiet_NaN();

  const TransitionCell* cell(ActKind kind, std::size_t age_bucket) const {
    auto it = cells.find({kind, age_bucket});
    return it == cells.end() ? nullptr : &it->second;
  }
};

namespace detail {

inline void check_territory(const std::string& t,
                            const gamelog::SeasonRecord& season) {
  if (season.occupancy.count(t) || season.centers.count(t)) return;
  if (!gamelog::detail::valid_territory(t)) throw UnknownTerritory(t);
}

// Powers wronged by `mover` entering `dest`: the occupant of the territory
// and the owner of the supply center, when they are someone else.
inline std::vector<std::string> invasion_targets(
    const std::string& mover, const std::string& dest,
    const gamelog::SeasonRecord& season) {
  std::vector<std::string> out;
  if (auto it = season.occupancy.find(dest);
      it != season.occupancy.end() && it->second != mover) {
    out.push_back(it->second);
  }
  if (auto it = season.centers.find(dest);
      it != season.centers.end() && it->second != mover) {
    if (out.empty() || out[0] != it->second) out.push_back(it->second);
  }
  return out;
}

}  // namespace detail

// Reads one season's orders and emits friendly/hostile acts.
//  friendly: supporting another power's unit (hold or move);
//  hostile:  moving onto a territory occupied by another power or onto a
//            supply center another power controls, and supporting a third
//            power's move that is itself hostile toward someone.
// Two moves bouncing in an empty, uncontrolled territory produce nothing,
// since neither mover wrongs anyone under the rules above.
inline std::vector<Act> classify_interactions(
    const gamelog::SeasonRecord& season, const ClassifyOptions& opts = {}) {
  std::vector<Act> acts;
  auto emit = [&](ActKind kind, const std::string& actor,
                  const std::string& recipient, std::size_t order_index) {
    if (actor == recipient) return;
    acts.push_back(Act{season.index, kind, actor, recipient, {order_index}});
  };

  for (std::size_t i = 0; i < season.orders.size(); ++i) {
    const auto& o = season.orders[i];
    detail::check_territory(o.location, season);
    std::visit(
        [&](const auto& a) {
          using T = std::decay_t<decltype(a)>;
          if constexpr (std::is_same_v<T, gamelog::Move>) {
            detail::check_territory(a.dest, season);
            for (const auto& target :
                 detail::invasion_targets(o.power, a.dest, season))
              emit(ActKind::hostile, o.power, target, i);
          } else if constexpr (std::is_same_v<T, gamelog::SupportHold>) {
            detail::check_territory(a.loc, season);
            emit(ActKind::friendly, o.power, a.power, i);
          } else if constexpr (std::is_same_v<T, gamelog::SupportMove>) {
            detail::check_territory(a.from, season);
            detail::check_territory(a.to, season);
            emit(ActKind::friendly, o.power, a.power, i);
            if (a.power != o.power) {
              // backing someone else's invasion is itself hostile to its
              // targets
              for (const auto& target :
                   detail::invasion_targets(a.power, a.to, season))
                emit(ActKind::hostile, o.power, target, i);
            }
          } else if constexpr (std::is_same_v<T, gamelog::Convoy>) {
            detail::check_territory(a.from, season);
            detail::check_territory(a.to, season);
            if (opts.convoy_as_friendly)
              emit(ActKind::friendly, o.power, a.power, i);
          }
        },
        o.action);
  }
  return acts;
}

inline DyadTimeline build_dyad_timeline(const gamelog::GameLog& game,
                                        const Dyad& pair,
                                        const ClassifyOptions& opts = {}) {
  DyadTimeline tl;
  tl.game_id = game.game_id;
  tl.pair = pair;
  for (const auto& season : game.seasons) {
    for (auto& act : classify_interactions(season, opts)) {
      if (pair.matches(act.actor, act.recipient)) tl.acts.push_back(std::move(act));
    }
  }
  return tl;
}

inline std::vector<Dyad> all_dyads(const gamelog::GameLog& game) {
  std::vector<Dyad> dyads;
  for (auto it = game.powers.begin(); it != game.powers.end(); ++it) {
    for (auto jt = std::next(it); jt != game.powers.end(); ++jt)
      dyads.emplace_back(*it, *jt);
  }
  return dyads;
}

// Timelines for all 21 dyads, classifying each season once.
inline std::vector<DyadTimeline> all_timelines(const gamelog::GameLog& game,
                                               const ClassifyOptions& opts = {}) {
  std::map<Dyad, std::size_t> slot;
  std::vector<DyadTimeline> timelines;
  for (const auto& d : all_dyads(game)) {
    slot[d] = timelines.size();
    timelines.push_back(DyadTimeline{game.game_id, d, {}});
  }
  for (const auto& season : game.seasons) {
    for (auto& act : classify_interactions(season, opts)) {
      timelines[slot[Dyad(act.actor, act.recipient)]].acts.push_back(
          std::move(act));
    }
  }
  return timelines;
}

namespace detail {

inline std::vector<std::size_t> hostile_seasons(const DyadTimeline& tl) {
  std::vector<std::size_t> out;
  for (const auto& act : tl.acts)
    if (act.kind == ActKind::hostile) out.push_back(act.season_index);
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

inline bool hostile_between(const std::vector<std::size_t>& hostile,
                            std::size_t lo, std::size_t hi) {
  // any hostile season strictly inside (lo, hi)
  auto it = std::upper_bound(hostile.begin(), hostile.end(), lo);
  return it != hostile.end() && *it < hi;
}

inline bool reciprocated(const std::vector<Act>& acts, const Dyad& d,
                         bool strict) {
  std::size_t ab = 0, ba = 0;
  for (const auto& act : acts) (act.actor == d.a ? ab : ba) += 1;
  if (strict) return ab >= kMinFriendlyActs && ba >= kMinFriendlyActs;
  return ab > 0 && ba > 0;
}

}  // namespace detail

// Maximal disjoint intervals of sustained friendship, scanned left to right.
// A friendly act sharing its season with any hostile act is discounted (the
// season reads as hostile); a hostile season or a gap over kMaxFriendlyGap
// seasons ends the running segment. Segments keep only if they hold at least
// two friendly acts, both directions appear, and they cover >= 3 seasons.
inline std::vector<FriendshipSpan> find_stable_friendships(
    const DyadTimeline& tl, const SpanOptions& opts = {}) {
  const auto hostile = detail::hostile_seasons(tl);
  auto is_hostile_season = [&](std::size_t s) {
    return std::binary_search(hostile.begin(), hostile.end(), s);
  };

  std::vector<Act> surviving;
  for (const auto& act : tl.acts)
    if (act.kind == ActKind::friendly && !is_hostile_season(act.season_index))
      surviving.push_back(act);

  std::vector<FriendshipSpan> spans;
  std::vector<Act> segment;
  auto flush = [&]() {
    if (segment.size() >= kMinFriendlyActs) {
      const std::size_t first = segment.front().season_index;
      const std::size_t last = segment.back().season_index;
      const std::size_t length = last - first + 1;
      if (length >= kMinSpanLength &&
          detail::reciprocated(segment, tl.pair, opts.strict_reciprocity)) {
        spans.push_back(FriendshipSpan{tl.game_id, tl.pair, first, last, length,
                                       first, segment});
      }
    }
    segment.clear();
  };

  for (const auto& act : surviving) {
    if (!segment.empty()) {
      const std::size_t prev = segment.back().season_index;
      if (act.season_index - prev > kMaxFriendlyGap ||
          detail::hostile_between(hostile, prev, act.season_index)) {
        flush();
      }
    }
    segment.push_back(act);
  }
  flush();
  return spans;
}

// Decides whether a friendship span ends in betrayal: at least two hostile
// acts must follow it before any further (surviving) friendly act. The
// initiator of the first hostile act is the betrayer; when the first hostile
// season has acts from both sides, both betrayals are reported.
inline std::vector<BetrayalRecord> detect_betrayal(const FriendshipSpan& span,
                                                   const DyadTimeline& tl) {
  const auto hostile = detail::hostile_seasons(tl);
  auto is_hostile_season = [&](std::size_t s) {
    return std::binary_search(hostile.begin(), hostile.end(), s);
  };

  std::vector<Act> episode;
  for (const auto& act : tl.acts) {
    if (act.season_index <= span.last_friendly_season) continue;
    if (act.kind == ActKind::friendly) {
      if (is_hostile_season(act.season_index)) continue;  // discounted
      if (episode.size() < kMinHostileActs) return {};    // friendship resumed
      break;  // hostile episode over; record stops here
    }
    episode.push_back(act);
  }
  if (episode.size() < kMinHostileActs) return {};

  const std::size_t betrayal_season = episode.front().season_index;
  std::set<std::string> first_season_actors;
  for (const auto& act : episode)
    if (act.season_index == betrayal_season) first_season_actors.insert(act.actor);

  auto make_record = [&](const std::string& betrayer) {
    BetrayalRecord rec;
    rec.span = span;
    rec.betrayer = betrayer;
    rec.victim = span.dyad.other(betrayer);
    rec.betrayal_season = betrayal_season;
    // betrayer's own first-season act leads the evidence list; the rest of
    // the episode follows in timeline order
    bool lead_taken = false;
    for (const auto& act : episode) {
      if (!lead_taken && act.season_index == betrayal_season &&
          act.actor == betrayer) {
        rec.hostile_acts.insert(rec.hostile_acts.begin(), act);
        lead_taken = true;
      } else {
        rec.hostile_acts.push_back(act);
      }
    }
    return rec;
  };

  std::vector<BetrayalRecord> records;
  if (first_season_actors.size() == 2) {
    for (const auto& betrayer : first_season_actors)
      records.push_back(make_record(betrayer));
  } else {
    records.push_back(make_record(*first_season_actors.begin()));
  }
  return records;
}

struct GameRelationships {
  std::vector<DyadTimeline> timelines;
  std::vector<FriendshipSpan> spans;
  std::vector<BetrayalRecord> betrayals;
};

inline GameRelationships analyze_game(const gamelog::GameLog& game,
                                      const ClassifyOptions& copts = {},
                                      const SpanOptions& sopts = {}) {
  GameRelationships out;
  out.timelines = all_timelines(game, copts);
  for (const auto& tl : out.timelines) {
    for (auto& span : find_stable_friendships(tl, sopts)) {
      for (auto& rec : detect_betrayal(span, tl))
        out.betrayals.push_back(std::move(rec));
      out.spans.push_back(std::move(span));
    }
  }
  return out;
}

// Season-to-season persistence of friendly/hostile states.
//
// Each dyad's acts collapse to one kind per season (hostile wins a mixed
// season). Walking consecutive act-seasons, the pair (s_i, s_{i+1}) is one
// exposure of the state at s_i, whose age counts game seasons since the
// current same-kind run began; the exposure is a transition when the kind
// flips at s_{i+1}. Pooled rates divide flips by exposures per kind.
inline TransitionStats transition_statistics(
    const std::vector<DyadTimeline>& timelines) {
  if (timelines.empty())
    throw gamelog::EmptyCorpus("transition_statistics: no timelines");
  TransitionStats ts;
  std::size_t dissolve_n = 0, friendly_n = 0;
  std::size_t resolve_n = 0, hostile_n = 0;

  for (const auto& tl : timelines) {
    std::map<std::size_t, ActKind> season_kind;
    for (const auto& act : tl.acts) {
      auto [it, inserted] = season_kind.emplace(act.season_index, act.kind);
      if (!inserted && act.kind == ActKind::hostile)
        it->second = ActKind::hostile;
    }
    if (season_kind.size() < 2) continue;

    auto it = season_kind.begin();
    std::size_t run_start = it->first;
    for (auto next = std::next(it); next != season_kind.end(); ++it, ++next) {
      const auto [s, kind] = *it;
      const std::size_t age = s - run_start + 1;
      const std::size_t bucket = std::min(age, kMaxAgeBucket);
      auto& cell = ts.cells[{kind, bucket}];
      cell.exposures += 1;
      const bool flipped = next->second != kind;
      if (flipped) {
        cell.transitions += 1;
        run_start = next->first;
      }
      if (kind == ActKind::friendly) {
        friendly_n += 1;
        dissolve_n += flipped ? 1 : 0;
      } else {
        hostile_n += 1;
        resolve_n += flipped ? 1 : 0;
      }
    }
  }

  if (friendly_n > 0)
    ts.dissolve_rate = static_cast<double>(dissolve_n) / friendly_n;
  if (hostile_n > 0)
    ts.resolve_rate = static_cast<double>(resolve_n) / hostile_n;
  if (friendly_n > 0 && hostile_n > 0 && ts.resolve_rate > 0.0)
    ts.rate_ratio = ts.dissolve_rate / ts.resolve_rate;
  return ts;
}

inline TransitionStats transition_statistics(
    const std::vector<gamelog::GameLog>& corpus,
    const ClassifyOptions& opts = {}) {
  if (corpus.empty()) throw gamelog::EmptyCorpus("transition_statistics: no games");
  std::vector<DyadTimeline> timelines;
  for (const auto& game : corpus)
    for (auto& tl : all_timelines(game, opts))
      if (!tl.acts.empty()) timelines.push_back(std::move(tl));
  if (timelines.empty())
    throw gamelog::EmptyCorpus("transition_statistics: no acts in corpus");
  return transition_statistics(timelines);
}

}  // namespace betrayal::relations
