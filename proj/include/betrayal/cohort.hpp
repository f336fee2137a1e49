#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "betrayal/relations.hpp"
#include "betrayal/rng.hpp"
#include "betrayal/stats.hpp"

namespace betrayal::cohort {

struct InsufficientControls : std::runtime_error {
  InsufficientControls(std::size_t betrayals, std::size_t candidates)
      : std::runtime_error("need at least " + std::to_string(betrayals) +
                           " control candidates, have " +
                           std::to_string(candidates)) {}
};

struct MatchedPair {
  relations::BetrayalRecord betrayal;
  relations::FriendshipSpan control;  // a friendship that never dissolved
  double distance = 0.0;
};

struct BalanceReport {
  std::size_t n_pairs = 0;
  // Mann-Whitney p-values comparing matched betrayal vs control sets
  double p_length = std::numeric_limits<double>::quiet_NaN();
  double p_start = std::numeric_limits<double>::quiet_NaN();
};

struct MatchResult {
  std::vector<MatchedPair> pairs;
  BalanceReport balance;
};

// Greedy 1:1 matching on (length_seasons, start_offset). Betrayals are
// served in descending friendship length; each takes the closest unused
// candidate under the L1 distance on z-scored covariates. The result is a
// pure function of the inputs; `seed` is accepted for interface stability
// but nothing here draws random numbers.
inline MatchResult match_controls(
    const std::vector<relations::BetrayalRecord>& betrayals,
    const std::vector<relations::FriendshipSpan>& candidates,
    std::uint64_t /*seed*/ = 0) {
  if (candidates.size() < betrayals.size())
    throw InsufficientControls(betrayals.size(), candidates.size());

  // z-scale over the combined pool so both covariates are unitless
  std::vector<double> lengths, starts;
  for (const auto& b : betrayals) {
    lengths.push_back(static_cast<double>(b.span.length_seasons));
    starts.push_back(static_cast<double>(b.span.start_offset));
  }
  for (const auto& c : candidates) {
    lengths.push_back(static_cast<double>(c.length_seasons));
    starts.push_back(static_cast<double>(c.start_offset));
  }
  auto scaler = [](const std::vector<double>& xs) {
    const double m = stats::detail::mean(xs);
    const double sd =
        xs.size() > 1 ? std::sqrt(stats::detail::variance(xs, m)) : 0.0;
    return [m, sd](double x) { return sd > 0.0 ? (x - m) / sd : 0.0; };
  };
  const auto z_len = scaler(lengths);
  const auto z_start = scaler(starts);

  std::vector<std::size_t> order(betrayals.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& sa = betrayals[a].span;
    const auto& sb = betrayals[b].span;
    if (sa.length_seasons != sb.length_seasons)
      return sa.length_seasons > sb.length_seasons;
    if (sa.game_id != sb.game_id) return sa.game_id < sb.game_id;
    return sa.dyad.key() < sb.dyad.key();
  });

  std::vector<char> used(candidates.size(), 0);
  std::vector<MatchedPair> pairs(betrayals.size());
  for (std::size_t oi : order) {
    const auto& span = betrayals[oi].span;
    const double bl = z_len(static_cast<double>(span.length_seasons));
    const double bs = z_start(static_cast<double>(span.start_offset));

    std::size_t best = candidates.size();
    double best_dist = 0.0, best_sdiff = 0.0;
    for (std::size_t ci = 0; ci < candidates.size(); ++ci) {
      if (used[ci]) continue;
      const auto& cand = candidates[ci];
      const double dist =
          std::abs(bl - z_len(static_cast<double>(cand.length_seasons))) +
          std::abs(bs - z_start(static_cast<double>(cand.start_offset)));
      const double sdiff =
          std::abs(static_cast<double>(span.start_offset) -
                   static_cast<double>(cand.start_offset));
      auto better = [&]() {
        if (best == candidates.size()) return true;
        if (dist != best_dist) return dist < best_dist;
        if (sdiff != best_sdiff) return sdiff < best_sdiff;
        const auto& prev = candidates[best];
        if (cand.game_id != prev.game_id) return cand.game_id < prev.game_id;
        return cand.dyad.key() < prev.dyad.key();
      };
      if (better()) {
        best = ci;
        best_dist = dist;
        best_sdiff = sdiff;
      }
    }
    used[best] = 1;
    pairs[oi] = MatchedPair{betrayals[oi], candidates[best], best_dist};
  }

  MatchResult result;
  result.pairs = std::move(pairs);
  result.balance.n_pairs = result.pairs.size();
  if (!result.pairs.empty()) {
    std::vector<double> bl, cl, bs, cs;
    for (const auto& p : result.pairs) {
      bl.push_back(static_cast<double>(p.betrayal.span.length_seasons));
      cl.push_back(static_cast<double>(p.control.length_seasons));
      bs.push_back(static_cast<double>(p.betrayal.span.start_offset));
      cs.push_back(static_cast<double>(p.control.start_offset));
    }
    result.balance.p_length = stats::mann_whitney_u(bl, cl).p_value;
    result.balance.p_start = stats::mann_whitney_u(bs, cs).p_value;
  }
  return result;
}

// One labeled dyad-season. The feature vector starts empty and is filled by
// the featurization stage; group_key ties instances to their game for
// grouped cross-validation.
struct TaskInstance {
  std::string game_id;
  std::string dyad;  // "BETRAYER|VICTIM", role-ordered
  std::string betrayer;
  std::string victim;
  std::size_t season_index = 0;
  long t = 0;  // seasons before the (pseudo-)betrayal
  int label = 0;
  std::vector<double> features;

  const std::string& group_key() const { return game_id; }
};

namespace detail {

inline std::string role_dyad(const std::string& b, const std::string& v) {
  return b + "|" + v;
}

// Controls have no betrayer; roles are assigned arbitrarily but stably from
// a hash of the pair's identity.
inline std::pair<std::string, std::string> control_roles(
    const relations::FriendshipSpan& span) {
  const std::uint64_t h = rng::fnv1a(span.game_id + ":" + span.dyad.key());
  if (h % 2 == 0) return {span.dyad.a, span.dyad.b};
  return {span.dyad.b, span.dyad.a};
}

}  // namespace detail

// Long-term task: seasons strictly before the last friendly act, one
// instance each. Betrayal dyads are labeled 1 with t counted back from the
// real betrayal; each control mirrors its matched betrayal's window length
// back from the end of the control friendship, with a pseudo-betrayal one
// season after its last friendly act.
inline std::vector<TaskInstance> label_longterm_task(
    const std::vector<MatchedPair>& pairs) {
  std::vector<TaskInstance> out;
  for (const auto& pair : pairs) {
    const auto& bspan = pair.betrayal.span;
    if (bspan.last_friendly_season <= bspan.first_friendly_season) continue;
    const std::size_t window =
        bspan.last_friendly_season - bspan.first_friendly_season;
    for (std::size_t s = bspan.first_friendly_season;
         s < bspan.last_friendly_season; ++s) {
      TaskInstance inst;
      inst.game_id = bspan.game_id;
      inst.betrayer = pair.betrayal.betrayer;
      inst.victim = pair.betrayal.victim;
      inst.dyad = detail::role_dyad(inst.betrayer, inst.victim);
      inst.season_index = s;
      inst.t = relations::relative_index(pair.betrayal, s);
      inst.label = 1;
      out.push_back(std::move(inst));
    }

    const auto& cspan = pair.control;
    const auto [cb, cv] = detail::control_roles(cspan);
    const std::size_t chi = cspan.last_friendly_season;  // exclusive end
    const std::size_t clo =
        window >= chi ? cspan.first_friendly_season
                      : std::max(cspan.first_friendly_season, chi - window);
    for (std::size_t s = clo; s < chi; ++s) {
      TaskInstance inst;
      inst.game_id = cspan.game_id;
      inst.betrayer = cb;
      inst.victim = cv;
      inst.dyad = detail::role_dyad(cb, cv);
      inst.season_index = s;
      inst.t = static_cast<long>(chi + 1) - static_cast<long>(s);
      inst.label = 0;
      out.push_back(std::move(inst));
    }
  }
  return out;
}

struct ImminentTask {
  std::vector<TaskInstance> instances;
  double positive_fraction = std::numeric_limits<double>::quiet_NaN();
};

constexpr std::size_t kImminentMinLength = 4;  // seasons of friendship

// Imminent task: within friendships of at least four seasons, the season
// right before the last friendly act is the positive class and the older
// window seasons are negatives. The window drops the span's first season,
// so the shortest qualifying friendship still yields one negative.
inline ImminentTask label_imminent_task(
    const std::vector<relations::BetrayalRecord>& betrayals) {
  ImminentTask task;
  std::size_t positives = 0;
  for (const auto& rec : betrayals) {
    const auto& span = rec.span;
    if (span.length_seasons < kImminentMinLength) continue;
    const std::size_t lo = span.first_friendly_season + 1;
    const std::size_t hi = span.last_friendly_season;  // exclusive end
    for (std::size_t s = lo; s < hi; ++s) {
      TaskInstance inst;
      inst.game_id = span.game_id;
      inst.betrayer = rec.betrayer;
      inst.victim = rec.victim;
      inst.dyad = detail::role_dyad(rec.betrayer, rec.victim);
      inst.season_index = s;
      inst.t = relations::relative_index(rec, s);
      inst.label = s + 1 == hi ? 1 : 0;
      positives += inst.label;
      task.instances.push_back(std::move(inst));
    }
  }
  if (!task.instances.empty())
    task.positive_fraction =
        static_cast<double>(positives) / static_cast<double>(task.instances.size());
  return task;
}

// Of the false positives among `predicted`, the fraction whose season lies
// within `max_distance` seasons of the dyad's last friendly act. NaN when
// there are no false positives.
inline double fp_proximity_fraction(const std::vector<TaskInstance>& instances,
                                    const std::vector<int>& predicted,
                                    std::size_t max_distance = 2) {
  // locate each dyad-record's positive season; the last friendly act is one
  // season after it
  std::map<std::string, std::size_t> positive_season;
  auto record_key = [](const TaskInstance& inst) {
    return inst.game_id + "/" + inst.dyad;
  };
  for (const auto& inst : instances)
    if (inst.label == 1) positive_season[record_key(inst)] = inst.season_index;

  std::size_t fps = 0, near = 0;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const auto& inst = instances[i];
    if (inst.label != 0 || predicted[i] != 1) continue;
    ++fps;
    auto it = positive_season.find(record_key(inst));
    if (it == positive_season.end()) continue;
    const std::size_t last_friendly = it->second + 1;
    if (last_friendly - inst.season_index <= max_distance) ++near;
  }
  if (fps == 0) return std::numeric_limits<double>::quiet_NaN();
  return static_cast<double>(near) / static_cast<double>(fps);
}

// Flat matrix export: game_id, dyad, season, t, label, then features.
inline void write_csv(std::ostream& out,
                      const std::vector<TaskInstance>& instances,
                      const std::vector<std::string>& feature_names) {
  out << "game_id,dyad,season,t,label";
  for (const auto& name : feature_names) out << "," << name;
  out << "\n";
  char buf[40];
  for (const auto& inst : instances) {
    out << inst.game_id << "," << inst.dyad << "," << inst.season_index << ","
        << inst.t << "," << inst.label;
    for (double v : inst.features) {
      std::snprintf(buf, sizeof buf, "%.17g", v);
      out << "," << buf;
    }
    out << "\n";
  }
}

}  // namespace betrayal::cohort
