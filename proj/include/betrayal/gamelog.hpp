#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "betrayal/stats.hpp"
#include "betrayal/text.hpp"

namespace betrayal::gamelog {

using json = nlohmann::json;

// --- errors ----------------------------------------------------------------

struct SyntaxError : std::runtime_error {
  SyntaxError(std::size_t line_, std::size_t col_, const std::string& what_)
      : std::runtime_error("line " + std::to_string(line_) + ", col " +
                           std::to_string(col_) + ": " + what_),
        line(line_),
        col(col_) {}
  std::size_t line;
  std::size_t col;
};

struct SchemaError : std::runtime_error {
  explicit SchemaError(const std::string& field_, const std::string& what_)
      : std::runtime_error("field '" + field_ + "': " + what_), field(field_) {}
  std::string field;
};

struct ConsistencyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EmptyCorpus : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// --- domain types ------------------------------------------------------------

inline const std::set<std::string>& standard_powers() {
  static const std::set<std::string> kPowers{
      "AUSTRIA", "ENGLAND", "FRANCE", "GERMANY", "ITALY", "RUSSIA", "TURKEY"};
  return kPowers;
}

constexpr const char* kBroadcast = "ALL";

enum class Phase { spring, fall };

inline const char* to_string(Phase p) {
  return p == Phase::spring ? "spring" : "fall";
}

enum class UnitType { army, fleet };

inline const char* to_string(UnitType u) {
  return u == UnitType::army ? "army" : "fleet";
}

struct Hold {};
struct Move {
  std::string dest;
};
struct SupportHold {
  std::string power;
  std::string loc;
};
struct SupportMove {
  std::string power;
  std::string from;
  std::string to;
};
struct Convoy {
  std::string power;
  std::string from;
  std::string to;
};

using Action = std::variant<Hold, Move, SupportHold, SupportMove, Convoy>;

struct Order {
  std::string power;
  UnitType unit = UnitType::army;
  std::string location;
  Action action;
};

struct Message {
  std::string sender;
  std::string recipient;  // power name or kBroadcast
  std::size_t season_index = 0;
  std::string text;
  bool admin = false;

  bool broadcast() const { return recipient == kBroadcast; }
};

struct SeasonRecord {
  std::size_t index = 0;  // 0-based from game start
  int year = 1901;
  Phase phase = Phase::spring;
  std::vector<Order> orders;
  std::vector<Message> messages;
  std::map<std::string, std::string> occupancy;  // territory -> power
  std::map<std::string, std::string> centers;    // territory -> power
};

struct GameLog {
  std::string game_id;
  std::string variant;
  std::set<std::string> powers;
  std::vector<SeasonRecord> seasons;
};

struct DistSummary {
  std::size_t n = 0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
};

struct CorpusStats {
  std::size_t n_games = 0;
  std::size_t n_messages = 0;
  DistSummary messages_per_game;
  DistSummary sentences_per_message;
  DistSummary words_per_sentence;
};

// --- parsing -----------------------------------------------------------------

namespace detail {

inline bool valid_territory(const std::string& t) {
  if (t.size() != 3) return false;
  for (char c : t) {
    if (c < 'A' || c > 'Z') return false;
  }
  return true;
}

inline const json& require(const json& obj, const char* field) {
  auto it = obj.find(field);
  if (it == obj.end()) throw SchemaError(field, "missing");
  return *it;
}

inline std::string require_string(const json& obj, const char* field) {
  const json& v = require(obj, field);
  if (!v.is_string()) throw SchemaError(field, "expected string");
  return v.get<std::string>();
}

inline std::string require_territory(const json& obj, const char* field) {
  std::string t = require_string(obj, field);
  if (!valid_territory(t))
    throw SchemaError(field, "expected 3-letter territory code, got '" + t + "'");
  return t;
}

inline Action parse_action(const json& a) {
  if (!a.is_object() || a.size() != 1)
    throw SchemaError("action", "expected single-key action object");
  const auto& [key, val] = *a.items().begin();
  if (key == "hold") {
    return Hold{};
  }
  if (key == "move") {
    if (!val.is_string() || !valid_territory(val.get<std::string>()))
      throw SchemaError("action.move", "expected territory code");
    return Move{val.get<std::string>()};
  }
  if (key == "support_hold") {
    return SupportHold{require_string(val, "power"),
                       require_territory(val, "loc")};
  }
  if (key == "support_move") {
    return SupportMove{require_string(val, "power"),
                       require_territory(val, "from"),
                       require_territory(val, "to")};
  }
  if (key == "convoy") {
    return Convoy{require_string(val, "power"), require_territory(val, "from"),
                  require_territory(val, "to")};
  }
  throw SchemaError("action", "unknown action kind '" + key + "'");
}

inline Order parse_order(const json& o, const std::set<std::string>& powers) {
  Order order;
  order.power = require_string(o, "power");
  if (!powers.count(order.power))
    throw ConsistencyError("order references unknown power '" + order.power + "'");
  const std::string unit = require_string(o, "unit");
  if (unit == "army") {
    order.unit = UnitType::army;
  } else if (unit == "fleet") {
    order.unit = UnitType::fleet;
  } else {
    throw SchemaError("unit", "expected 'army' or 'fleet'");
  }
  order.location = require_territory(o, "location");
  order.action = parse_action(require(o, "action"));
  if (const auto* mv = std::get_if<Move>(&order.action)) {
    if (mv->dest == order.location)
      throw ConsistencyError("move destination equals unit location at " +
                             order.location);
  }
  return order;
}

inline Message parse_message(const json& m, const std::set<std::string>& powers,
                             std::size_t season_index) {
  Message msg;
  msg.sender = require_string(m, "from");
  msg.recipient = require_string(m, "to");
  msg.season_index = season_index;
  msg.text = require_string(m, "text");
  if (auto it = m.find("admin"); it != m.end()) {
    if (!it->is_boolean()) throw SchemaError("admin", "expected boolean");
    msg.admin = it->get<bool>();
  }
  if (!powers.count(msg.sender))
    throw ConsistencyError("message from unknown power '" + msg.sender + "'");
  if (msg.recipient != kBroadcast && !powers.count(msg.recipient))
    throw ConsistencyError("message to unknown power '" + msg.recipient + "'");
  if (!msg.broadcast() && msg.sender == msg.recipient)
    throw ConsistencyError("message sender equals recipient");
  if (text::trim(msg.text).empty())
    throw ConsistencyError("message text empty after trimming");
  return msg;
}

inline std::map<std::string, std::string> parse_territory_map(
    const json& m, const char* field, const std::set<std::string>& powers) {
  std::map<std::string, std::string> out;
  if (!m.is_object()) throw SchemaError(field, "expected object");
  for (const auto& [terr, power] : m.items()) {
    if (!valid_territory(terr))
      throw SchemaError(field, "bad territory code '" + terr + "'");
    if (!power.is_string() || !powers.count(power.get<std::string>()))
      throw ConsistencyError(std::string(field) + "[" + terr +
                             "] references unknown power");
    out[terr] = power.get<std::string>();
  }
  return out;
}

}  // namespace detail

// Parses one game object (already decoded from JSON). Checks every type
// invariant and throws SchemaError / ConsistencyError on violations.
inline GameLog parse_game(const json& g) {
  GameLog game;
  game.game_id = detail::require_string(g, "game_id");
  game.variant = detail::require_string(g, "variant");

  const json& powers = detail::require(g, "powers");
  if (!powers.is_array() || powers.size() != 7)
    throw SchemaError("powers", "expected array of 7 power names");
  for (const auto& p : powers) {
    if (!p.is_string() || !standard_powers().count(p.get<std::string>()))
      throw SchemaError("powers", "unknown power name");
    game.powers.insert(p.get<std::string>());
  }
  if (game.powers.size() != 7)
    throw ConsistencyError("duplicate power names in 'powers'");

  const json& seasons = detail::require(g, "seasons");
  if (!seasons.is_array()) throw SchemaError("seasons", "expected array");
  int prev_year = 0;
  int prev_phase = -1;
  for (const auto& s : seasons) {
    SeasonRecord season;
    season.index = game.seasons.size();
    const json& year = detail::require(s, "year");
    if (!year.is_number_integer()) throw SchemaError("year", "expected integer");
    season.year = year.get<int>();
    if (season.year < 1901)
      throw ConsistencyError("season year " + std::to_string(season.year) +
                             " before 1901");
    const std::string phase = detail::require_string(s, "phase");
    if (phase == "spring") {
      season.phase = Phase::spring;
    } else if (phase == "fall") {
      season.phase = Phase::fall;
    } else {
      throw SchemaError("phase", "expected 'spring' or 'fall'");
    }
    const int phase_ord = season.phase == Phase::spring ? 0 : 1;
    if (season.year < prev_year ||
        (season.year == prev_year && phase_ord <= prev_phase)) {
      throw ConsistencyError("seasons not strictly increasing at (" +
                             std::to_string(season.year) + ", " + phase + ")");
    }
    prev_year = season.year;
    prev_phase = phase_ord;

    season.occupancy = detail::parse_territory_map(
        detail::require(s, "occupancy"), "occupancy", game.powers);
    season.centers = detail::parse_territory_map(detail::require(s, "centers"),
                                                 "centers", game.powers);
    const json& orders = detail::require(s, "orders");
    if (!orders.is_array()) throw SchemaError("orders", "expected array");
    for (const auto& o : orders)
      season.orders.push_back(detail::parse_order(o, game.powers));
    const json& messages = detail::require(s, "messages");
    if (!messages.is_array()) throw SchemaError("messages", "expected array");
    for (const auto& m : messages)
      season.messages.push_back(
          detail::parse_message(m, game.powers, season.index));
    game.seasons.push_back(std::move(season));
  }
  return game;
}

// Parses a single JSONL record. `line_number` is used in error reporting.
inline GameLog parse_game_log(const std::string& line,
                              std::size_t line_number = 1) {
  json g;
  try {
    g = json::parse(line);
  } catch (const json::parse_error& e) {
    throw SyntaxError(line_number, e.byte, e.what());
  }
  return parse_game(g);
}

// Reads a whole JSONL stream; blank lines are skipped.
inline std::vector<GameLog> load_corpus(std::istream& in) {
  std::vector<GameLog> corpus;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (text::trim(line).empty()) continue;
    corpus.push_back(parse_game_log(line, line_number));
  }
  return corpus;
}

// --- serialization -------------------------------------------------------------

inline json to_json(const Order& o) {
  json action;
  std::visit(
      [&](const auto& a) {
        using T = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<T, Hold>) {
          action = json{{"hold", nullptr}};
        } else if constexpr (std::is_same_v<T, Move>) {
          action = json{{"move", a.dest}};
        } else if constexpr (std::is_same_v<T, SupportHold>) {
          action = json{{"support_hold", {{"power", a.power}, {"loc", a.loc}}}};
        } else if constexpr (std::is_same_v<T, SupportMove>) {
          action = json{{"support_move",
                         {{"power", a.power}, {"from", a.from}, {"to", a.to}}}};
        } else {
          action = json{
              {"convoy", {{"power", a.power}, {"from", a.from}, {"to", a.to}}}};
        }
      },
      o.action);
  return json{{"power", o.power},
              {"unit", to_string(o.unit)},
              {"location", o.location},
              {"action", action}};
}

inline json to_json(const Message& m) {
  return json{
      {"from", m.sender}, {"to", m.recipient}, {"text", m.text}, {"admin", m.admin}};
}

inline json to_json(const GameLog& g) {
  json seasons = json::array();
  for (const auto& s : g.seasons) {
    json orders = json::array();
    for (const auto& o : s.orders) orders.push_back(to_json(o));
    json messages = json::array();
    for (const auto& m : s.messages) messages.push_back(to_json(m));
    seasons.push_back(json{{"year", s.year},
                           {"phase", to_string(s.phase)},
                           {"occupancy", s.occupancy},
                           {"centers", s.centers},
                           {"orders", orders},
                           {"messages", messages}});
  }
  return json{{"game_id", g.game_id},
              {"variant", g.variant},
              {"powers", std::vector<std::string>(g.powers.begin(), g.powers.end())},
              {"seasons", seasons}};
}

// --- filtering and statistics ---------------------------------------------------

// Keeps only dyadic player-to-player messages: admin traffic, broadcasts
// (game-state declarations, setup chatter) are dropped. Orders and the text
// of surviving messages are untouched. Idempotent.
inline GameLog filter_messages(const GameLog& game) {
  GameLog out = game;
  for (auto& season : out.seasons) {
    std::vector<Message> kept;
    for (auto& m : season.messages) {
      if (m.admin || m.broadcast()) continue;
      kept.push_back(std::move(m));
    }
    season.messages = std::move(kept);
  }
  return out;
}

inline CorpusStats corpus_statistics(const std::vector<GameLog>& corpus) {
  if (corpus.empty()) throw EmptyCorpus("corpus_statistics: no games");
  CorpusStats cs;
  cs.n_games = corpus.size();
  std::vector<double> per_game;
  std::vector<double> sentences_per_message;
  std::vector<double> words_per_sentence;
  for (const auto& game : corpus) {
    std::size_t count = 0;
    for (const auto& season : game.seasons) {
      count += season.messages.size();
      for (const auto& m : season.messages) {
        const auto sentences = text::segment_sentences(m.text);
        sentences_per_message.push_back(static_cast<double>(sentences.size()));
        for (const auto& s : sentences) {
          words_per_sentence.push_back(
              static_cast<double>(text::tokenize(s).size()));
        }
      }
    }
    cs.n_messages += count;
    per_game.push_back(static_cast<double>(count));
  }
  auto summarize = [](std::vector<double> xs) {
    DistSummary d;
    d.n = xs.size();
    if (xs.empty()) return d;
    d.q1 = stats::quantile_nearest(xs, 0.25);
    d.median = stats::quantile_nearest(xs, 0.5);
    d.q3 = stats::quantile_nearest(xs, 0.75);
    return d;
  };
  cs.messages_per_game = summarize(std::move(per_game));
  cs.sentences_per_message = summarize(std::move(sentences_per_message));
  cs.words_per_sentence = summarize(std::move(words_per_sentence));
  return cs;
}

}  // namespace betrayal::gamelog
