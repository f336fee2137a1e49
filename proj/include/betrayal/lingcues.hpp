#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "betrayal/gamelog.hpp"
#include "betrayal/lexicon_data.hpp"
#include "betrayal/text.hpp"

namespace betrayal::lingcues {

using text::segment_sentences;
using text::tokenize;

struct LexiconError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class ConnClass { comparison, contingency, expansion, temporal };
constexpr std::size_t kConnClasses = 4;

inline const char* to_string(ConnClass c) {
  switch (c) {
    case ConnClass::comparison: return "comparison";
    case ConnClass::contingency: return "contingency";
    case ConnClass::expansion: return "expansion";
    default: return "temporal";
  }
}

inline ConnClass parse_conn_class(const std::string& s) {
  if (s == "comparison") return ConnClass::comparison;
  if (s == "contingency") return ConnClass::contingency;
  if (s == "expansion") return ConnClass::expansion;
  if (s == "temporal") return ConnClass::temporal;
  throw LexiconError("unknown connective class '" + s + "'");
}

enum class Sentiment { positive, neutral, negative };

struct PolitenessCue {
  std::string name;
  std::string pattern;  // '|'-separated phrases; '^' anchors to sentence start
  double weight = 0.0;
  bool operator==(const PolitenessCue&) const = default;
};

struct LexiconSet {
  std::map<std::string, ConnClass> connectives;
  std::set<std::string> planning_markers;
  std::set<std::string> claim_markers;
  std::set<std::string> premise_markers;
  std::set<std::string> subjectivity_phrases;
  std::map<std::string, int> sentiment;  // +1 positive, -1 negative
  std::set<std::string> negators;
  std::vector<PolitenessCue> politeness_cues;
  std::set<std::string> pruned;  // connectives removed by the frequency rule

  bool operator==(const LexiconSet&) const = default;

  static LexiconSet builtin();
};

namespace detail {

inline std::vector<std::string> read_lines(std::istream& in) {
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    const std::string t = text::trim(line);
    if (t.empty() || t[0] == '#') continue;
    lines.push_back(t);
  }
  return lines;
}

inline std::vector<std::string> split_tab(const std::string& line) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    if (tab == std::string::npos) {
      parts.push_back(line.substr(start));
      return parts;
    }
    parts.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

inline std::set<std::string> parse_list(std::istream& in) {
  std::set<std::string> out;
  for (const auto& line : read_lines(in)) out.insert(text::lower(line));
  return out;
}

inline std::map<std::string, ConnClass> parse_connectives(std::istream& in) {
  std::map<std::string, ConnClass> out;
  for (const auto& line : read_lines(in)) {
    const auto parts = split_tab(line);
    if (parts.size() != 2)
      throw LexiconError("connective line needs phrase<TAB>class: " + line);
    out[text::lower(text::trim(parts[0]))] = parse_conn_class(text::trim(parts[1]));
  }
  return out;
}

inline std::vector<PolitenessCue> parse_politeness(std::istream& in) {
  std::vector<PolitenessCue> out;
  for (const auto& line : read_lines(in)) {
    const auto parts = split_tab(line);
    if (parts.size() != 3)
      throw LexiconError("politeness line needs name<TAB>pattern<TAB>weight: " +
                         line);
    PolitenessCue cue;
    cue.name = text::trim(parts[0]);
    cue.pattern = text::lower(text::trim(parts[1]));
    try {
      cue.weight = std::stod(parts[2]);
    } catch (const std::exception&) {
      throw LexiconError("bad politeness weight in: " + line);
    }
    out.push_back(std::move(cue));
  }
  return out;
}

inline std::map<std::string, int> make_sentiment(
    const std::set<std::string>& pos, const std::set<std::string>& neg) {
  std::map<std::string, int> out;
  for (const auto& w : pos) out[w] = 1;
  for (const auto& w : neg) {
    if (out.count(w))
      throw LexiconError("token in both polarity lists: " + w);
    out[w] = -1;
  }
  return out;
}

}  // namespace detail

inline void validate(const LexiconSet& lex) {
  for (const auto& p : lex.planning_markers) {
    auto it = lex.connectives.find(p);
    const bool temporal =
        it != lex.connectives.end() && it->second == ConnClass::temporal;
    if (!temporal && !lex.pruned.count(p))
      throw LexiconError("planning marker '" + p +
                         "' is not a temporal connective");
  }
  for (const auto& cue : lex.politeness_cues)
    if (!std::isfinite(cue.weight))
      throw LexiconError("non-finite politeness weight for " + cue.name);
  for (const auto& p : lex.pruned)
    if (lex.connectives.count(p))
      throw LexiconError("pruned connective still active: " + p);
}

inline LexiconSet load_lexicons(const std::string& dir) {
  auto open = [&](const char* name) {
    std::ifstream in(dir + "/" + name);
    if (!in.good()) throw LexiconError(std::string("cannot read ") + dir + "/" + name);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf;
  };
  LexiconSet lex;
  {
    auto in = open("connectives.tsv");
    lex.connectives = detail::parse_connectives(in);
  }
  auto list = [&](const char* name) {
    auto in = open(name);
    return detail::parse_list(in);
  };
  lex.planning_markers = list("planning.txt");
  lex.claim_markers = list("claims.txt");
  lex.premise_markers = list("premises.txt");
  lex.subjectivity_phrases = list("subjectivity.txt");
  lex.sentiment = detail::make_sentiment(list("positive.txt"), list("negative.txt"));
  lex.negators = list("negators.txt");
  {
    auto in = open("politeness.tsv");
    lex.politeness_cues = detail::parse_politeness(in);
  }
  validate(lex);
  return lex;
}

inline LexiconSet LexiconSet::builtin() {
  auto stream = [](const char* raw) { return std::istringstream(raw); };
  LexiconSet lex;
  {
    auto in = stream(data::k_connectives);
    lex.connectives = detail::parse_connectives(in);
  }
  auto list = [&](const char* raw) {
    auto in = stream(raw);
    return detail::parse_list(in);
  };
  lex.planning_markers = list(data::k_planning);
  lex.claim_markers = list(data::k_claims);
  lex.premise_markers = list(data::k_premises);
  lex.subjectivity_phrases = list(data::k_subjectivity);
  lex.sentiment = detail::make_sentiment(list(data::k_positive), list(data::k_negative));
  lex.negators = list(data::k_negators);
  {
    auto in = stream(data::k_politeness);
    lex.politeness_cues = detail::parse_politeness(in);
  }
  validate(lex);
  return lex;
}

// Labels a tokenized sentence by counting polarity tokens; a polarity token
// within three tokens after a negator flips sign. Ties are neutral.
inline Sentiment sentiment_label(const std::vector<std::string>& tokens,
                                 const LexiconSet& lex) {
  int score = 0;
  for (std::size_t k = 0; k < tokens.size(); ++k) {
    auto it = lex.sentiment.find(tokens[k]);
    if (it == lex.sentiment.end()) continue;
    int polarity = it->second;
    const std::size_t from = k >= 3 ? k - 3 : 0;
    for (std::size_t j = from; j < k; ++j) {
      if (lex.negators.count(tokens[j])) {
        polarity = -polarity;
        break;
      }
    }
    score += polarity;
  }
  if (score > 0) return Sentiment::positive;
  if (score < 0) return Sentiment::negative;
  return Sentiment::neutral;
}

inline Sentiment sentiment_label(const std::string& sentence,
                                 const LexiconSet& lex) {
  return sentiment_label(tokenize(sentence), lex);
}

namespace detail {

struct PhraseEntry {
  std::vector<std::string> tokens;
  int tag = 0;
  bool anchored = false;  // only matches at sentence start
};

// Token-boundary phrase matching, case-insensitive (tokens arrive folded),
// greedy longest-first, consuming matched tokens.
class PhraseMatcher {
 public:
  void add(const std::string& phrase, int tag, bool anchored = false) {
    auto toks = tokenize(phrase);
    if (toks.empty()) return;
    index_[toks[0]].push_back(PhraseEntry{std::move(toks), tag, anchored});
  }

  void finalize() {
    for (auto& [head, entries] : index_) {
      std::stable_sort(entries.begin(), entries.end(),
                       [](const PhraseEntry& x, const PhraseEntry& y) {
                         return x.tokens.size() > y.tokens.size();
                       });
    }
  }

  template <typename OnHit>
  void scan(const std::vector<std::string>& tokens, OnHit&& on_hit) const {
    for (std::size_t i = 0; i < tokens.size();) {
      std::size_t advance = 1;
      auto it = index_.find(tokens[i]);
      if (it != index_.end()) {
        for (const auto& e : it->second) {
          if (e.anchored && i != 0) continue;
          if (i + e.tokens.size() > tokens.size()) continue;
          if (std::equal(e.tokens.begin(), e.tokens.end(),
                         tokens.begin() + static_cast<long>(i))) {
            on_hit(e.tag);
            advance = e.tokens.size();
            break;
          }
        }
      }
      i += advance;
    }
  }

 private:
  std::map<std::string, std::vector<PhraseEntry>> index_;
};

}  // namespace detail

struct MessageCues {
  std::size_t n_sentences = 0;
  std::size_t n_words = 0;
  std::size_t sent_positive = 0;
  std::size_t sent_neutral = 0;
  std::size_t sent_negative = 0;
  std::array<std::size_t, kConnClasses> connective_counts{};
  std::size_t planning_count = 0;
  std::size_t claim_count = 0;
  std::size_t premise_count = 0;
  std::size_t request_count = 0;
  std::size_t subjectivity_count = 0;
  double politeness_score = 0.5;
};

// Hook points for swapping in other scorers with the same output contracts:
// a 3-way label per tokenized sentence, a [0,1] score per message, a binary
// request flag per sentence. Unset hooks use the built-in heuristics.
struct Extractors {
  std::function<Sentiment(const std::vector<std::string>&)> sentiment;
  std::function<double(const std::string&)> politeness;
  std::function<bool(const std::string&)> request;
};

inline bool is_request(const std::string& sentence) {
  if (text::ends_with_question(sentence)) return true;
  const auto toks = tokenize(sentence);
  if (toks.empty()) return false;
  if (toks[0] == "please") return true;
  if (toks.size() >= 2 && toks[1] == "you" &&
      (toks[0] == "could" || toks[0] == "can" || toks[0] == "would"))
    return true;
  return false;
}

// Bundles the prebuilt matchers for one lexicon; reuse it when extracting
// from many messages.
class CueExtractor {
 public:
  explicit CueExtractor(LexiconSet lex, Extractors hooks = {})
      : lex_(std::move(lex)), hooks_(std::move(hooks)) {
    for (const auto& [phrase, cls] : lex_.connectives)
      connectives_.add(phrase, static_cast<int>(cls));
    for (const auto& p : lex_.planning_markers) planning_.add(p, 0);
    for (const auto& p : lex_.claim_markers) claims_.add(p, 0);
    for (const auto& p : lex_.premise_markers) premises_.add(p, 0);
    for (const auto& p : lex_.subjectivity_phrases) subjectivity_.add(p, 0);
    for (std::size_t c = 0; c < lex_.politeness_cues.size(); ++c)
      add_pattern(politeness_, lex_.politeness_cues[c].pattern,
                  static_cast<int>(c));
    connectives_.finalize();
    planning_.finalize();
    claims_.finalize();
    premises_.finalize();
    subjectivity_.finalize();
    politeness_.finalize();
  }

  const LexiconSet& lexicon() const { return lex_; }

  MessageCues extract(const std::string& message) const {
    MessageCues cues;
    const auto sentences = segment_sentences(message);
    cues.n_sentences = sentences.size();
    double politeness_sum = 0.0;
    for (const auto& sentence : sentences) {
      const auto toks = tokenize(sentence);
      cues.n_words += toks.size();

      const Sentiment label = hooks_.sentiment ? hooks_.sentiment(toks)
                                               : sentiment_label(toks, lex_);
      if (label == Sentiment::positive) {
        ++cues.sent_positive;
      } else if (label == Sentiment::negative) {
        ++cues.sent_negative;
      } else {
        ++cues.sent_neutral;
      }

      connectives_.scan(toks, [&](int cls) {
        ++cues.connective_counts[static_cast<std::size_t>(cls)];
      });
      planning_.scan(toks, [&](int) { ++cues.planning_count; });
      claims_.scan(toks, [&](int) { ++cues.claim_count; });
      premises_.scan(toks, [&](int) { ++cues.premise_count; });
      subjectivity_.scan(toks, [&](int) { ++cues.subjectivity_count; });
      politeness_.scan(toks, [&](int cue) {
        politeness_sum += lex_.politeness_cues[static_cast<std::size_t>(cue)].weight;
      });

      const bool request =
          hooks_.request ? hooks_.request(sentence) : is_request(sentence);
      if (request) ++cues.request_count;
    }
    cues.politeness_score = hooks_.politeness
                                ? hooks_.politeness(message)
                                : 1.0 / (1.0 + std::exp(-politeness_sum));
    return cues;
  }

 private:
  static void add_pattern(detail::PhraseMatcher& m, const std::string& pattern,
                          int tag) {
    std::size_t start = 0;
    while (start <= pattern.size()) {
      std::size_t bar = pattern.find('|', start);
      if (bar == std::string::npos) bar = pattern.size();
      std::string alt = text::trim(pattern.substr(start, bar - start));
      bool anchored = false;
      if (!alt.empty() && alt[0] == '^') {
        anchored = true;
        alt = alt.substr(1);
      }
      if (!alt.empty()) m.add(alt, tag, anchored);
      start = bar + 1;
    }
  }

  LexiconSet lex_;
  Extractors hooks_;
  detail::PhraseMatcher connectives_;
  detail::PhraseMatcher planning_;
  detail::PhraseMatcher claims_;
  detail::PhraseMatcher premises_;
  detail::PhraseMatcher subjectivity_;
  detail::PhraseMatcher politeness_;
};

inline MessageCues extract_message_cues(const std::string& message,
                                        const LexiconSet& lex,
                                        const Extractors& hooks = {}) {
  return CueExtractor(lex, hooks).extract(message);
}

// Moves every connective present in more than 20% of the messages out of the
// active map. Presence uses the same token-boundary matching as extraction.
inline LexiconSet prune_frequent_connectives(
    const std::vector<std::string>& messages, LexiconSet lex,
    double threshold = 0.2) {
  if (messages.empty())
    throw gamelog::EmptyCorpus("prune_frequent_connectives: no messages");

  std::vector<std::string> phrases;
  detail::PhraseMatcher matcher;
  for (const auto& [phrase, cls] : lex.connectives) {
    matcher.add(phrase, static_cast<int>(phrases.size()));
    phrases.push_back(phrase);
  }
  matcher.finalize();

  std::vector<std::size_t> containing(phrases.size(), 0);
  std::vector<char> seen(phrases.size(), 0);
  for (const auto& message : messages) {
    std::fill(seen.begin(), seen.end(), 0);
    for (const auto& sentence : segment_sentences(message)) {
      matcher.scan(tokenize(sentence),
                   [&](int id) { seen[static_cast<std::size_t>(id)] = 1; });
    }
    for (std::size_t i = 0; i < phrases.size(); ++i) containing[i] += seen[i];
  }

  const double n = static_cast<double>(messages.size());
  for (std::size_t i = 0; i < phrases.size(); ++i) {
    if (static_cast<double>(containing[i]) / n > threshold) {
      lex.connectives.erase(phrases[i]);
      lex.pruned.insert(phrases[i]);
    }
  }
  return lex;
}

inline LexiconSet prune_frequent_connectives(
    const std::vector<gamelog::Message>& messages, LexiconSet lex,
    double threshold = 0.2) {
  std::vector<std::string> texts;
  texts.reserve(messages.size());
  for (const auto& m : messages) texts.push_back(m.text);
  return prune_frequent_connectives(texts, std::move(lex), threshold);
}

// The 16 per-direction conversational measurements.
struct CueBlock {
  double n_messages = 0;
  double avg_sentences_per_message = 0;
  double avg_words_per_sentence = 0;
  double frac_positive = 0;
  double frac_neutral = 0;
  double frac_negative = 0;
  double comparison_rate = 0;
  double contingency_rate = 0;
  double expansion_rate = 0;
  double temporal_rate = 0;
  double planning_rate = 0;
  double claim_rate = 0;
  double premise_rate = 0;
  double requests_per_message = 0;
  double mean_politeness = 0;
  double subjectivity_rate = 0;

  static constexpr std::size_t kSize = 16;

  static const std::array<std::string, kSize>& names() {
    static const std::array<std::string, kSize> kNames{
        "n_messages",          "avg_sentences_per_message",
        "avg_words_per_sentence", "frac_positive",
        "frac_neutral",        "frac_negative",
        "comparison_rate",     "contingency_rate",
        "expansion_rate",      "temporal_rate",
        "planning_rate",       "claim_rate",
        "premise_rate",        "requests_per_message",
        "mean_politeness",     "subjectivity_rate"};
    return kNames;
  }

  std::array<double, kSize> values() const {
    return {n_messages,        avg_sentences_per_message,
            avg_words_per_sentence, frac_positive,
            frac_neutral,      frac_negative,
            comparison_rate,   contingency_rate,
            expansion_rate,    temporal_rate,
            planning_rate,     claim_rate,
            premise_rate,      requests_per_message,
            mean_politeness,   subjectivity_rate};
  }

  CueBlock operator-(const CueBlock& o) const {
    CueBlock d;
    const auto a = values();
    const auto b = o.values();
    auto out = d.assignable();
    for (std::size_t i = 0; i < kSize; ++i) *out[i] = a[i] - b[i];
    return d;
  }

  std::array<double*, kSize> assignable() {
    return {&n_messages,        &avg_sentences_per_message,
            &avg_words_per_sentence, &frac_positive,
            &frac_neutral,      &frac_negative,
            &comparison_rate,   &contingency_rate,
            &expansion_rate,    &temporal_rate,
            &planning_rate,     &claim_rate,
            &premise_rate,      &requests_per_message,
            &mean_politeness,   &subjectivity_rate};
  }
};

// Per-direction cue blocks for one dyad-season plus their differences.
// from_b holds measurements of messages sent by the first role (the eventual
// betrayer in labeled data), from_v of those sent by the second.
struct SeasonFeatures {
  CueBlock from_b;
  CueBlock from_v;

  CueBlock imbalance() const { return from_b - from_v; }

  static constexpr std::size_t kSize = 3 * CueBlock::kSize;

  std::array<double, kSize> values() const {
    std::array<double, kSize> out{};
    const auto b = from_b.values();
    const auto v = from_v.values();
    const auto d = imbalance().values();
    for (std::size_t i = 0; i < CueBlock::kSize; ++i) {
      out[i] = b[i];
      out[CueBlock::kSize + i] = v[i];
      out[2 * CueBlock::kSize + i] = d[i];
    }
    return out;
  }

  static std::vector<std::string> feature_names() {
    std::vector<std::string> out;
    for (const char* prefix : {"b_", "v_", "d_"})
      for (const auto& n : CueBlock::names()) out.push_back(prefix + n);
    return out;
  }
};

namespace detail {

inline CueBlock summarize(const std::vector<MessageCues>& cues) {
  CueBlock block;
  if (cues.empty()) return block;  // all-zero block for a silent direction
  double sentences = 0, words = 0, pos = 0, neu = 0, neg = 0;
  std::array<double, kConnClasses> conn{};
  double planning = 0, claims = 0, premises = 0, requests = 0,
         subjectivity = 0;
  std::vector<double> politeness_scores;
  for (const auto& c : cues) {
    sentences += static_cast<double>(c.n_sentences);
    words += static_cast<double>(c.n_words);
    pos += static_cast<double>(c.sent_positive);
    neu += static_cast<double>(c.sent_neutral);
    neg += static_cast<double>(c.sent_negative);
    for (std::size_t k = 0; k < kConnClasses; ++k)
      conn[k] += static_cast<double>(c.connective_counts[k]);
    planning += static_cast<double>(c.planning_count);
    claims += static_cast<double>(c.claim_count);
    premises += static_cast<double>(c.premise_count);
    requests += static_cast<double>(c.request_count);
    politeness_scores.push_back(c.politeness_score);
    subjectivity += static_cast<double>(c.subjectivity_count);
  }
  // every other accumulator is integer-valued and thus order-exact; summing
  // the one real-valued cue in sorted order keeps the whole aggregation
  // invariant under message reordering
  std::sort(politeness_scores.begin(), politeness_scores.end());
  double politeness = 0;
  for (double p : politeness_scores) politeness += p;
  const double n = static_cast<double>(cues.size());
  auto per_sentence = [&](double x) { return sentences > 0 ? x / sentences : 0.0; };
  block.n_messages = n;
  block.avg_sentences_per_message = sentences / n;
  block.avg_words_per_sentence = sentences > 0 ? words / sentences : 0.0;
  block.frac_positive = per_sentence(pos);
  block.frac_neutral = per_sentence(neu);
  block.frac_negative = per_sentence(neg);
  block.comparison_rate = per_sentence(conn[0]);
  block.contingency_rate = per_sentence(conn[1]);
  block.expansion_rate = per_sentence(conn[2]);
  block.temporal_rate = per_sentence(conn[3]);
  block.planning_rate = per_sentence(planning);
  block.claim_rate = per_sentence(claims);
  block.premise_rate = per_sentence(premises);
  block.requests_per_message = requests / n;
  block.mean_politeness = politeness / n;
  block.subjectivity_rate = per_sentence(subjectivity);
  return block;
}

}  // namespace detail

// Aggregates one dyad-season's messages into per-direction features. Only
// messages between the two named powers count; direction is the sender.
inline SeasonFeatures aggregate_season_features(
    const std::vector<gamelog::Message>& messages, const std::string& b,
    const std::string& v, const CueExtractor& extractor) {
  std::vector<MessageCues> from_b, from_v;
  for (const auto& m : messages) {
    if (m.sender == b && m.recipient == v) {
      from_b.push_back(extractor.extract(m.text));
    } else if (m.sender == v && m.recipient == b) {
      from_v.push_back(extractor.extract(m.text));
    }
  }
  SeasonFeatures f;
  f.from_b = detail::summarize(from_b);
  f.from_v = detail::summarize(from_v);
  return f;
}

inline SeasonFeatures aggregate_season_features(
    const std::vector<gamelog::Message>& messages, const std::string& b,
    const std::string& v, const LexiconSet& lex, const Extractors& hooks = {}) {
  return aggregate_season_features(messages, b, v, CueExtractor(lex, hooks));
}

}  // namespace betrayal::lingcues
