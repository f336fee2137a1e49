#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <random>

#include "betrayal/lingcues.hpp"
#include "betrayal/rng.hpp"

using namespace betrayal;
using lingcues::CueBlock;
using lingcues::LexiconSet;
using lingcues::Sentiment;

namespace {

const LexiconSet& lex() {
  static const LexiconSet l = LexiconSet::builtin();
  return l;
}

gamelog::Message msg(std::string from, std::string to, std::string text) {
  gamelog::Message m;
  m.sender = std::move(from);
  m.recipient = std::move(to);
  m.text = std::move(text);
  return m;
}

}  // namespace

TEST_CASE("sentence segmentation basics") {
  CHECK(lingcues::segment_sentences("Hi. How are you?").size() == 2);
  CHECK(lingcues::segment_sentences("").empty());
  CHECK(lingcues::segment_sentences("I think e.g. this works.").size() == 1);
}

TEST_CASE("lexicon sentiment with negation window") {
  CHECK(lingcues::sentiment_label(
            "I will still be thrilled if it turns out you win this war.",
            lex()) == Sentiment::positive);
  CHECK(lingcues::sentiment_label("The fleet sits in the channel.", lex()) ==
        Sentiment::neutral);
  CHECK(lingcues::sentiment_label("not a great outcome", lex()) ==
        Sentiment::negative);

  // the flip window covers exactly three tokens after the negator
  using Tokens = std::vector<std::string>;
  CHECK(lingcues::sentiment_label(Tokens{"not", "great"}, lex()) ==
        Sentiment::negative);
  CHECK(lingcues::sentiment_label(Tokens{"not", "x", "y", "great"}, lex()) ==
        Sentiment::negative);
  CHECK(lingcues::sentiment_label(Tokens{"not", "x", "y", "z", "great"},
                                  lex()) == Sentiment::positive);
}

TEST_CASE("frequent connectives are pruned at the 20% threshold") {
  std::vector<std::string> messages(10, "Plain talk about the board.");
  messages[0] = "While you wait, move north.";
  messages[1] = "While I agree, Munich worries me.";
  messages[2] = "It happened while we argued.";

  const auto pruned3 = lingcues::prune_frequent_connectives(messages, lex());
  CHECK(pruned3.pruned.count("while") == 1);
  CHECK(pruned3.connectives.count("while") == 0);

  messages[2] = "It happened as as as we argued.";  // 'as' presence, not count
  const auto pruned2 = lingcues::prune_frequent_connectives(messages, lex());
  CHECK(pruned2.pruned.count("while") == 0);
  CHECK(pruned2.connectives.count("while") == 1);
  // one message containing 'as' three times is 10% presence
  CHECK(pruned2.pruned.count("as") == 0);

  const auto quiet = lingcues::prune_frequent_connectives(
      std::vector<std::string>(10, "Quiet board tonight."), lex());
  CHECK(quiet.pruned.empty());

  CHECK_THROWS_AS(
      lingcues::prune_frequent_connectives(std::vector<std::string>{}, lex()),
      gamelog::EmptyCorpus);
}

TEST_CASE("pruned connectives no longer count") {
  auto pruned = lex();
  pruned.pruned.insert("but");
  pruned.connectives.erase("but");
  const auto with = lingcues::extract_message_cues("But we should march.", lex());
  const auto without =
      lingcues::extract_message_cues("But we should march.", pruned);
  CHECK(with.connective_counts[0] == 1);     // comparison
  CHECK(without.connective_counts[0] == 0);
}

TEST_CASE("planning and claim markers hit the documented examples") {
  const auto planning = lingcues::extract_message_cues(
      "HOL should fall next year, and then MUN and KIE shortly thereafter.",
      lex());
  CHECK(planning.planning_count >= 2);

  const auto claims = lingcues::extract_message_cues(
      "But I believe that E/F have discarded him and so I think he might bite.",
      lex());
  CHECK(claims.claim_count >= 2);

  const auto premises = lingcues::extract_message_cues(
      "We should strike because Turkey is exposed; as a result the east opens.",
      lex());
  CHECK(premises.premise_count == 2);

  const auto subj = lingcues::extract_message_cues(
      "Frankly, that accusation is absurd.", lex());
  CHECK(subj.subjectivity_count == 3);
}

TEST_CASE("multiword phrases match greedily, longest first") {
  const auto cues = lingcues::extract_message_cues(
      "We lost ground, for example in Munich.", lex());
  CHECK(cues.connective_counts[2] == 1);  // expansion: "for example"
  CHECK(cues.connective_counts[1] == 0);  // not the contingency "for"
}

TEST_CASE("an empty lexicon yields zero cue counts") {
  const auto cues = lingcues::extract_message_cues(
      "We should march north and hold the line because winter comes.",
      LexiconSet{});
  CHECK(cues.n_sentences == 1);
  CHECK(cues.n_words == 11);
  CHECK(cues.sent_neutral == 1);
  for (auto c : cues.connective_counts) CHECK(c == 0);
  CHECK(cues.planning_count == 0);
  CHECK(cues.claim_count == 0);
  CHECK(cues.premise_count == 0);
  CHECK(cues.subjectivity_count == 0);
  CHECK(cues.request_count == 0);
  CHECK(cues.politeness_score == Catch::Approx(0.5));
}

TEST_CASE("requests are questions or modal openings") {
  CHECK(lingcues::is_request("Will that work for you?"));
  CHECK(lingcues::is_request("Please hold Galicia."));
  CHECK(lingcues::is_request("Could you support me into Munich."));
  CHECK(lingcues::is_request("Can you cover Berlin."));
  CHECK(lingcues::is_request("Would you consider a draw."));
  CHECK_FALSE(lingcues::is_request("I am moving to Tyrolia."));
  CHECK_FALSE(lingcues::is_request("You could help."));

  const auto cues = lingcues::extract_message_cues(
      "Please hold Galicia. I am moving north. Will you cover Vienna?", lex());
  CHECK(cues.request_count == 2);
}

TEST_CASE("politeness scoring stays in [0,1] and responds to cues") {
  auto score = [](const std::string& m) {
    return lingcues::extract_message_cues(m, lex()).politeness_score;
  };
  const double warm = score("Thank you for the help. Please consider it.");
  const double cold = score("You must move now. Why would I trust you?");
  CHECK(warm > 0.5);
  CHECK(cold < 0.5);
  CHECK(warm <= 1.0);
  CHECK(cold >= 0.0);

  // adding a gratitude sentence never lowers the score
  const std::string base = "We should coordinate on Burgundy.";
  CHECK(score(base + " Thanks.") > score(base));

  // '^' patterns only fire at the start of a sentence
  CHECK(score("You never help.") < 0.5);
  CHECK(score("I see you there.") == Catch::Approx(0.5));
}

TEST_CASE("per-direction aggregation of a dyad season") {
  const std::vector<gamelog::Message> messages{
      msg("GERMANY", "AUSTRIA", "Great. Wonderful."),
      msg("GERMANY", "AUSTRIA", "The board. A map."),
      msg("AUSTRIA", "GERMANY", "Noted."),
      msg("GERMANY", "FRANCE", "Great. Great. Great."),  // other dyad: ignored
  };
  const auto f = lingcues::aggregate_season_features(messages, "GERMANY",
                                                     "AUSTRIA", lex());
  CHECK(f.from_b.n_messages == 2.0);
  CHECK(f.from_b.avg_sentences_per_message == Catch::Approx(2.0));
  CHECK(f.from_b.frac_positive == Catch::Approx(0.5));
  CHECK(f.from_b.frac_neutral == Catch::Approx(0.5));
  CHECK(f.from_b.frac_negative == 0.0);
  CHECK(f.from_v.n_messages == 1.0);
  CHECK(f.imbalance().n_messages == Catch::Approx(1.0));

  const auto empty =
      lingcues::aggregate_season_features({}, "GERMANY", "AUSTRIA", lex());
  for (double v : empty.values()) CHECK(v == 0.0);
}

TEST_CASE("aggregation ignores message order") {
  std::vector<gamelog::Message> messages{
      msg("GERMANY", "AUSTRIA", "Thank you. Please hold the line."),
      msg("AUSTRIA", "GERMANY", "Why would I? You never said so."),
      msg("GERMANY", "AUSTRIA", "I think we win soon, and then Munich falls."),
      msg("AUSTRIA", "GERMANY", "Not a great plan."),
      msg("GERMANY", "AUSTRIA", "Could you cover Vienna?"),
  };
  const auto base = lingcues::aggregate_season_features(messages, "GERMANY",
                                                        "AUSTRIA", lex());
  std::mt19937 shuf(99);
  for (int i = 0; i < 5; ++i) {
    std::shuffle(messages.begin(), messages.end(), shuf);
    const auto again = lingcues::aggregate_season_features(messages, "GERMANY",
                                                           "AUSTRIA", lex());
    CHECK(again.values() == base.values());
  }
}

TEST_CASE("swapping roles negates every imbalance feature") {
  const std::vector<gamelog::Message> messages{
      msg("GERMANY", "AUSTRIA", "Thank you. We march soon, and I am glad."),
      msg("AUSTRIA", "GERMANY", "You worry me. Is this wise?"),
      msg("GERMANY", "AUSTRIA", "Please keep Tyrolia clear."),
  };
  const auto gb = lingcues::aggregate_season_features(messages, "GERMANY",
                                                      "AUSTRIA", lex());
  const auto ag = lingcues::aggregate_season_features(messages, "AUSTRIA",
                                                      "GERMANY", lex());
  const auto d1 = gb.imbalance().values();
  const auto d2 = ag.imbalance().values();
  for (std::size_t i = 0; i < d1.size(); ++i) CHECK(d1[i] == -d2[i]);
}

TEST_CASE("sentiment fractions partition the sentences") {
  rng::Xoshiro256 gen(31);
  const std::vector<std::string> bits{
      "We win soon.", "Terrible idea.", "The board sits.",
      "I am glad, thanks.", "You lied about Munich."};
  for (int trial = 0; trial < 30; ++trial) {
    std::string text;
    const std::size_t n = 1 + gen.bounded(5);
    for (std::size_t k = 0; k < n; ++k) {
      if (!text.empty()) text += " ";
      text += bits[gen.bounded(bits.size())];
    }
    const auto f = lingcues::aggregate_season_features(
        {msg("GERMANY", "AUSTRIA", text)}, "GERMANY", "AUSTRIA", lex());
    CHECK(f.from_b.frac_positive + f.from_b.frac_neutral +
              f.from_b.frac_negative ==
          Catch::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("one-sided positivity shows up in the imbalance") {
  const std::vector<gamelog::Message> messages{
      msg("GERMANY", "AUSTRIA", "Wonderful work. I am glad and confident."),
      msg("GERMANY", "AUSTRIA", "Great outcome. Our success is certain."),
      msg("AUSTRIA", "GERMANY", "The army sits in Galicia."),
      msg("AUSTRIA", "GERMANY", "I will review the board."),
  };
  const auto f = lingcues::aggregate_season_features(messages, "GERMANY",
                                                     "AUSTRIA", lex());
  CHECK(f.imbalance().frac_positive > 0.0);
}

TEST_CASE("shipped lexicon files parse, validate, and match the built-in") {
  const auto from_disk = lingcues::load_lexicons(BETRAYAL_LEXICON_DIR);
  const auto embedded = LexiconSet::builtin();
  CHECK(from_disk == embedded);
  CHECK_NOTHROW(lingcues::validate(embedded));
  CHECK(embedded.pruned.empty());

  // every planning marker doubles as a temporal connective
  for (const auto& p : embedded.planning_markers) {
    REQUIRE(embedded.connectives.count(p) == 1);
    CHECK(embedded.connectives.at(p) == lingcues::ConnClass::temporal);
  }
  // spot checks
  CHECK(embedded.connectives.at("but") == lingcues::ConnClass::comparison);
  CHECK(embedded.connectives.at("because") == lingcues::ConnClass::contingency);
  CHECK(embedded.connectives.at("and") == lingcues::ConnClass::expansion);
  CHECK(embedded.sentiment.at("thrilled") == 1);
  CHECK(embedded.sentiment.at("terrible") == -1);
  CHECK(embedded.negators.count("not") == 1);
  for (const auto& cue : embedded.politeness_cues)
    CHECK(std::isfinite(cue.weight));

  // the connectives the frequency rule historically removes are all present
  for (const char* w : {"and", "for", "but", "if", "as", "or", "so"})
    CHECK(embedded.connectives.count(w) == 1);
}

TEST_CASE("scorer hooks override the built-in heuristics") {
  lingcues::Extractors hooks;
  hooks.sentiment = [](const std::vector<std::string>&) {
    return Sentiment::negative;
  };
  hooks.politeness = [](const std::string&) { return 0.25; };
  hooks.request = [](const std::string&) { return true; };
  const auto cues = lingcues::extract_message_cues(
      "Wonderful. Thank you so much!", lex(), hooks);
  CHECK(cues.sent_negative == 2);
  CHECK(cues.politeness_score == 0.25);
  CHECK(cues.request_count == 2);
}
