#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <string>
#include <string_view>
#include <vector>

namespace betrayal::text {

inline std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

inline std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
    return static_cast<char>(std::tolower(c));
  });
  return out;
}

namespace detail {

// Abbreviations whose trailing period does not end a sentence.
inline const std::array<std::string_view, 17> kAbbrevGuards = {
    "e.g", "i.e", "mr",  "mrs", "ms", "dr",   "prof", "st", "vs",
    "etc", "cf",  "ca",  "gen", "col", "lt",  "capt", "sgt",
};

inline bool is_guarded(std::string_view before) {
  // `before` is the text up to (not including) the period.
  std::size_t e = before.size();
  std::size_t b = e;
  while (b > 0) {
    char c = before[b - 1];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '.') {
      --b;
    } else {
      break;
    }
  }
  if (b == e) return false;
  std::string word = lower(before.substr(b, e - b));
  // Strip internal dots so "e.g" and "e.g." both match.
  while (!word.empty() && word.back() == '.') word.pop_back();
  for (auto g : kAbbrevGuards) {
    if (word == g) return true;
  }
  // Single letters ("J. Smith") do not end sentences either.
  return word.size() == 1;
}

}  // namespace detail

// Splits on '.', '!', '?' followed by whitespace or end of text, with an
// abbreviation guard list. Never returns empty sentences.
inline std::vector<std::string> segment_sentences(std::string_view raw) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    char c = raw[i];
    if (c != '.' && c != '!' && c != '?') continue;
    // Swallow runs of terminators ("?!", "...").
    std::size_t j = i;
    while (j + 1 < raw.size() &&
           (raw[j + 1] == '.' || raw[j + 1] == '!' || raw[j + 1] == '?')) {
      ++j;
    }
    bool at_end = (j + 1 == raw.size());
    bool boundary =
        at_end || std::isspace(static_cast<unsigned char>(raw[j + 1]));
    if (!boundary) {
      i = j;
      continue;
    }
    if (c == '.' && i == j && detail::is_guarded(raw.substr(start, i - start))) {
      continue;
    }
    std::string sentence = trim(raw.substr(start, j + 1 - start));
    if (!sentence.empty()) out.push_back(std::move(sentence));
    start = j + 1;
    i = j;
  }
  std::string tail = trim(raw.substr(start));
  if (!tail.empty()) out.push_back(std::move(tail));
  return out;
}

// Whitespace split, outer punctuation stripped, case-folded. Internal
// apostrophes survive so that "shouldn't" stays one token.
inline std::vector<std::string> tokenize(std::string_view sentence) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  const std::size_t n = sentence.size();
  while (i < n) {
    while (i < n && std::isspace(static_cast<unsigned char>(sentence[i]))) ++i;
    std::size_t b = i;
    while (i < n && !std::isspace(static_cast<unsigned char>(sentence[i]))) ++i;
    if (b == i) break;
    std::size_t e = i;
    auto is_outer_punct = [&](std::size_t k) {
      char c = sentence[k];
      return std::ispunct(static_cast<unsigned char>(c)) && c != '\'';
    };
    while (b < e && is_outer_punct(b)) ++b;
    while (e > b && is_outer_punct(e - 1)) --e;
    // Trim stray quote characters too.
    while (b < e && sentence[b] == '\'') ++b;
    while (e > b && sentence[e - 1] == '\'') --e;
    if (b < e) tokens.push_back(lower(sentence.substr(b, e - b)));
  }
  return tokens;
}

inline bool ends_with_question(std::string_view sentence) {
  std::size_t e = sentence.size();
  while (e > 0) {
    char c = sentence[e - 1];
    if (std::isspace(static_cast<unsigned char>(c)) || c == '"' || c == '\'' ||
        c == ')') {
      --e;
    } else {
      break;
    }
  }
  return e > 0 && sentence[e - 1] == '?';
}

}  // namespace betrayal::text
