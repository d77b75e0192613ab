#pragma once

#include <random>
#include <string>
#include <vector>

#include "proxyme/content.hpp"
#include "proxyme/util.hpp"

namespace proxyme::test {

inline bool word_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '\'' ||
         c == '_';
}

// Brute force: collect every whole-word occurrence of every rule in the
// sentence, keep the one with the smallest (position, rule index).
inline std::string oracle_negate(const std::string& text) {
  std::vector<std::string> sentences;
  std::string cur;
  for (char c : text) {
    cur += c;
    if (c == '.' || c == '!' || c == '?') {
      sentences.push_back(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) sentences.push_back(cur);

  std::string out;
  for (const auto& s : sentences) {
    std::size_t best_pos = std::string::npos;
    std::size_t best_rule = 0;
    for (std::size_t r = 0; r < kPolarityLexicon.size(); ++r) {
      const std::string from(kPolarityLexicon[r].from);
      for (std::size_t p = s.find(from); p != std::string::npos; p = s.find(from, p + 1)) {
        const bool left_ok = p == 0 || !word_char(s[p - 1]);
        const bool right_ok = p + from.size() == s.size() || !word_char(s[p + from.size()]);
        if (left_ok && right_ok && p < best_pos) {
          best_pos = p;
          best_rule = r;
        }
      }
    }
    if (best_pos == std::string::npos) {
      out += s;
    } else {
      out += s.substr(0, best_pos) + std::string(kPolarityLexicon[best_rule].to) +
             s.substr(best_pos + kPolarityLexicon[best_rule].from.size());
    }
  }
  return out;
}

inline std::vector<std::string> corpus(std::size_t n, std::uint64_t seed) {
  const std::vector<std::string> subjects{"I", "We", "My neighbour", "The manager", "Nobody",
                                          "Each of us", "She"};
  const std::vector<std::string> phrases{"should",   "should not", "would",     "would not",
                                         "will",     "will not",   "I agree",   "I disagree",
                                         "is",       "is not",     "shouldn't", "island",
                                         "willing",  "this",       "wouldn't",  "I agreed"};
  const std::vector<std::string> tails{"report it", "tell the truth", "keep the money",
                                       "help them", "stay quiet",      "return the wallet",
                                       "that it is fair", "go back"};
  const std::vector<std::string> ends{".", "!", "?", ""};
  std::mt19937_64 rng(seed);
  const auto pick = [&](const std::vector<std::string>& v) { return v[uniform_below(rng, v.size())]; };
  std::vector<std::string> out;
  while (out.size() < n) {
    std::string text;
    const int sentences = 1 + static_cast<int>(uniform_below(rng, 3));
    for (int k = 0; k < sentences; ++k) {
      if (!text.empty()) text += ' ';
      text += pick(subjects) + " " + pick(phrases) + " " + pick(tails);
      if (uniform_below(rng, 2) == 0) text += " and " + pick(phrases) + " " + pick(tails);
      text += k + 1 == sentences ? pick(ends) : std::string(".");
    }
    bool bears = false;
    for (const auto& rule : kPolarityLexicon) {
      std::size_t p = text.find(rule.from);
      while (p != std::string::npos) {
        const bool l = p == 0 || !word_char(text[p - 1]);
        const bool r = p + rule.from.size() == text.size() || !word_char(text[p + rule.from.size()]);
        bears = bears || (l && r);
        p = text.find(rule.from, p + 1);
      }
    }
    if (bears) out.push_back(text);
  }
  return out;
}

}  // namespace proxyme::test
