#include "proxyme/content.hpp"

#include <cctype>

namespace proxyme {

namespace {

bool is_word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '\'' || c == '_';
}

bool is_sentence_end(char c) { return c == '.' || c == '!' || c == '?'; }

// Index of the first lexicon rule matching at `pos` within [pos, end), or -1.
int rule_at(std::string_view text, std::size_t pos, std::size_t end) {
  if (pos > 0 && is_word_char(text[pos - 1])) return -1;
  for (std::size_t r = 0; r < kPolarityLexicon.size(); ++r) {
    const std::string_view from = kPolarityLexicon[r].from;
    if (pos + from.size() > end) continue;
    if (text.compare(pos, from.size(), from) != 0) continue;
    const std::size_t after = pos + from.size();
    if (after < text.size() && is_word_char(text[after])) continue;
    return static_cast<int>(r);
  }
  return -1;
}

}  // namespace

std::string negate_polarity(std::string_view text) {
  std::string out;
  out.reserve(text.size() + 8);
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = start;
    while (end < text.size() && !is_sentence_end(text[end])) ++end;
    if (end < text.size()) ++end;  // keep the terminator with its sentence

    bool flipped = false;
    std::size_t pos = start;
    while (pos < end) {
      const int r = flipped ? -1 : rule_at(text, pos, end);
      if (r >= 0) {
        out += kPolarityLexicon[r].to;
        pos += kPolarityLexicon[r].from.size();
        flipped = true;
      } else {
        out += text[pos++];
      }
    }
    start = end;
  }
  return out;
}

std::string apply_content_mode(std::string_view text, ContentMode mode) {
  switch (mode) {
    case ContentMode::Repetition:
      return std::string(text);
    case ContentMode::Enhancement:
      return std::string(kEnhancementPrefix) + std::string(text);
    case ContentMode::CounteredConclusion:
      return std::string(kCounterPrefix) + negate_polarity(text);
  }
  throw UnknownMode("content mode value " + std::to_string(static_cast<int>(mode)));
}

}  // namespace proxyme
