#pragma once

#include <array>
#include <string>
#include <string_view>

#include "proxyme/types.hpp"

namespace proxyme {

inline constexpr std::string_view kEnhancementPrefix = "To put it more strongly: ";
inline constexpr std::string_view kCounterPrefix =
    "On reflection, I take the opposite view: ";

struct PolarityRule {
  std::string_view from;
  std::string_view to;
};

/// A longer phrase precedes any rule that is its prefix.
inline constexpr std::array<PolarityRule, 10> kPolarityLexicon{{
    {"should not", "should"},
    {"should", "should not"},
    {"would not", "would"},
    {"would", "would not"},
    {"will not", "will"},
    {"will", "will not"},
    {"I agree", "I disagree"},
    {"I disagree", "I agree"},
    {"is not", "is"},
    {"is", "is not"},
}};

/// Flips at most one polarity phrase per sentence: the leftmost whole-word
/// lexicon match, with rule order breaking ties at the same position.
/// Sentences end after '.', '!' or '?'.
std::string negate_polarity(std::string_view text);

/// The deterministic stand-in for the content-modification model.
std::string apply_content_mode(std::string_view text, ContentMode mode);

}  // namespace proxyme
