#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace proxyme {

std::string base64_encode(std::span<const std::uint8_t> bytes);
/// Throws ParseError on characters outside the standard alphabet or bad padding.
std::vector<std::uint8_t> base64_decode(std::string_view text);

std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = 0);

/// splitmix64 step; used to derive independent seeds from one master seed.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt);

/// Whitespace-separated word count.
std::size_t count_words(std::string_view text);
std::vector<std::string> split_words(std::string_view text);

/// Uniform integer in [0, bound) by rejection, portable across standard
/// library implementations.
template <class Engine>
std::uint64_t uniform_below(Engine& engine, std::uint64_t bound) {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t x;
  do {
    x = static_cast<std::uint64_t>(engine());
  } while (x >= limit);
  return x % bound;
}

}  // namespace proxyme
