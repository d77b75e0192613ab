#pragma once

#include <cstdint>
#include <mutex>
#include <random>

#include "proxyme/types.hpp"

namespace proxyme {

/// Fixed(v) or Normal(mean, stddev) clipped at zero, in milliseconds.
struct Distribution {
  enum class Kind { Fixed, Normal };

  Kind kind = Kind::Fixed;
  double mean = 0;
  double stddev = 0;

  static Distribution fixed(double v) { return {Kind::Fixed, v, 0}; }
  static Distribution normal(double mean, double stddev) {
    return {Kind::Normal, mean, stddev};
  }

  Millis sample(std::mt19937_64& engine) const;

  friend bool operator==(const Distribution&, const Distribution&) = default;
};

struct LatencyProfile {
  Distribution stt_ms = Distribution::fixed(1200);
  Distribution llm_ms = Distribution::fixed(2900);
  Distribution tts_total_ms = Distribution::fixed(7500);
  Distribution tts_first_chunk_ms = Distribution::fixed(1500);

  /// Throws ConfigError if any parameter is negative.
  void validate() const;

  /// Every stage Normal with the given means and stddev = fraction * mean.
  static LatencyProfile normal_around_defaults(double fraction);

  friend bool operator==(const LatencyProfile&, const LatencyProfile&) = default;
};

/// Seeded, thread-safe stream of stage latency draws.
class LatencySampler {
 public:
  LatencySampler(LatencyProfile profile, std::uint64_t seed);

  Millis stt();
  Millis llm();
  Millis tts_total();
  Millis tts_first_chunk();

  const LatencyProfile& profile() const { return profile_; }

 private:
  Millis draw(const Distribution& d);

  LatencyProfile profile_;
  std::mutex mutex_;
  std::mt19937_64 engine_;
};

}  // namespace proxyme
