#include "proxyme/latency.hpp"

#include <cmath>

namespace proxyme {

Millis Distribution::sample(std::mt19937_64& engine) const {
  if (kind == Kind::Fixed) return std::llround(mean);
  std::normal_distribution<double> normal(mean, stddev);
  return std::max<Millis>(0, std::llround(normal(engine)));
}

void LatencyProfile::validate() const {
  const auto check = [](const Distribution& d, const char* name) {
    if (d.mean < 0 || d.stddev < 0) {
      throw ConfigError(std::string("latency_profile.") + name +
                        ": parameters must be >= 0");
    }
  };
  check(stt_ms, "stt_ms");
  check(llm_ms, "llm_ms");
  check(tts_total_ms, "tts_total_ms");
  check(tts_first_chunk_ms, "tts_first_chunk_ms");
}

LatencyProfile LatencyProfile::normal_around_defaults(double fraction) {
  const LatencyProfile d;
  const auto n = [&](const Distribution& f) {
    return Distribution::normal(f.mean, f.mean * fraction);
  };
  return {n(d.stt_ms), n(d.llm_ms), n(d.tts_total_ms), n(d.tts_first_chunk_ms)};
}

LatencySampler::LatencySampler(LatencyProfile profile, std::uint64_t seed)
    : profile_(profile), engine_(seed) {
  profile_.validate();
}

Millis LatencySampler::draw(const Distribution& d) {
  std::lock_guard lock(mutex_);
  return d.sample(engine_);
}

Millis LatencySampler::stt() { return draw(profile_.stt_ms); }
Millis LatencySampler::llm() { return draw(profile_.llm_ms); }
Millis LatencySampler::tts_total() { return draw(profile_.tts_total_ms); }
Millis LatencySampler::tts_first_chunk() { return draw(profile_.tts_first_chunk_ms); }

}  // namespace proxyme
