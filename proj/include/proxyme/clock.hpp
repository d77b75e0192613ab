#pragma once

#include <atomic>
#include <chrono>

#include "proxyme/types.hpp"

namespace proxyme {

/// Millisecond time source. All session timing is relative to it.
class Clock {
 public:
  virtual ~Clock() = default;
  virtual Millis now_ms() const = 0;
};

/// Monotonic clock counting from construction.
class SteadyClock final : public Clock {
 public:
  SteadyClock() : origin_(std::chrono::steady_clock::now()) {}

  Millis now_ms() const override {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::steady_clock::now() - origin_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point origin_;
};

/// Manually driven clock for simulation. Time only moves forward.
class VirtualClock final : public Clock {
 public:
  explicit VirtualClock(Millis start = 0) : now_(start) {}

  Millis now_ms() const override { return now_.load(); }

  void advance_to(Millis t) {
    Millis cur = now_.load();
    while (t > cur && !now_.compare_exchange_weak(cur, t)) {
    }
  }
  void advance_by(Millis d) { advance_to(now_.load() + d); }

 private:
  std::atomic<Millis> now_;
};

}  // namespace proxyme
