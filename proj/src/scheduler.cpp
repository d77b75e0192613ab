#include "proxyme/scheduler.hpp"

#include <algorithm>
#include <limits>
#include <thread>

#include "proxyme/clock.hpp"

namespace proxyme {

std::string_view to_string(StreamState s) {
  switch (s) {
    case StreamState::Filling:
      return "Filling";
    case StreamState::Draining:
      return "Draining";
    case StreamState::Paused:
      return "Paused";
    case StreamState::Done:
      return "Done";
  }
  return "?";
}

OutboundStream::OutboundStream(std::string stream_id, int buffer_depth)
    : stream_id_(std::move(stream_id)), buffer_depth_(std::max(1, buffer_depth)) {}

void OutboundStream::enqueue(AudioChunk chunk, Millis available_at) {
  const auto expected = static_cast<std::int64_t>(queue_.size());
  if (chunk.seq != expected) throw SequenceGap(expected, chunk.seq);
  if (!queue_.empty() && queue_.back().chunk.is_final) {
    throw InvalidStreamState("stream " + stream_id_ + " already received its final chunk");
  }
  if (chunk.duration_ms <= 0) throw InvalidStreamState("chunk duration must be positive");
  if (!queue_.empty()) available_at = std::max(available_at, queue_.back().available_at);
  const bool is_final = chunk.is_final;
  queue_.push_back({std::move(chunk), available_at});
  if (state_ == StreamState::Filling &&
      (static_cast<int>(queue_.size()) >= buffer_depth_ || is_final)) {
    state_ = StreamState::Draining;
    drain_start_ = available_at;
  }
}

void OutboundStream::pause() {
  if (state_ != StreamState::Draining) {
    throw InvalidStreamState("pause requires Draining, stream is " +
                             std::string(to_string(state_)));
  }
  state_ = StreamState::Paused;
}

void OutboundStream::resume(Millis now) {
  if (state_ != StreamState::Paused) {
    throw InvalidStreamState("resume requires Paused, stream is " +
                             std::string(to_string(state_)));
  }
  state_ = StreamState::Draining;
  resume_at_ = std::max(resume_at_, now);
}

std::optional<Millis> OutboundStream::next_send_at() const {
  if (state_ != StreamState::Draining) return std::nullopt;
  if (cursor_ >= static_cast<std::int64_t>(queue_.size())) return std::nullopt;
  Millis t = queue_[static_cast<std::size_t>(cursor_)].available_at;
  t = std::max(t, drain_start_);
  if (last_send_) t = std::max(t, *last_send_ + last_duration_);
  return std::max(t, resume_at_);
}

std::vector<DispatchedChunk> OutboundStream::dispatch_due(Millis now) {
  std::vector<DispatchedChunk> out;
  while (auto t = next_send_at()) {
    if (*t > now) break;
    const AudioChunk& chunk = queue_[static_cast<std::size_t>(cursor_)].chunk;
    out.push_back({chunk, *t});
    ++cursor_;
    last_send_ = *t;
    last_duration_ = chunk.duration_ms;
    playback_clock_ += chunk.duration_ms;
    if (chunk.is_final) state_ = StreamState::Done;
  }
  return out;
}

std::optional<Millis> OutboundStream::playback_end_at() const {
  if (!last_send_) return std::nullopt;
  return *last_send_ + last_duration_;
}

std::vector<TimelineEntry> dispatch_timeline(const OutboundStream& stream, TimelineMode mode) {
  OutboundStream copy = stream;
  std::vector<TimelineEntry> out;
  if (mode == TimelineMode::Simulated) {
    for (const auto& d : copy.dispatch_due(std::numeric_limits<Millis>::max())) {
      out.push_back({d.chunk.seq, d.send_at});
    }
    return out;
  }
  const SteadyClock clock;
  const auto origin = std::chrono::steady_clock::now();
  while (auto t = copy.next_send_at()) {
    std::this_thread::sleep_until(origin + std::chrono::milliseconds(*t));
    const Millis now = clock.now_ms();
    for (const auto& d : copy.dispatch_due(*t)) out.push_back({d.chunk.seq, now});
  }
  return out;
}

}  // namespace proxyme
