#pragma once

#include <optional>
#include <string>
#include <vector>

#include "proxyme/types.hpp"

namespace proxyme {

enum class StreamState { Filling, Draining, Paused, Done };

std::string_view to_string(StreamState s);

struct DispatchedChunk {
  AudioChunk chunk;
  Millis send_at = 0;
};

/// Outbound audio for one mediated response: a contiguous chunk queue paced
/// at playback speed.
///
/// Chunk k+1 goes out duration(k) after chunk k, or when it becomes
/// available if the producer lags. The stream starts draining once
/// `buffer_depth` chunks (or the final chunk) are queued. Pause takes effect
/// at the next chunk boundary; resume continues from the cursor, so every
/// seq is dispatched exactly once and in order.
class OutboundStream {
 public:
  explicit OutboundStream(std::string stream_id, int buffer_depth = 1);

  /// `available_at` is when the producer handed the chunk over. Throws
  /// SequenceGap unless chunk.seq is one past the highest queued seq, and
  /// InvalidStreamState after the final chunk.
  void enqueue(AudioChunk chunk, Millis available_at = 0);

  /// Requires Draining; otherwise InvalidStreamState.
  void pause();
  /// Requires Paused; otherwise InvalidStreamState. Dispatch resumes no
  /// earlier than `now`.
  void resume(Millis now);

  /// Send time of the chunk at the cursor, if it can be scheduled now.
  std::optional<Millis> next_send_at() const;

  /// Dispatches, in order, every chunk whose send time is <= now.
  std::vector<DispatchedChunk> dispatch_due(Millis now);

  const std::string& stream_id() const { return stream_id_; }
  StreamState state() const { return state_; }
  std::int64_t cursor() const { return cursor_; }
  std::size_t queued() const { return queue_.size(); }
  int buffer_depth() const { return buffer_depth_; }
  /// Sum of dispatched chunk durations.
  Millis playback_clock_ms() const { return playback_clock_; }
  /// When the last dispatched chunk finishes playing.
  std::optional<Millis> playback_end_at() const;

 private:
  struct Entry {
    AudioChunk chunk;
    Millis available_at;
  };

  std::string stream_id_;
  int buffer_depth_;
  std::vector<Entry> queue_;
  std::int64_t cursor_ = 0;
  StreamState state_ = StreamState::Filling;
  Millis drain_start_ = 0;
  std::optional<Millis> last_send_;
  Millis last_duration_ = 0;
  Millis resume_at_ = 0;
  Millis playback_clock_ = 0;
};

enum class TimelineMode { Simulated, RealTime };

struct TimelineEntry {
  std::int64_t seq = 0;
  Millis send_at = 0;

  friend bool operator==(const TimelineEntry&, const TimelineEntry&) = default;
};

/// Dispatch schedule of a fully enqueued stream. Simulated mode computes it
/// analytically. RealTime mode drains a copy against the steady clock,
/// sleeping between sends, and reports measured offsets from the call.
std::vector<TimelineEntry> dispatch_timeline(const OutboundStream& stream, TimelineMode mode);

}  // namespace proxyme
