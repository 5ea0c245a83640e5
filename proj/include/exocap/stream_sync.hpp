#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "exocap/pose.hpp"

namespace exocap {

enum class StreamKind : std::uint8_t { pose = 0, joints = 1, frame = 2 };

std::string_view to_string(StreamKind kind) noexcept;
std::optional<StreamKind> parse_stream_kind(std::string_view text) noexcept;

struct StreamDescriptor {
  std::string stream_id;
  StreamKind kind = StreamKind::pose;
  double nominal_rate_hz = 0.0;
  std::int64_t staleness_budget_ns = 0;
  /// Joint count for joint streams; unused (0) for pose and frame streams.
  std::uint32_t channels = 0;

  /// Descriptor with the default staleness budget of two nominal periods.
  static StreamDescriptor make(std::string id, StreamKind kind, double rate_hz, std::uint32_t channels = 0);

  friend bool operator==(const StreamDescriptor&, const StreamDescriptor&) = default;
};

/// Throws InvalidArgument when a descriptor breaks its invariants.
void validate_descriptor(const StreamDescriptor& desc);

inline constexpr std::uint16_t kEncodingGray8 = 1;

/// Opaque image payload; gray8 frames carry width·height bytes.
struct FrameBlob {
  std::uint16_t encoding = kEncodingGray8;
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::vector<std::byte> data;

  friend bool operator==(const FrameBlob&, const FrameBlob&) = default;
};

using JointVector = std::vector<double>;
using StreamValue = std::variant<Pose, JointVector, FrameBlob>;

StreamKind kind_of(const StreamValue& value) noexcept;

struct Sample {
  std::int64_t timestamp_ns = 0;
  StreamValue payload;
};

/// Time-aligned tuple at one master tick. `entries[i]` belongs to the i-th
/// registered stream; std::nullopt is the gap marker.
struct SyncedFrame {
  std::uint64_t tick_index = 0;
  std::int64_t tick_time_ns = 0;
  std::vector<std::optional<StreamValue>> entries;

  std::size_t gap_count() const;
  friend bool operator==(const SyncedFrame&, const SyncedFrame&) = default;
};

/// Canonical time of master tick `index`: origin + round(index · 1e9 / rate).
std::int64_t tick_time_ns(std::uint64_t index, double rate_hz, std::int64_t origin_ns = 0);

struct StreamHandle {
  std::size_t index = 0;
};

enum class PushStatus {
  accepted,
  non_monotonic_timestamp,
  kind_mismatch,
  size_mismatch,
  buffer_full,
  not_started,
  stream_closed,
};

std::string_view to_string(PushStatus status) noexcept;

/// Producer side of a sensor. Simulated sources and device drivers both
/// implement this; next() returns std::nullopt once the source is exhausted.
class SampleSource {
 public:
  virtual ~SampleSource() = default;
  virtual const StreamDescriptor& descriptor() const = 0;
  virtual std::optional<Sample> next() = 0;
};

/// Multi-producer, single-consumer multiplexer.
///
/// One producer thread per stream may push concurrently; one consumer calls
/// align_at/release_through. Alignment depends only on the per-stream sample
/// sequences, so any interleaving of producers yields the same frames as long
/// as the consumer waits for ready_for() before aligning a tick.
///
/// Alignment per kind at tick T with budget B:
///   - pose: slerp/lerp between the samples bracketing T
///   - joints: per-element linear interpolation, clamped to the bracket
///   - frame: latest sample at or before T (zero-order hold)
/// A side of the bracket further than B from T is unusable. With one usable
/// side the nearest sample is held; with none the entry is a gap.
class SyncSession {
 public:
  explicit SyncSession(std::size_t buffer_capacity = 1024);
  ~SyncSession();
  SyncSession(const SyncSession&) = delete;
  SyncSession& operator=(const SyncSession&) = delete;

  /// Throws DuplicateId, SessionAlreadyStarted or InvalidArgument.
  StreamHandle register_stream(StreamDescriptor desc);
  void start();
  bool started() const;

  std::vector<StreamDescriptor> roster() const;

  PushStatus push(StreamHandle handle, Sample sample);
  /// Marks the producer as finished; ready_for() no longer waits on it.
  void close(StreamHandle handle);

  SyncedFrame align_at(std::uint64_t tick_index, std::int64_t tick_time) const;

  /// True once every stream has either closed or delivered a sample at or
  /// after tick + staleness budget, so no later push can change align_at(tick).
  bool ready_for(std::int64_t tick_time) const;
  void wait_ready(std::int64_t tick_time) const;

  /// Drops samples no longer needed for ticks after `tick_time`: everything
  /// older than the latest sample at or before it.
  void release_through(std::int64_t tick_time);

  std::size_t buffered(StreamHandle handle) const;
  /// Pushes rejected because the buffer was full.
  std::uint64_t overflow_count(StreamHandle handle) const;

 private:
  struct Stream;

  Stream& stream(StreamHandle handle) const;
  std::optional<StreamValue> align_stream(const Stream& s, std::int64_t tick_time) const;
  void notify();

  std::size_t capacity_;
  std::vector<std::unique_ptr<Stream>> streams_;
  std::atomic<bool> started_{false};
  mutable std::mutex roster_mutex_;
  mutable std::mutex wait_mutex_;
  mutable std::condition_variable wait_cv_;
};

}  // namespace exocap
