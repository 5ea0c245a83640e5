#include "exocap/stream_sync.hpp"

#include <algorithm>
#include <cmath>

#include "exocap/error.hpp"

namespace exocap {

std::string_view to_string(StreamKind kind) noexcept {
  switch (kind) {
    case StreamKind::pose: return "pose";
    case StreamKind::joints: return "joints";
    case StreamKind::frame: return "frame";
  }
  return "unknown";
}

std::optional<StreamKind> parse_stream_kind(std::string_view text) noexcept {
  if (text == "pose") return StreamKind::pose;
  if (text == "joints") return StreamKind::joints;
  if (text == "frame") return StreamKind::frame;
  return std::nullopt;
}

std::string_view to_string(PushStatus status) noexcept {
  switch (status) {
    case PushStatus::accepted: return "accepted";
    case PushStatus::non_monotonic_timestamp: return "NonMonotonicTimestamp";
    case PushStatus::kind_mismatch: return "KindMismatch";
    case PushStatus::size_mismatch: return "SizeMismatch";
    case PushStatus::buffer_full: return "BufferFull";
    case PushStatus::not_started: return "NotStarted";
    case PushStatus::stream_closed: return "StreamClosed";
  }
  return "unknown";
}

StreamDescriptor StreamDescriptor::make(std::string id, StreamKind kind, double rate_hz, std::uint32_t channels) {
  StreamDescriptor d;
  d.stream_id = std::move(id);
  d.kind = kind;
  d.nominal_rate_hz = rate_hz;
  d.staleness_budget_ns = rate_hz > 0.0 ? std::llround(2.0e9 / rate_hz) : 0;
  d.channels = channels;
  return d;
}

void validate_descriptor(const StreamDescriptor& desc) {
  if (desc.stream_id.empty()) fail(ErrorCode::InvalidArgument, "stream id must not be empty");
  for (char c : desc.stream_id) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' || c == '-';
    if (!ok) fail(ErrorCode::InvalidArgument, "stream id '" + desc.stream_id + "' has invalid characters");
  }
  if (!(desc.nominal_rate_hz > 0.0) || !std::isfinite(desc.nominal_rate_hz)) {
    fail(ErrorCode::InvalidArgument, "stream '" + desc.stream_id + "' needs a positive nominal rate");
  }
  if (desc.staleness_budget_ns <= 0) {
    fail(ErrorCode::InvalidArgument, "stream '" + desc.stream_id + "' needs a positive staleness budget");
  }
  if (desc.kind == StreamKind::joints && desc.channels == 0) {
    fail(ErrorCode::InvalidArgument, "joint stream '" + desc.stream_id + "' needs a channel count");
  }
}

StreamKind kind_of(const StreamValue& value) noexcept {
  return static_cast<StreamKind>(value.index());
}

std::size_t SyncedFrame::gap_count() const {
  return static_cast<std::size_t>(std::count(entries.begin(), entries.end(), std::nullopt));
}

std::int64_t tick_time_ns(std::uint64_t index, double rate_hz, std::int64_t origin_ns) {
  return origin_ns + std::llround(static_cast<double>(index) * 1.0e9 / rate_hz);
}

struct SyncSession::Stream {
  StreamDescriptor desc;
  mutable std::mutex mutex;
  std::deque<Sample> samples;
  std::optional<std::int64_t> last_timestamp;
  bool closed = false;
  std::uint64_t overflow = 0;
};

SyncSession::SyncSession(std::size_t buffer_capacity) : capacity_(buffer_capacity) {
  if (capacity_ == 0) fail(ErrorCode::InvalidArgument, "buffer capacity must be positive");
}

SyncSession::~SyncSession() = default;

StreamHandle SyncSession::register_stream(StreamDescriptor desc) {
  std::lock_guard lock(roster_mutex_);
  if (started_) fail(ErrorCode::SessionAlreadyStarted, "cannot register '" + desc.stream_id + "' after start");
  validate_descriptor(desc);
  for (const auto& s : streams_) {
    if (s->desc.stream_id == desc.stream_id) fail(ErrorCode::DuplicateId, "duplicate stream id '" + desc.stream_id + "'");
  }
  auto s = std::make_unique<Stream>();
  s->desc = std::move(desc);
  streams_.push_back(std::move(s));
  return {streams_.size() - 1};
}

void SyncSession::start() {
  std::lock_guard lock(roster_mutex_);
  if (started_) fail(ErrorCode::SessionAlreadyStarted, "session already started");
  if (streams_.empty()) fail(ErrorCode::InvalidArgument, "no streams registered");
  started_ = true;
}

bool SyncSession::started() const { return started_; }

std::vector<StreamDescriptor> SyncSession::roster() const {
  std::lock_guard lock(roster_mutex_);
  std::vector<StreamDescriptor> out;
  for (const auto& s : streams_) out.push_back(s->desc);
  return out;
}

SyncSession::Stream& SyncSession::stream(StreamHandle handle) const {
  if (handle.index >= streams_.size()) fail(ErrorCode::InvalidArgument, "unknown stream handle");
  return *streams_[handle.index];
}

PushStatus SyncSession::push(StreamHandle handle, Sample sample) {
  if (!started_) return PushStatus::not_started;
  Stream& s = stream(handle);
  if (kind_of(sample.payload) != s.desc.kind) return PushStatus::kind_mismatch;
  if (s.desc.kind == StreamKind::joints && std::get<JointVector>(sample.payload).size() != s.desc.channels) {
    return PushStatus::size_mismatch;
  }
  {
    std::lock_guard lock(s.mutex);
    if (s.closed) return PushStatus::stream_closed;
    if (s.last_timestamp && sample.timestamp_ns <= *s.last_timestamp) return PushStatus::non_monotonic_timestamp;
    if (s.samples.size() >= capacity_) {
      ++s.overflow;
      return PushStatus::buffer_full;
    }
    s.last_timestamp = sample.timestamp_ns;
    s.samples.push_back(std::move(sample));
  }
  notify();
  return PushStatus::accepted;
}

void SyncSession::close(StreamHandle handle) {
  Stream& s = stream(handle);
  {
    std::lock_guard lock(s.mutex);
    s.closed = true;
  }
  notify();
}

void SyncSession::notify() {
  { std::lock_guard lock(wait_mutex_); }
  wait_cv_.notify_all();
}

bool SyncSession::ready_for(std::int64_t tick_time) const {
  for (const auto& s : streams_) {
    std::lock_guard lock(s->mutex);
    if (s->closed) continue;
    if (!s->last_timestamp || *s->last_timestamp < tick_time + s->desc.staleness_budget_ns) return false;
  }
  return true;
}

void SyncSession::wait_ready(std::int64_t tick_time) const {
  std::unique_lock lock(wait_mutex_);
  wait_cv_.wait(lock, [&] { return ready_for(tick_time); });
}

void SyncSession::release_through(std::int64_t tick_time) {
  for (const auto& s : streams_) {
    std::lock_guard lock(s->mutex);
    auto& q = s->samples;
    // Index of the first sample strictly after tick_time.
    const auto after = std::upper_bound(q.begin(), q.end(), tick_time,
                                        [](std::int64_t t, const Sample& x) { return t < x.timestamp_ns; });
    if (after - q.begin() > 1) q.erase(q.begin(), after - 1);
  }
  notify();
}

std::size_t SyncSession::buffered(StreamHandle handle) const {
  const Stream& s = stream(handle);
  std::lock_guard lock(s.mutex);
  return s.samples.size();
}

std::uint64_t SyncSession::overflow_count(StreamHandle handle) const {
  const Stream& s = stream(handle);
  std::lock_guard lock(s.mutex);
  return s.overflow;
}

namespace {

JointVector interpolate_joints(const JointVector& a, const JointVector& b, double u) {
  JointVector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double v = a[i] + u * (b[i] - a[i]);
    out[i] = std::clamp(v, std::min(a[i], b[i]), std::max(a[i], b[i]));
  }
  return out;
}

}  // namespace

std::optional<StreamValue> SyncSession::align_stream(const Stream& s, std::int64_t tick_time) const {
  std::lock_guard lock(s.mutex);
  const auto& q = s.samples;
  const auto budget = s.desc.staleness_budget_ns;
  const auto after = std::upper_bound(q.begin(), q.end(), tick_time,
                                      [](std::int64_t t, const Sample& x) { return t < x.timestamp_ns; });
  const Sample* prev = after == q.begin() ? nullptr : &*(after - 1);
  const Sample* next = after == q.end() ? nullptr : &*after;

  const bool prev_ok = prev != nullptr && tick_time - prev->timestamp_ns <= budget;
  if (s.desc.kind == StreamKind::frame) {
    if (prev_ok) return prev->payload;
    return std::nullopt;
  }
  if (prev_ok && prev->timestamp_ns == tick_time) return prev->payload;

  const bool next_ok = next != nullptr && next->timestamp_ns - tick_time <= budget;
  if (prev_ok && next_ok) {
    const double u = static_cast<double>(tick_time - prev->timestamp_ns) /
                     static_cast<double>(next->timestamp_ns - prev->timestamp_ns);
    if (s.desc.kind == StreamKind::pose) {
      return interpolate(std::get<Pose>(prev->payload), std::get<Pose>(next->payload), u);
    }
    return interpolate_joints(std::get<JointVector>(prev->payload), std::get<JointVector>(next->payload), u);
  }
  if (prev_ok) return prev->payload;
  if (next_ok) return next->payload;
  return std::nullopt;
}

SyncedFrame SyncSession::align_at(std::uint64_t tick_index, std::int64_t tick_time) const {
  SyncedFrame frame;
  frame.tick_index = tick_index;
  frame.tick_time_ns = tick_time;
  frame.entries.reserve(streams_.size());
  for (const auto& s : streams_) frame.entries.push_back(align_stream(*s, tick_time));
  return frame;
}

}  // namespace exocap
