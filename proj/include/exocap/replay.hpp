#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "exocap/episode_store.hpp"
#include "exocap/pose.hpp"
#include "exocap/retarget.hpp"

namespace exocap {

struct ActionStep {
  Pose pose;
  HandCommand hand;
};

/// Fixed-rate sequence of end-effector poses and hand commands.
struct ActionChunk {
  double dt = 0.0;                // seconds per step
  std::int64_t start_time_ns = 0;  // time of steps[0]
  std::vector<ActionStep> steps;
};

/// Throws InvalidArgument unless dt > 0, the chunk is non-empty and every hand
/// command has the same length (and is valid for `model` when given).
void validate_chunk(const ActionChunk& chunk, const HandModel* model = nullptr);

struct SafetyEnvelope {
  Eigen::Vector3d workspace_min = Eigen::Vector3d::Constant(-1.0);
  Eigen::Vector3d workspace_max = Eigen::Vector3d::Constant(1.0);
  double max_speed_mps = 1.0;
  double max_joint_delta_rad = 0.5;  // per chunk step

  bool contains(const Eigen::Vector3d& p) const;
};

void validate_envelope(const SafetyEnvelope& envelope);

/// Envelope text:
///
///   workspace_min: <x> <y> <z>
///   workspace_max: <x> <y> <z>
///   max_speed_mps: <v>
///   max_joint_delta_rad: <d>
SafetyEnvelope load_envelope(std::string_view text);

class RobotSink {
 public:
  virtual ~RobotSink() = default;
  /// Returns false to refuse the command; replay stops there.
  virtual bool accept(std::int64_t tick_time_ns, const Pose& pose, const HandCommand& hand) = 0;
};

struct EmittedSample {
  std::int64_t tick_time_ns = 0;
  Pose pose;
  HandCommand hand;
};

class RecordingSink final : public RobotSink {
 public:
  bool accept(std::int64_t tick_time_ns, const Pose& pose, const HandCommand& hand) override;
  const std::vector<EmittedSample>& samples() const { return samples_; }
  void clear() { samples_.clear(); }

 private:
  std::vector<EmittedSample> samples_;
};

/// One text line per command: time, translation, quaternion (w x y z), joints.
class LoggingSink final : public RobotSink {
 public:
  explicit LoggingSink(std::ostream& out) : out_(out) {}
  bool accept(std::int64_t tick_time_ns, const Pose& pose, const HandCommand& hand) override;

 private:
  std::ostream& out_;
};

enum class AbortReason { workspace, speed, joint_delta, sink_refused };

std::string_view to_string(AbortReason reason) noexcept;

struct SafetyAbort {
  std::size_t step = 0;
  AbortReason reason = AbortReason::workspace;
};

struct ReplayReport {
  std::size_t emitted_steps = 0;    // chunk steps delivered
  std::size_t emitted_samples = 0;  // including interpolated samples
  std::optional<SafetyAbort> abort;
};

/// Streams `chunk` into `sink`. Each step interval is split into
/// ceil(output_rate · dt) equal sub-steps (poses slerped, joints lerped), so
/// output_rate = 1/dt emits the steps themselves. Before the samples leading
/// up to step k are emitted, all of them are checked against the envelope:
/// workspace box per sample, translational speed between consecutive samples,
/// and the joint delta from step k−1 to k. On violation nothing from that
/// interval is emitted and the report carries SafetyAbort{k, reason}, so
/// emitted_steps == k.
ReplayReport stream_chunk(const ActionChunk& chunk, const SafetyEnvelope& envelope, RobotSink& sink,
                          double output_rate_hz);

/// Jump from prev's last step to next's first step, judged over prev.dt.
/// Returns the violated limit, if any.
std::optional<AbortReason> seam_violation(const ActionChunk& prev, const ActionChunk& next,
                                          const SafetyEnvelope& envelope);
/// Throws SeamViolation naming the limit.
void continuity_check(const ActionChunk& prev, const ActionChunk& next, const SafetyEnvelope& envelope);

struct ReplayPolicyOptions {
  std::size_t chunk_length = 30;
  std::string pose_stream = "ee_pose";
  std::string hand_stream = "hand";
};

/// Stand-in for a learned policy: cuts the recorded pose and hand streams into
/// consecutive chunks of `chunk_length` steps at the episode tick rate.
/// Throws GapInActions on a gap marker (or a missing tick) in either stream.
std::vector<ActionChunk> replay_policy(const EpisodeMeta& meta, std::span<const EpisodeRecord> records,
                                       const ReplayPolicyOptions& options = {});

}  // namespace exocap
