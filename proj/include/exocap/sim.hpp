#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "exocap/pose.hpp"
#include "exocap/retarget.hpp"
#include "exocap/stream_sync.hpp"

namespace exocap::sim {

struct GloveChannel {
  double amplitude = 0.5;  // rad
  double frequency_hz = 0.5;
  double phase_rad = 0.0;
  double offset_rad = 0.5;

  double at(double t) const;
};

/// Frames are missing for stream `stream_id` over [start_s, end_s).
struct FrameStall {
  std::string stream_id;
  double start_s = 0.0;
  double end_s = 0.0;
};

struct SimScenario {
  double duration_s = 3.0;
  double tick_rate_hz = 30.0;
  std::uint64_t seed = 1;
  std::string task = "sim-task";
  std::string operator_id = "sim";
  bool success = true;

  // SLAM path: circular arc in the xy plane around `slam_center`, heading
  // rotating about z at `slam_angular_rate`.
  double slam_rate_hz = 200.0;
  Eigen::Vector3d slam_center{0.3, 0.0, 0.2};
  double slam_radius_m = 0.1;
  double slam_angular_rate = 0.5;  // rad/s
  double slam_noise_t = 0.0;       // σ per axis, meters
  double slam_noise_r = 0.0;       // σ per axis, radians
  Pose calibration;                // T_calib applied to recorded poses

  double glove_rate_hz = 120.0;
  std::vector<GloveChannel> glove;

  HandModel hand;
  std::vector<std::size_t> assignment;

  double camera_rate_hz = 30.0;
  std::vector<std::string> cameras{"cam_wrist", "cam_left", "cam_right"};
  std::uint32_t frame_width = 16;
  std::uint32_t frame_height = 12;
  std::vector<FrameStall> stalls;

  std::size_t tick_count() const;
};

/// Throws InvalidArgument when a field breaks its invariants.
void validate(const SimScenario& scenario);

/// Scenario text (`key: value` lines):
///
///   duration_s, tick_rate_hz, seed, task, operator, success
///   slam_rate_hz, slam_center (x y z), slam_radius_m, slam_angular_rate,
///   slam_noise_t, slam_noise_r, calibration (tx ty tz qw qx qy qz)
///   glove_rate_hz, glove_channel (amplitude frequency phase [offset]; repeat)
///   hand (path, relative to `base_dir`), assignment (indices)
///   camera_rate_hz, camera (id; repeat, replaces the default three),
///   frame_size (w h), frame_stall (id start_s end_s; repeat)
SimScenario parse_scenario(std::string_view text, const std::filesystem::path& base_dir);
SimScenario load_scenario(const std::filesystem::path& path);

/// Noise-free SLAM pose on the scenario path at time t.
Pose slam_path_pose(const SimScenario& scenario, double t);

/// Sample k of a stream at `rate_hz` sits at round(k · 1e9 / rate_hz) ns.
std::int64_t sample_time_ns(std::uint64_t k, double rate_hz);

/// The gray8 test pattern for frame k of camera `camera_index`.
FrameBlob make_frame(const SimScenario& scenario, std::size_t camera_index, std::uint64_t k);

/// Sources in registration order: slam, glove, then one per camera. Each is
/// a pure function of the scenario; noise comes from a per-stream generator
/// seeded from (seed, stream index).
std::vector<std::unique_ptr<SampleSource>> make_sources(const SimScenario& scenario);

/// Stream ids of the recorded episode.
inline constexpr const char* kPoseStream = "ee_pose";
inline constexpr const char* kHandStream = "hand";

enum class DriveMode { sequential, concurrent };

struct PipelineConfig {
  std::filesystem::path root;
  std::string episode_name;   // empty: first free episode_NNNN
  DriveMode mode = DriveMode::sequential;
  std::size_t buffer_capacity = 1024;
  std::string start_time;     // empty: current UTC time
};

/// Drives the scenario's sources through a SyncSession, calibrates poses and
/// retargets glove frames per tick, and records the episode. Returns the
/// episode directory.
std::filesystem::path run_scenario(const SimScenario& scenario, const PipelineConfig& config);

/// Current UTC wall-clock time; used only for manifest start_time.
std::string utc_now_iso8601();

}  // namespace exocap::sim

namespace exocap::sim {

/// One task of a synthetic statistics dataset.
struct TaskDatasetSpec {
  std::string task;
  double mean_duration_s = 0.0;
  double stddev_duration_s = 0.0;
  std::size_t successes = 0;
  std::size_t trials = 0;
};

/// Writes `trials` single-stream episodes for the task whose durations have
/// the requested sample mean and standard deviation up to tick quantization
/// (1 / tick_rate_hz). The first `successes` episodes are flagged successful.
std::vector<std::filesystem::path> synthesize_task_episodes(const std::filesystem::path& root,
                                                            const TaskDatasetSpec& spec, std::uint64_t seed,
                                                            double tick_rate_hz = 30.0);

/// The four rows of the data-collection results table: pick-place, sort six
/// bottles, hammer manipulation, wipe whiteboard (n = 30 each).
std::vector<TaskDatasetSpec> collection_table_rows();

}  // namespace exocap::sim
