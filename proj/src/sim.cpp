#include "exocap/sim.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <numbers>
#include <random>
#include <thread>

#include "exocap/calibration.hpp"
#include "exocap/episode_store.hpp"
#include "exocap/error.hpp"
#include "exocap/kv_text.hpp"
#include "exocap/le_io.hpp"

namespace exocap::sim {

namespace fs = std::filesystem;

double GloveChannel::at(double t) const {
  return offset_rad + amplitude * std::sin(2.0 * std::numbers::pi * frequency_hz * t + phase_rad);
}

std::size_t SimScenario::tick_count() const {
  return static_cast<std::size_t>(std::llround(duration_s * tick_rate_hz));
}

void validate(const SimScenario& s) {
  auto positive = [](double v) { return v > 0.0 && std::isfinite(v); };
  if (!positive(s.duration_s)) fail(ErrorCode::InvalidArgument, "duration must be positive");
  if (!positive(s.tick_rate_hz) || !positive(s.slam_rate_hz) || !positive(s.glove_rate_hz) ||
      !positive(s.camera_rate_hz)) {
    fail(ErrorCode::InvalidArgument, "rates must be positive");
  }
  if (!(s.slam_noise_t >= 0.0) || !(s.slam_noise_r >= 0.0)) fail(ErrorCode::InvalidArgument, "noise σ must be >= 0");
  if (s.glove.empty()) fail(ErrorCode::InvalidArgument, "scenario needs at least one glove channel");
  if (s.hand.joints.empty()) fail(ErrorCode::InvalidArgument, "scenario needs a hand model");
  if (s.assignment.size() != s.hand.dof()) fail(ErrorCode::InvalidArgument, "assignment length must equal hand DOF");
  for (auto a : s.assignment) {
    if (a >= s.glove.size()) fail(ErrorCode::SourceIndexOutOfRange, "assignment refers to a missing glove channel");
  }
  if (s.frame_width == 0 || s.frame_height == 0) fail(ErrorCode::InvalidArgument, "frame size must be positive");
  for (const auto& stall : s.stalls) {
    if (std::find(s.cameras.begin(), s.cameras.end(), stall.stream_id) == s.cameras.end()) {
      fail(ErrorCode::InvalidArgument, "stall refers to unknown camera '" + stall.stream_id + "'");
    }
  }
}

SimScenario parse_scenario(std::string_view text, const fs::path& base_dir) {
  const KvDocument doc = KvDocument::parse(text);
  SimScenario s;
  bool cameras_given = false;
  for (const auto& e : doc.entries()) {
    const auto nums = [&](std::size_t lo, std::size_t hi) {
      auto v = e.numbers();
      if (v.size() < lo || v.size() > hi) {
        fail(ErrorCode::ParseError, "line " + std::to_string(e.line) + ": wrong number of values for '" + e.key + "'");
      }
      return v;
    };
    const auto& k = e.key;
    if (k == "duration_s") s.duration_s = nums(1, 1)[0];
    else if (k == "tick_rate_hz") s.tick_rate_hz = nums(1, 1)[0];
    else if (k == "seed") s.seed = parse_uint(e.value, e.line);
    else if (k == "task") s.task = e.value;
    else if (k == "operator") s.operator_id = e.value;
    else if (k == "success") s.success = parse_bool(e.value, e.line);
    else if (k == "slam_rate_hz") s.slam_rate_hz = nums(1, 1)[0];
    else if (k == "slam_center") {
      const auto v = nums(3, 3);
      s.slam_center = {v[0], v[1], v[2]};
    } else if (k == "slam_radius_m") s.slam_radius_m = nums(1, 1)[0];
    else if (k == "slam_angular_rate") s.slam_angular_rate = nums(1, 1)[0];
    else if (k == "slam_noise_t") s.slam_noise_t = nums(1, 1)[0];
    else if (k == "slam_noise_r") s.slam_noise_r = nums(1, 1)[0];
    else if (k == "calibration") {
      const auto v = nums(7, 7);
      s.calibration.translation = {v[0], v[1], v[2]};
      s.calibration.rotation = Eigen::Quaterniond(v[3], v[4], v[5], v[6]).normalized();
    } else if (k == "glove_rate_hz") s.glove_rate_hz = nums(1, 1)[0];
    else if (k == "glove_channel") {
      const auto v = nums(3, 4);
      s.glove.push_back({v[0], v[1], v[2], v.size() == 4 ? v[3] : 0.5});
    } else if (k == "hand") {
      fs::path p = e.value;
      if (p.is_relative()) p = base_dir / p;
      s.hand = load_hand_model_file(p.string());
    } else if (k == "assignment") {
      s.assignment.clear();
      for (const auto& tok : e.tokens()) s.assignment.push_back(parse_uint(tok, e.line));
    } else if (k == "camera_rate_hz") s.camera_rate_hz = nums(1, 1)[0];
    else if (k == "camera") {
      if (!cameras_given) s.cameras.clear();
      cameras_given = true;
      s.cameras.push_back(e.value);
    } else if (k == "frame_size") {
      const auto tok = e.tokens();
      if (tok.size() != 2) fail(ErrorCode::ParseError, "line " + std::to_string(e.line) + ": expected 'frame_size: w h'");
      s.frame_width = static_cast<std::uint32_t>(parse_uint(tok[0], e.line));
      s.frame_height = static_cast<std::uint32_t>(parse_uint(tok[1], e.line));
    } else if (k == "frame_stall") {
      const auto tok = e.tokens();
      if (tok.size() != 3) {
        fail(ErrorCode::ParseError, "line " + std::to_string(e.line) + ": expected 'frame_stall: id start end'");
      }
      s.stalls.push_back({tok[0], parse_double(tok[1], e.line), parse_double(tok[2], e.line)});
    } else {
      fail(ErrorCode::ParseError, "line " + std::to_string(e.line) + ": unknown scenario key '" + k + "'");
    }
  }
  validate(s);
  return s;
}

SimScenario load_scenario(const fs::path& path) {
  return parse_scenario(read_text_file(path.string()), path.parent_path());
}

Pose slam_path_pose(const SimScenario& s, double t) {
  const double theta = s.slam_angular_rate * t;
  const Eigen::Vector3d position =
      s.slam_center + s.slam_radius_m * Eigen::Vector3d(std::cos(theta), std::sin(theta), 0.0);
  return Pose::from_axis_angle(Eigen::Vector3d::UnitZ(), theta, position);
}

std::int64_t sample_time_ns(std::uint64_t k, double rate_hz) {
  return std::llround(static_cast<double>(k) * 1.0e9 / rate_hz);
}

FrameBlob make_frame(const SimScenario& s, std::size_t camera_index, std::uint64_t k) {
  FrameBlob f;
  f.encoding = kEncodingGray8;
  f.width = s.frame_width;
  f.height = s.frame_height;
  const auto fill = static_cast<std::byte>((k * 7 + camera_index * 31) & 0xFF);
  f.data.assign(static_cast<std::size_t>(f.width) * f.height, fill);
  if (f.data.size() >= 8) {
    std::vector<std::byte> stamp;
    le::put(stamp, static_cast<std::uint64_t>(k));
    std::copy(stamp.begin(), stamp.end(), f.data.begin());
  }
  return f;
}

namespace {

std::mt19937_64 stream_rng(std::uint64_t seed, std::uint64_t stream_index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream_index)};
  return std::mt19937_64(seq);
}

/// Emits samples k = 0, 1, ... while their time is within the scenario.
class TimedSource : public SampleSource {
 public:
  TimedSource(StreamDescriptor desc, std::int64_t end_ns) : desc_(std::move(desc)), end_ns_(end_ns) {}
  const StreamDescriptor& descriptor() const override { return desc_; }

  std::optional<Sample> next() override {
    while (true) {
      const auto t = sample_time_ns(k_, desc_.nominal_rate_hz);
      if (t > end_ns_) return std::nullopt;
      const auto k = k_++;
      if (auto value = make(k, t)) return Sample{t, std::move(*value)};
    }
  }

 protected:
  virtual std::optional<StreamValue> make(std::uint64_t k, std::int64_t t_ns) = 0;

 private:
  StreamDescriptor desc_;
  std::int64_t end_ns_;
  std::uint64_t k_ = 0;
};

class SlamSource final : public TimedSource {
 public:
  SlamSource(const SimScenario& s, std::int64_t end_ns)
      : TimedSource(StreamDescriptor::make("slam", StreamKind::pose, s.slam_rate_hz), end_ns),
        scenario_(s),
        rng_(stream_rng(s.seed, 0)) {}

 protected:
  std::optional<StreamValue> make(std::uint64_t, std::int64_t t_ns) override {
    Pose p = slam_path_pose(scenario_, static_cast<double>(t_ns) * 1e-9);
    if (scenario_.slam_noise_t > 0.0) {
      std::normal_distribution<double> n(0.0, scenario_.slam_noise_t);
      p.translation += Eigen::Vector3d(n(rng_), n(rng_), n(rng_));
    }
    if (scenario_.slam_noise_r > 0.0) {
      std::normal_distribution<double> n(0.0, scenario_.slam_noise_r);
      const Eigen::Vector3d w(n(rng_), n(rng_), n(rng_));
      if (w.norm() > 0.0) p = compose(p, Pose::from_axis_angle(w, w.norm()));
    }
    return p;
  }

 private:
  const SimScenario& scenario_;
  std::mt19937_64 rng_;
};

class GloveSource final : public TimedSource {
 public:
  GloveSource(const SimScenario& s, std::int64_t end_ns)
      : TimedSource(StreamDescriptor::make("glove", StreamKind::joints, s.glove_rate_hz,
                                           static_cast<std::uint32_t>(s.glove.size())),
                    end_ns),
        scenario_(s) {}

 protected:
  std::optional<StreamValue> make(std::uint64_t, std::int64_t t_ns) override {
    const double t = static_cast<double>(t_ns) * 1e-9;
    JointVector v;
    v.reserve(scenario_.glove.size());
    for (const auto& ch : scenario_.glove) v.push_back(ch.at(t));
    return v;
  }

 private:
  const SimScenario& scenario_;
};

class CameraSource final : public TimedSource {
 public:
  CameraSource(const SimScenario& s, std::size_t index, std::int64_t end_ns)
      : TimedSource(StreamDescriptor::make(s.cameras[index], StreamKind::frame, s.camera_rate_hz), end_ns),
        scenario_(s),
        index_(index) {}

 protected:
  std::optional<StreamValue> make(std::uint64_t k, std::int64_t t_ns) override {
    const double t = static_cast<double>(t_ns) * 1e-9;
    for (const auto& stall : scenario_.stalls) {
      if (stall.stream_id == scenario_.cameras[index_] && t >= stall.start_s && t < stall.end_s) return std::nullopt;
    }
    return make_frame(scenario_, index_, k);
  }

 private:
  const SimScenario& scenario_;
  std::size_t index_;
};

struct Recorder {
  const SimScenario& scenario;
  SyncSession& session;
  EpisodeWriter& writer;
  RetargetMap map;
  std::size_t next_tick = 0;

  bool done() const { return next_tick >= scenario.tick_count(); }
  std::int64_t next_time() const { return tick_time_ns(next_tick, scenario.tick_rate_hz); }

  void record_one() {
    const auto t = next_time();
    SyncedFrame frame = session.align_at(next_tick, t);
    session.release_through(t);
    if (auto& slam = frame.entries[0]) slam = apply_calibration(scenario.calibration, std::get<Pose>(*slam));
    if (auto& glove = frame.entries[1]) {
      glove = retarget(GloveFrame{std::get<JointVector>(*glove)}, map, scenario.hand).angles;
    }
    writer.append(frame);
    ++next_tick;
  }
};

void drive_sequential(std::vector<std::unique_ptr<SampleSource>>& sources, std::vector<StreamHandle>& handles,
                      SyncSession& session, Recorder& recorder) {
  std::vector<std::optional<Sample>> pending(sources.size());
  std::vector<bool> open(sources.size(), true);
  for (std::size_t i = 0; i < sources.size(); ++i) pending[i] = sources[i]->next();

  auto drain = [&] {
    while (!recorder.done() && session.ready_for(recorder.next_time())) recorder.record_one();
  };
  while (true) {
    std::optional<std::size_t> pick;
    for (std::size_t i = 0; i < sources.size(); ++i) {
      if (pending[i] && (!pick || pending[i]->timestamp_ns < pending[*pick]->timestamp_ns)) pick = i;
    }
    for (std::size_t i = 0; i < sources.size(); ++i) {
      if (!pending[i] && open[i]) {
        session.close(handles[i]);
        open[i] = false;
      }
    }
    if (!pick) break;
    const auto i = *pick;
    auto status = session.push(handles[i], *pending[i]);
    if (status == PushStatus::buffer_full) {
      drain();
      status = session.push(handles[i], *pending[i]);
    }
    if (status != PushStatus::accepted) {
      fail(ErrorCode::InvalidArgument, "stream '" + sources[i]->descriptor().stream_id + "' rejected a sample: " +
                                           std::string(to_string(status)));
    }
    pending[i] = sources[i]->next();
    drain();
  }
  drain();
}

void drive_concurrent(std::vector<std::unique_ptr<SampleSource>>& sources, std::vector<StreamHandle>& handles,
                      SyncSession& session, Recorder& recorder) {
  std::atomic<bool> abort{false};
  std::vector<std::string> producer_errors(sources.size());
  {
    std::vector<std::jthread> producers;
    for (std::size_t i = 0; i < sources.size(); ++i) {
      producers.emplace_back([&, i] {
        while (auto sample = sources[i]->next()) {
          PushStatus status;
          while ((status = session.push(handles[i], *sample)) == PushStatus::buffer_full && !abort) {
            std::this_thread::yield();
          }
          if (abort) break;
          if (status != PushStatus::accepted) {
            producer_errors[i] = std::string(to_string(status));
            break;
          }
        }
        session.close(handles[i]);
      });
    }
    try {
      while (!recorder.done()) {
        session.wait_ready(recorder.next_time());
        recorder.record_one();
      }
    } catch (...) {
      abort = true;
      throw;
    }
  }
  for (std::size_t i = 0; i < sources.size(); ++i) {
    if (!producer_errors[i].empty()) {
      fail(ErrorCode::InvalidArgument, "stream '" + sources[i]->descriptor().stream_id + "' rejected a sample: " +
                                           producer_errors[i]);
    }
  }
}

}  // namespace

std::vector<std::unique_ptr<SampleSource>> make_sources(const SimScenario& scenario) {
  const auto end_ns = std::llround(scenario.duration_s * 1.0e9);
  std::vector<std::unique_ptr<SampleSource>> out;
  out.push_back(std::make_unique<SlamSource>(scenario, end_ns));
  out.push_back(std::make_unique<GloveSource>(scenario, end_ns));
  for (std::size_t c = 0; c < scenario.cameras.size(); ++c) {
    out.push_back(std::make_unique<CameraSource>(scenario, c, end_ns));
  }
  return out;
}

std::string utc_now_iso8601() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

fs::path run_scenario(const SimScenario& scenario, const PipelineConfig& config) {
  validate(scenario);
  auto sources = make_sources(scenario);

  SyncSession session(config.buffer_capacity);
  std::vector<StreamHandle> handles;
  for (const auto& src : sources) handles.push_back(session.register_stream(src->descriptor()));
  session.start();

  GloveFrame open;
  GloveFrame closed;
  for (const auto& ch : scenario.glove) {
    open.angles.push_back(ch.offset_rad - ch.amplitude);
    closed.angles.push_back(ch.offset_rad + ch.amplitude);
  }

  EpisodeMeta meta;
  meta.task_name = scenario.task;
  meta.operator_id = scenario.operator_id;
  meta.start_time = config.start_time.empty() ? utc_now_iso8601() : config.start_time;
  meta.success = scenario.success;
  meta.tick_rate_hz = scenario.tick_rate_hz;
  meta.roster.push_back(StreamDescriptor::make(kPoseStream, StreamKind::pose, scenario.slam_rate_hz));
  meta.roster.push_back(StreamDescriptor::make(kHandStream, StreamKind::joints, scenario.glove_rate_hz,
                                               static_cast<std::uint32_t>(scenario.hand.dof())));
  for (std::size_t i = 2; i < sources.size(); ++i) meta.roster.push_back(sources[i]->descriptor());

  EpisodeWriter writer = EpisodeWriter::begin(meta, config.root, config.episode_name);
  Recorder recorder{scenario, session, writer,
                    calibrate_map(open, closed, scenario.assignment, scenario.hand)};
  if (config.mode == DriveMode::concurrent) {
    drive_concurrent(sources, handles, session, recorder);
  } else {
    drive_sequential(sources, handles, session, recorder);
  }
  writer.finalize();
  return writer.path();
}

}  // namespace exocap::sim

namespace exocap::sim {

std::vector<TaskDatasetSpec> collection_table_rows() {
  return {
      {"pick-place", 4.8, 0.9, 29, 30},
      {"sort-bottles", 41.8, 7.8, 27, 30},
      {"hammer", 12.4, 3.3, 28, 30},
      {"wipe-whiteboard", 12.9, 2.1, 27, 30},
  };
}

std::vector<fs::path> synthesize_task_episodes(const fs::path& root, const TaskDatasetSpec& spec, std::uint64_t seed,
                                               double tick_rate_hz) {
  if (spec.trials == 0 || spec.successes > spec.trials) fail(ErrorCode::InvalidArgument, "bad trial counts");
  std::mt19937_64 rng = stream_rng(seed, 0);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> z(spec.trials);
  for (auto& v : z) v = normal(rng);

  // Standardize to exact sample mean 0 / sd 1, then scale.
  std::vector<double> durations(spec.trials, spec.mean_duration_s);
  if (spec.trials > 1) {
    double mean = 0.0;
    for (double v : z) mean += v;
    mean /= static_cast<double>(z.size());
    double ss = 0.0;
    for (double v : z) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / static_cast<double>(z.size() - 1));
    for (std::size_t i = 0; i < z.size(); ++i) {
      durations[i] = spec.mean_duration_s + spec.stddev_duration_s * (z[i] - mean) / sd;
    }
  }

  std::vector<fs::path> paths;
  for (std::size_t i = 0; i < spec.trials; ++i) {
    const auto intervals = static_cast<std::uint64_t>(std::max<long long>(0, std::llround(durations[i] * tick_rate_hz)));
    EpisodeMeta meta;
    meta.task_name = spec.task;
    meta.operator_id = "synthetic";
    meta.start_time = "1970-01-01T00:00:00Z";
    meta.success = i < spec.successes;
    meta.tick_rate_hz = tick_rate_hz;
    meta.roster.push_back(StreamDescriptor::make(kPoseStream, StreamKind::pose, tick_rate_hz));
    char name[96];
    std::snprintf(name, sizeof(name), "%s_%03zu", spec.task.c_str(), i);
    EpisodeWriter writer = EpisodeWriter::begin(meta, root, name);
    for (std::uint64_t k = 0; k <= intervals; ++k) {
      SyncedFrame frame;
      frame.tick_index = k;
      frame.tick_time_ns = tick_time_ns(k, tick_rate_hz);
      frame.entries.emplace_back(Pose::from_translation({0.001 * static_cast<double>(k), 0.0, 0.0}));
      writer.append(frame);
    }
    writer.finalize();
    paths.push_back(writer.path());
  }
  return paths;
}

}  // namespace exocap::sim
