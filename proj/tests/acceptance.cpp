// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>

#include "exocap/calibration.hpp"
#include "exocap/episode_store.hpp"
#include "exocap/kv_text.hpp"
#include "exocap/replay.hpp"
#include "exocap/retarget.hpp"
#include "exocap/sim.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace exocap;
namespace fs = std::filesystem;

namespace {

const fs::path kFixtures = EXOCAP_FIXTURES;

struct Outcome {
  bool pass = true;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double percentile95(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const double pos = 0.95 * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(pos);
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

std::pair<double, double> calib_error(const Pose& got, const Pose& want) {
  const double dt = (got.translation - want.translation).norm();
  const auto [angle, axis] =
      oracle::log_rotation(want.rotation.toRotationMatrix().transpose() * got.rotation.toRotationMatrix());
  return {dt, angle};
}

Outcome calibration_recovery() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(1001);
  double worst_t = 0, worst_r = 0;
  for (int trial = 0; trial < 10; ++trial) {
    const Pose truth = oracle::random_pose(rng, 1.0);
    const auto pairs = oracle::make_pairs(truth, 100, rng);
    const auto [et, er] = calib_error(estimate_calibration(pairs).calib, truth);
    worst_t = std::max(worst_t, et);
    worst_r = std::max(worst_r, er);
  }
  const double deg = std::numbers::pi / 180.0;
  std::vector<double> noisy_t, noisy_r;
  for (int trial = 0; trial < 50; ++trial) {
    std::mt19937_64 trial_rng(2000 + trial);
    const Pose truth = oracle::random_pose(trial_rng, 1.0);
    const auto pairs = oracle::make_pairs(truth, 100, trial_rng, 1e-3, 0.5 * deg);
    const auto [et, er] = calib_error(estimate_calibration(pairs).calib, truth);
    noisy_t.push_back(et);
    noisy_r.push_back(er);
  }
  const double p95_t = percentile95(noisy_t);
  const double p95_r = percentile95(noisy_r);
  const double elapsed = seconds_since(t0);
  Outcome o;
  o.pass = worst_t <= 1e-9 && worst_r <= 1e-9 && p95_t <= 1e-3 && p95_r <= 0.2 * deg && elapsed < 1.0;
  o.detail = fmt("noise-free max %.2e m %.2e rad; noisy p95 %.3e m %.4f deg; %.3f s", worst_t, worst_r, p95_t,
                 p95_r / deg, elapsed);
  return o;
}

Outcome end_to_end_fidelity() {
  const auto t0 = std::chrono::steady_clock::now();
  TempDir tmp("exocap_acc");
  auto scenario = sim::load_scenario(kFixtures / "scenarios/pick_place_3s.scn");
  sim::PipelineConfig cfg;
  cfg.root = tmp.path();
  cfg.mode = sim::DriveMode::concurrent;
  const auto path = sim::run_scenario(scenario, cfg);

  auto reader = load_episode(path);
  std::vector<EpisodeRecord> records;
  while (auto r = reader.next()) records.push_back(std::move(*r));
  const auto chunks = replay_policy(reader.meta(), records);

  SafetyEnvelope env = load_envelope(read_text_file((kFixtures / "envelopes/desk.env").string()));
  RecordingSink sink;
  for (const auto& chunk : chunks) {
    const auto report = stream_chunk(chunk, env, sink, reader.meta().tick_rate_hz);
    if (report.abort) return {false, "unexpected abort"};
  }

  // Reference: the generating functions run through calibration and retargeting directly.
  GloveFrame open, closed;
  for (const auto& ch : scenario.glove) {
    open.angles.push_back(ch.offset_rad - ch.amplitude);
    closed.angles.push_back(ch.offset_rad + ch.amplitude);
  }
  const auto map = calibrate_map(open, closed, scenario.assignment, scenario.hand);
  std::size_t mismatches = 0;
  const auto& out = sink.samples();
  if (records.size() != 90 || out.size() != 90) return {false, fmt("%zu records, %zu samples", records.size(), out.size())};
  double worst_pose = 0;
  for (std::size_t i = 0; i < 90; ++i) {
    const auto& rec_pose = std::get<Pose>(*records[i].entries[0]);
    const auto& rec_hand = std::get<JointVector>(*records[i].entries[1]);
    if (!(out[i].pose == rec_pose) || out[i].hand.angles != rec_hand) ++mismatches;
    if (out[i].tick_time_ns != records[i].tick_time_ns) ++mismatches;
    const double t = static_cast<double>(records[i].tick_time_ns) * 1e-9;
    const Pose want = apply_calibration(scenario.calibration, sim::slam_path_pose(scenario, t));
    worst_pose = std::max(worst_pose, (want.translation - out[i].pose.translation).norm());
    const auto hand = retarget(GloveFrame{[&] {
                                 std::vector<double> g;
                                 for (const auto& ch : scenario.glove) g.push_back(ch.at(t));
                                 return g;
                               }()},
                               map, scenario.hand);
    for (std::size_t j = 0; j < hand.angles.size(); ++j) {
      if (std::abs(hand.angles[j] - out[i].hand.angles[j]) > 2e-4) ++mismatches;
    }
  }
  const double elapsed = seconds_since(t0);
  Outcome o;
  o.pass = mismatches == 0 && worst_pose < 1e-6 && elapsed < 5.0;
  o.detail = fmt("90/90 steps, %zu mismatches, path error %.1e m, %.3f s", mismatches, worst_pose, elapsed);
  return o;
}

Outcome table_arithmetic() {
  TempDir tmp("exocap_acc");
  Outcome o;
  std::uint64_t seed = 1;
  for (const auto& row : sim::collection_table_rows()) {
    sim::synthesize_task_episodes(tmp.path(), row, seed++);
  }
  const auto index = build_index(tmp.path(), true);
  for (const auto& row : sim::collection_table_rows()) {
    const auto s = task_stats(index, row.task);
    const bool ok = std::abs(s.mean_duration_s - row.mean_duration_s) <= 0.05 &&
                    std::abs(s.stddev_duration_s - row.stddev_duration_s) <= 0.05 && s.successes == row.successes &&
                    s.trials == row.trials;
    o.pass = o.pass && ok;
    o.detail += (o.detail.empty() ? "" : "; ") + row.task + " " + format_task_stats(s);
  }
  return o;
}

Outcome interpolation_oracle() {
  std::mt19937_64 rng(4004);
  double worst = 0;
  for (int i = 0; i < 1000; ++i) {
    const Pose a = oracle::random_pose(rng, 2.0);
    const Pose b = oracle::random_pose(rng, 2.0);
    const Eigen::Matrix3d Ra = a.rotation.toRotationMatrix();
    const Eigen::Matrix3d Rb = b.rotation.toRotationMatrix();
    for (double u : {0.0, 0.25, 0.5, 1.0}) {
      const Pose got = interpolate(a, b, u);
      const Eigen::Matrix3d want_R = oracle::slerp_matrix(Ra, Rb, u);
      const Eigen::Vector3d want_t = (1 - u) * a.translation + u * b.translation;
      worst = std::max(worst, oracle::rotation_gap(got.rotation.toRotationMatrix(), want_R));
      worst = std::max(worst, (got.translation - want_t).norm());
    }
  }
  return {worst <= 1e-9, fmt("4000 evaluations, max error %.2e", worst)};
}

Outcome retarget_fuzz() {
  std::mt19937_64 rng(5005);
  std::uniform_real_distribution<double> reading(-3.0, 3.0);
  std::vector<HandModel> models;
  for (const char* f : {"inspire6.hand", "allegro16.hand", "gripper1.hand"}) {
    models.push_back(load_hand_model_file((kFixtures / "hands" / f).string()));
  }
  std::size_t frames = 0, violations = 0, monotone_checks = 0, calibrations = 0;
  for (int round = 0; round < 100; ++round) {
    for (const auto& model : models) {
      const std::size_t channels = 5 + rng() % 12;
      GloveFrame open, closed;
      for (std::size_t c = 0; c < channels; ++c) {
        const double o = reading(rng);
        double cl = reading(rng);
        if (std::abs(cl - o) < 1e-3) cl = o + 0.5;
        open.angles.push_back(o);
        closed.angles.push_back(cl);
      }
      std::vector<std::size_t> assignment;
      for (std::size_t j = 0; j < model.dof(); ++j) assignment.push_back(rng() % channels);
      const auto map = calibrate_map(open, closed, assignment, model);
      // 10,000 frames spread evenly over 300 random calibrations.
      const std::size_t batch = (10000 - frames) / (300 - calibrations);
      ++calibrations;
      for (std::size_t f = 0; f < batch; ++f, ++frames) {
        GloveFrame g;
        for (std::size_t c = 0; c < channels; ++c) g.angles.push_back(reading(rng));
        const auto cmd = retarget(g, map, model);
        if (!is_valid(cmd, model)) ++violations;
        // Raising any source reading never lowers a positive-gain joint.
        const std::size_t c = rng() % channels;
        GloveFrame up = g;
        up.angles[c] += std::abs(reading(rng));
        const auto cmd_up = retarget(up, map, model);
        for (std::size_t j = 0; j < model.dof(); ++j) {
          if (map.joints[j].source == c && map.joints[j].gain > 0) {
            ++monotone_checks;
            if (cmd_up.angles[j] < cmd.angles[j]) ++violations;
          }
        }
      }
    }
  }
  return {frames == 10000 && violations == 0 && monotone_checks > 0,
          fmt("%zu frames, %zu monotonicity checks, %zu violations", frames, monotone_checks, violations)};
}

Outcome tamper_detection() {
  TempDir tmp("exocap_acc");
  auto scenario = sim::load_scenario(kFixtures / "scenarios/pick_place_3s.scn");
  scenario.duration_s = 1.0;
  sim::PipelineConfig cfg;
  cfg.root = tmp.path();
  cfg.episode_name = "ep";
  const auto ep = sim::run_scenario(scenario, cfg);

  std::vector<fs::path> chunks;
  for (const auto& e : fs::directory_iterator(ep)) {
    if (e.path().extension() == ".chunk") chunks.push_back(e.path());
  }
  std::sort(chunks.begin(), chunks.end());
  const std::string cmd = std::string(EXOCAP_CLI) + " validate " + ep.string() + " > /dev/null 2>&1";
  if (std::system(cmd.c_str()) != 0) return {false, "clean episode failed validation"};

  std::mt19937_64 rng(6006);
  std::size_t detected = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto& chunk = chunks[rng() % chunks.size()];
    const auto original = read_bytes(chunk);
    const std::size_t body = original.size() - kChunkHeaderSize - kChunkFooterSize;
    const std::size_t offset = kChunkHeaderSize + rng() % body;
    const int bit = static_cast<int>(rng() % 8);
    flip_bit(chunk, offset, bit);
    if (std::system(cmd.c_str()) != 0) ++detected;
    write_bytes(chunk, original);
  }
  return {detected == 100, fmt("%zu/100 corruptions rejected by validate", detected)};
}

Outcome safety_soundness() {
  std::mt19937_64 rng(7007);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::size_t escapes = 0, mismatched = 0, aborts = 0, samples = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    SafetyEnvelope env;
    env.workspace_min = Eigen::Vector3d(-u(rng), -u(rng), -u(rng)) * 0.5;
    env.workspace_max = Eigen::Vector3d(u(rng), u(rng), u(rng)) * 0.5 + Eigen::Vector3d::Constant(0.01);
    env.max_speed_mps = 0.1 + 2.0 * u(rng);
    env.max_joint_delta_rad = 0.02 + 0.5 * u(rng);

    ActionChunk chunk;
    chunk.dt = 0.01 + 0.1 * u(rng);
    const std::size_t dof = 1 + rng() % 16;
    Eigen::Vector3d p(0.1 * (u(rng) - 0.5), 0.1 * (u(rng) - 0.5), 0.1 * (u(rng) - 0.5));
    std::vector<double> q(dof, 0.0);
    const std::size_t n = 1 + rng() % 60;
    const double step_scale = 0.2 * u(rng);
    for (std::size_t k = 0; k < n; ++k) {
      if (k > 0) {
        p += Eigen::Vector3d(u(rng) - 0.5, u(rng) - 0.5, u(rng) - 0.5) * step_scale;
        for (auto& a : q) a += (u(rng) - 0.5) * 0.4;
      }
      Pose pose = oracle::random_pose(rng);
      pose.translation = p;
      chunk.steps.push_back({pose, HandCommand{q}});
    }
    const double rate = (1.0 + 4.0 * u(rng)) / chunk.dt;
    const auto m = static_cast<std::size_t>(std::ceil(rate * chunk.dt - 1e-9));
    const double sample_dt = chunk.dt / static_cast<double>(m);
    RecordingSink sink;
    const auto report = stream_chunk(chunk, env, sink, rate);

    const auto& out = sink.samples();
    samples += out.size();
    for (std::size_t i = 0; i < out.size(); ++i) {
      const auto& t = out[i].pose.translation;
      if ((t.array() < env.workspace_min.array()).any() || (t.array() > env.workspace_max.array()).any()) ++escapes;
      if (i > 0 && (t - out[i - 1].pose.translation).norm() / sample_dt > env.max_speed_mps) ++escapes;
      if (i >= m && i % m == 0) {
        const auto& a = out[i - m].hand.angles;
        const auto& b = out[i].hand.angles;
        for (std::size_t j = 0; j < dof; ++j) {
          if (std::abs(b[j] - a[j]) > env.max_joint_delta_rad) ++escapes;
        }
      }
    }
    const std::size_t expected_samples = report.emitted_steps == 0 ? 0 : (report.emitted_steps - 1) * m + 1;
    if (out.size() != expected_samples) ++mismatched;
    if (report.abort) {
      ++aborts;
      if (report.abort->step != report.emitted_steps) ++mismatched;
    } else if (report.emitted_steps != n) {
      ++mismatched;
    }
  }
  return {escapes == 0 && mismatched == 0,
          fmt("1000 chunks, %zu samples, %zu aborts, %zu escapes, %zu step mismatches", samples, aborts, escapes,
              mismatched)};
}

Outcome sync_determinism() {
  TempDir tmp("exocap_acc");
  auto base = sim::load_scenario(kFixtures / "scenarios/noisy_stall.scn");
  std::size_t identical = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto s = base;
    s.seed = seed;
    sim::PipelineConfig cfg;
    cfg.root = tmp.path();
    cfg.episode_name = "seq_" + std::to_string(seed);
    cfg.mode = sim::DriveMode::sequential;
    const auto a = sim::run_scenario(s, cfg);
    cfg.episode_name = "con_" + std::to_string(seed);
    cfg.mode = sim::DriveMode::concurrent;
    const auto b = sim::run_scenario(s, cfg);
    bool same = true;
    for (const auto& e : fs::directory_iterator(a)) {
      if (e.path().extension() == ".chunk") same = same && read_bytes(e.path()) == read_bytes(b / e.path().filename());
    }
    identical += same;
  }
  return {identical == 20, fmt("%zu/20 seeds byte-identical", identical)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"1 calibration recovery", calibration_recovery},
      {"2 end-to-end fidelity", end_to_end_fidelity},
      {"3 task statistics table", table_arithmetic},
      {"4 interpolation oracle", interpolation_oracle},
      {"5 retarget validity fuzz", retarget_fuzz},
      {"6 tamper detection", tamper_detection},
      {"7 safety soundness", safety_soundness},
      {"8 sync determinism", sync_determinism},
  };
  int failures = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << name << "  (" << o.detail << ")\n";
    failures += !o.pass;
  }
  return failures == 0 ? 0 : 1;
}
