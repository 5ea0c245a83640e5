#include "exocap/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <sstream>

#include "exocap/calibration.hpp"
#include "exocap/episode_store.hpp"
#include "exocap/error.hpp"
#include "exocap/kv_text.hpp"
#include "exocap/replay.hpp"
#include "exocap/sim.hpp"

namespace exocap {

namespace fs = std::filesystem;

namespace {

constexpr double kRadToDeg = 180.0 / std::numbers::pi;

std::string pose_text(const Pose& p) {
  std::ostringstream s;
  const auto& t = p.translation;
  const auto& q = p.rotation;
  s << format_double(t.x()) << ' ' << format_double(t.y()) << ' ' << format_double(t.z()) << ' '
    << format_double(q.w()) << ' ' << format_double(q.x()) << ' ' << format_double(q.y()) << ' '
    << format_double(q.z());
  return s.str();
}

/// Pairs file: one `pair:` line per observation with 14 numbers, the SLAM
/// pose then the robot pose, each as tx ty tz qw qx qy qz.
std::vector<PosePair> load_pairs(const std::string& path) {
  const KvDocument doc = KvDocument::load(path);
  std::vector<PosePair> pairs;
  for (const KvEntry* e : doc.all("pair")) {
    const auto v = e->numbers();
    if (v.size() != 14) fail(ErrorCode::ParseError, "line " + std::to_string(e->line) + ": a pair needs 14 numbers");
    auto pose = [&](std::size_t o) {
      return Pose{{v[o], v[o + 1], v[o + 2]}, Eigen::Quaterniond(v[o + 3], v[o + 4], v[o + 5], v[o + 6]).normalized()};
    };
    pairs.push_back({pose(0), pose(7)});
  }
  return pairs;
}

sim::DriveMode parse_mode(const std::string& text) {
  if (text == "sequential") return sim::DriveMode::sequential;
  if (text == "concurrent") return sim::DriveMode::concurrent;
  fail(ErrorCode::InvalidArgument, "unknown drive mode '" + text + "'");
}

std::vector<fs::path> episode_dirs(const fs::path& dir) {
  if (fs::exists(dir / "manifest.txt")) return {dir};
  std::vector<fs::path> out;
  for (const auto& e : build_index(dir).episodes) out.push_back(e.path);
  if (out.empty()) fail(ErrorCode::IoError, "no episodes under " + dir.string());
  return out;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Exoskeleton demonstration capture: record, validate, summarize and replay episodes", "exocap"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string out_dir;
  std::string episode_name;
  std::string mode = "sequential";
  std::string start_time;
  auto* simulate = app.add_subcommand("simulate", "Run a simulated scenario and record one episode");
  simulate->add_option("--scenario", scenario_path, "Scenario file")->required();
  simulate->add_option("--out", out_dir, "Dataset root directory")->required();
  simulate->add_option("--name", episode_name, "Episode directory name");
  simulate->add_option("--mode", mode, "Producer drive mode: sequential|concurrent");
  simulate->add_option("--start-time", start_time, "Manifest start_time override");

  std::string pairs_path;
  std::size_t min_pairs = 3;
  double max_spread_deg = 5.0;
  auto* calibrate = app.add_subcommand("calibrate", "Estimate T_calib from SLAM/robot pose pairs");
  calibrate->add_option("--pairs", pairs_path, "Pose-pair file")->required();
  calibrate->add_option("--min-pairs", min_pairs, "Minimum number of pairs");
  calibrate->add_option("--max-spread-deg", max_spread_deg, "Largest tolerated candidate rotation spread");

  std::string config_path;
  auto* record = app.add_subcommand("record", "Record an episode from the sources named in a pipeline config");
  record->add_option("--config", config_path, "Pipeline config file")->required();
  record->add_option("--out", out_dir, "Dataset root directory")->required();

  std::string dir;
  auto* validate = app.add_subcommand("validate", "Checksum and invariant audit of an episode or dataset");
  validate->add_option("dir", dir, "Episode directory or dataset root")->required();

  std::string task;
  auto* stats = app.add_subcommand("stats", "Duration and success statistics for one task");
  stats->add_option("dir", dir, "Dataset root")->required();
  stats->add_option("--task", task, "Task name")->required();

  std::string envelope_path;
  std::size_t chunk_len = 30;
  std::string sink_kind = "recording";
  double rate_hz = 0.0;
  auto* replay = app.add_subcommand("replay", "Replay a recorded episode through the safety envelope");
  replay->add_option("dir", dir, "Episode directory")->required();
  replay->add_option("--envelope", envelope_path, "Safety envelope file")->required();
  replay->add_option("--chunk-len", chunk_len, "Steps per action chunk");
  replay->add_option("--sink", sink_kind, "recording|log")->check(CLI::IsMember({"recording", "log"}));
  replay->add_option("--rate", rate_hz, "Output rate in Hz (default: episode tick rate)");

  std::uint64_t seed = 1;
  auto* synth = app.add_subcommand("synth-table", "Write the synthetic four-task statistics dataset");
  synth->add_option("--out", out_dir, "Dataset root directory")->required();
  synth->add_option("--seed", seed, "Generator seed");

  try {
    std::vector<std::string> rev(args.rbegin(), args.empty() ? args.rend() : args.rend() - 1);
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: UsageError: " << e.what() << "\n";
    return 2;
  }

  try {
    if (*simulate) {
      sim::PipelineConfig config{out_dir, episode_name, parse_mode(mode), 1024, start_time};
      out << sim::run_scenario(sim::load_scenario(scenario_path), config).string() << "\n";
    } else if (*calibrate) {
      CalibrationOptions options;
      options.min_pairs = min_pairs;
      options.max_spread_rad = max_spread_deg / kRadToDeg;
      const auto result = estimate_calibration(load_pairs(pairs_path), options);
      out << "calib: " << pose_text(result.calib) << "\n";
      out << "residual_rms_m: " << format_double(result.rms_translation_m) << "\n";
      out << "residual_rms_deg: " << format_double(result.rms_rotation_rad * kRadToDeg) << "\n";
      out << "spread_deg: " << format_double(result.spread_rad * kRadToDeg) << "\n";
    } else if (*record) {
      const KvDocument doc = KvDocument::load(config_path);
      const std::string source = doc.get_string("source", "sim");
      if (source != "sim") fail(ErrorCode::InvalidArgument, "source '" + source + "' is not available in this build");
      fs::path scenario = doc.require("scenario").value;
      if (scenario.is_relative()) scenario = fs::path(config_path).parent_path() / scenario;
      sim::PipelineConfig config;
      config.root = out_dir;
      config.episode_name = doc.get_string("name", "");
      config.mode = parse_mode(doc.get_string("mode", "concurrent"));
      config.buffer_capacity = doc.get_uint("buffer_capacity", 1024);
      out << sim::run_scenario(sim::load_scenario(scenario), config).string() << "\n";
    } else if (*validate) {
      for (const auto& episode : episode_dirs(dir)) {
        const auto report = validate_episode(episode);
        out << "ok " << episode.string() << " records=" << report.records << " gaps=" << report.gaps << "\n";
      }
    } else if (*stats) {
      const auto s = task_stats(build_index(dir), task);
      out << "task  avg_time_s  succ/trials  succ_rate\n";
      out << task << "  " << format_task_stats(s) << "\n";
    } else if (*replay) {
      const SafetyEnvelope envelope = load_envelope(read_text_file(envelope_path));
      auto reader = load_episode(dir);
      std::vector<EpisodeRecord> records;
      while (auto r = reader.next()) records.push_back(std::move(*r));
      ReplayPolicyOptions options;
      options.chunk_length = chunk_len;
      const auto chunks = replay_policy(reader.meta(), records, options);
      const double rate = rate_hz > 0.0 ? rate_hz : reader.meta().tick_rate_hz;

      RecordingSink recording;
      LoggingSink logging(out);
      RobotSink& sink = sink_kind == "log" ? static_cast<RobotSink&>(logging) : recording;
      std::size_t steps = 0;
      std::size_t samples = 0;
      std::optional<std::pair<std::size_t, SafetyAbort>> abort;
      for (std::size_t c = 0; c < chunks.size() && !abort; ++c) {
        if (c > 0) continuity_check(chunks[c - 1], chunks[c], envelope);
        const auto report = stream_chunk(chunks[c], envelope, sink, rate);
        steps += report.emitted_steps;
        samples += report.emitted_samples;
        if (report.abort) abort = std::pair{c, *report.abort};
      }
      out << "chunks: " << chunks.size() << "\nemitted_steps: " << steps << "\nemitted_samples: " << samples << "\n";
      if (abort) {
        out << "abort: chunk " << abort->first << " step " << abort->second.step << " "
            << to_string(abort->second.reason) << "\n";
        err << "error: SafetyAbort: chunk " << abort->first << " step " << abort->second.step << " reason "
            << to_string(abort->second.reason) << "\n";
        return 3;
      }
      out << "abort: none\n";
    } else if (*synth) {
      std::size_t n = 0;
      for (const auto& row : sim::collection_table_rows()) {
        n += sim::synthesize_task_episodes(out_dir, row, seed++).size();
      }
      out << "wrote " << n << " episodes to " << out_dir << "\n";
    }
  } catch (const Error& e) {
    err << "error: " << to_string(e.code()) << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: Internal: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace exocap
