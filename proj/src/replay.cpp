#include "exocap/replay.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "exocap/error.hpp"
#include "exocap/kv_text.hpp"

namespace exocap {

std::string_view to_string(AbortReason reason) noexcept {
  switch (reason) {
    case AbortReason::workspace: return "workspace";
    case AbortReason::speed: return "speed";
    case AbortReason::joint_delta: return "joint-delta";
    case AbortReason::sink_refused: return "sink-refused";
  }
  return "unknown";
}

void validate_chunk(const ActionChunk& chunk, const HandModel* model) {
  if (!(chunk.dt > 0.0) || !std::isfinite(chunk.dt)) fail(ErrorCode::InvalidArgument, "chunk dt must be positive");
  if (chunk.steps.empty()) fail(ErrorCode::InvalidArgument, "chunk has no steps");
  const std::size_t dof = chunk.steps.front().hand.angles.size();
  for (std::size_t k = 0; k < chunk.steps.size(); ++k) {
    const auto& step = chunk.steps[k];
    if (step.hand.angles.size() != dof) {
      fail(ErrorCode::InvalidArgument, "step " + std::to_string(k) + " hand command length differs");
    }
    if (model != nullptr && !is_valid(step.hand, *model)) {
      fail(ErrorCode::InvalidArgument, "step " + std::to_string(k) + " hand command violates '" + model->name + "'");
    }
  }
}

bool SafetyEnvelope::contains(const Eigen::Vector3d& p) const {
  return (p.array() >= workspace_min.array()).all() && (p.array() <= workspace_max.array()).all();
}

void validate_envelope(const SafetyEnvelope& envelope) {
  if (!(envelope.workspace_min.array() < envelope.workspace_max.array()).all()) {
    fail(ErrorCode::InvalidArgument, "workspace min must be below max on every axis");
  }
  if (!(envelope.max_speed_mps > 0.0) || !(envelope.max_joint_delta_rad > 0.0)) {
    fail(ErrorCode::InvalidArgument, "speed and joint-delta limits must be positive");
  }
}

SafetyEnvelope load_envelope(std::string_view text) {
  const KvDocument doc = KvDocument::parse(text);
  auto vec3 = [&](std::string_view key) {
    const KvEntry& e = doc.require(key);
    const auto v = e.numbers();
    if (v.size() != 3) fail(ErrorCode::ParseError, "line " + std::to_string(e.line) + ": expected 3 numbers");
    return Eigen::Vector3d(v[0], v[1], v[2]);
  };
  SafetyEnvelope env;
  env.workspace_min = vec3("workspace_min");
  env.workspace_max = vec3("workspace_max");
  env.max_speed_mps = doc.require_double("max_speed_mps");
  env.max_joint_delta_rad = doc.require_double("max_joint_delta_rad");
  validate_envelope(env);
  return env;
}

bool RecordingSink::accept(std::int64_t tick_time_ns, const Pose& pose, const HandCommand& hand) {
  samples_.push_back({tick_time_ns, pose, hand});
  return true;
}

bool LoggingSink::accept(std::int64_t tick_time_ns, const Pose& pose, const HandCommand& hand) {
  out_ << tick_time_ns;
  const auto& t = pose.translation;
  const auto& q = pose.rotation;
  for (double v : {t.x(), t.y(), t.z(), q.w(), q.x(), q.y(), q.z()}) out_ << ' ' << format_double(v);
  out_ << " |";
  for (double a : hand.angles) out_ << ' ' << format_double(a);
  out_ << '\n';
  return static_cast<bool>(out_);
}

namespace {

HandCommand lerp_hand(const HandCommand& a, const HandCommand& b, double u) {
  HandCommand out;
  out.angles.resize(a.angles.size());
  for (std::size_t i = 0; i < a.angles.size(); ++i) {
    const double lo = std::min(a.angles[i], b.angles[i]);
    const double hi = std::max(a.angles[i], b.angles[i]);
    out.angles[i] = std::clamp(a.angles[i] + u * (b.angles[i] - a.angles[i]), lo, hi);
  }
  return out;
}

double max_joint_delta(const HandCommand& a, const HandCommand& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.angles.size(); ++i) d = std::max(d, std::abs(b.angles[i] - a.angles[i]));
  return d;
}

}  // namespace

ReplayReport stream_chunk(const ActionChunk& chunk, const SafetyEnvelope& envelope, RobotSink& sink,
                          double output_rate_hz) {
  validate_chunk(chunk);
  validate_envelope(envelope);
  if (!(output_rate_hz > 0.0) || output_rate_hz * chunk.dt < 1.0 - 1e-9) {
    fail(ErrorCode::InvalidArgument, "output rate must be at least the chunk step rate");
  }
  const auto substeps = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(output_rate_hz * chunk.dt - 1e-9)));
  const double sample_dt = chunk.dt / static_cast<double>(substeps);
  auto sample_time = [&](std::size_t k, std::size_t j) {
    const double n = static_cast<double>(k * substeps + j);
    return chunk.start_time_ns + std::llround(n * sample_dt * 1.0e9);
  };

  ReplayReport report;
  const auto& first = chunk.steps.front();
  if (!envelope.contains(first.pose.translation)) {
    report.abort = SafetyAbort{0, AbortReason::workspace};
    return report;
  }
  if (!sink.accept(sample_time(0, 0), first.pose, first.hand)) {
    report.abort = SafetyAbort{0, AbortReason::sink_refused};
    return report;
  }
  report.emitted_steps = 1;
  report.emitted_samples = 1;

  std::vector<ActionStep> segment(substeps);
  for (std::size_t k = 1; k < chunk.steps.size(); ++k) {
    const auto& a = chunk.steps[k - 1];
    const auto& b = chunk.steps[k];
    for (std::size_t j = 1; j <= substeps; ++j) {
      if (j == substeps) {
        segment[j - 1] = b;
      } else {
        const double u = static_cast<double>(j) / static_cast<double>(substeps);
        segment[j - 1] = {interpolate(a.pose, b.pose, u), lerp_hand(a.hand, b.hand, u)};
      }
    }

    bool workspace_ok = true;
    bool speed_ok = true;
    const Eigen::Vector3d* previous = &a.pose.translation;
    for (const auto& s : segment) {
      workspace_ok = workspace_ok && envelope.contains(s.pose.translation);
      speed_ok = speed_ok && (s.pose.translation - *previous).norm() / sample_dt <= envelope.max_speed_mps;
      previous = &s.pose.translation;
    }
    std::optional<AbortReason> violation;
    if (!workspace_ok) {
      violation = AbortReason::workspace;
    } else if (!speed_ok) {
      violation = AbortReason::speed;
    } else if (max_joint_delta(a.hand, b.hand) > envelope.max_joint_delta_rad) {
      violation = AbortReason::joint_delta;
    }
    if (violation) {
      report.abort = SafetyAbort{k, *violation};
      return report;
    }

    for (std::size_t j = 1; j <= substeps; ++j) {
      const auto& s = segment[j - 1];
      if (!sink.accept(sample_time(k - 1, j), s.pose, s.hand)) {
        report.abort = SafetyAbort{k, AbortReason::sink_refused};
        return report;
      }
      ++report.emitted_samples;
    }
    ++report.emitted_steps;
  }
  return report;
}

std::optional<AbortReason> seam_violation(const ActionChunk& prev, const ActionChunk& next,
                                          const SafetyEnvelope& envelope) {
  validate_chunk(prev);
  validate_chunk(next);
  validate_envelope(envelope);
  const auto& a = prev.steps.back();
  const auto& b = next.steps.front();
  if (a.hand.angles.size() != b.hand.angles.size()) fail(ErrorCode::InvalidArgument, "chunks drive different hands");
  if ((b.pose.translation - a.pose.translation).norm() / prev.dt > envelope.max_speed_mps) return AbortReason::speed;
  if (max_joint_delta(a.hand, b.hand) > envelope.max_joint_delta_rad) return AbortReason::joint_delta;
  return std::nullopt;
}

void continuity_check(const ActionChunk& prev, const ActionChunk& next, const SafetyEnvelope& envelope) {
  if (const auto reason = seam_violation(prev, next, envelope)) {
    fail(ErrorCode::SeamViolation, "seam violates the " + std::string(to_string(*reason)) + " limit");
  }
}

std::vector<ActionChunk> replay_policy(const EpisodeMeta& meta, std::span<const EpisodeRecord> records,
                                       const ReplayPolicyOptions& options) {
  if (options.chunk_length == 0) fail(ErrorCode::InvalidArgument, "chunk length must be positive");
  auto find_stream = [&](const std::string& id, StreamKind kind) {
    for (std::size_t i = 0; i < meta.roster.size(); ++i) {
      if (meta.roster[i].stream_id == id) {
        if (meta.roster[i].kind != kind) fail(ErrorCode::InvalidArgument, "stream '" + id + "' has the wrong kind");
        return i;
      }
    }
    fail(ErrorCode::InvalidArgument, "episode has no stream '" + id + "'");
  };
  const std::size_t pose_idx = find_stream(options.pose_stream, StreamKind::pose);
  const std::size_t hand_idx = find_stream(options.hand_stream, StreamKind::joints);

  std::vector<ActionChunk> chunks;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (i > 0 && r.tick_index != records[i - 1].tick_index + 1) {
      fail(ErrorCode::GapInActions, "tick " + std::to_string(records[i - 1].tick_index + 1) + " missing");
    }
    const auto& pose = r.entries.at(pose_idx);
    const auto& hand = r.entries.at(hand_idx);
    if (!pose || !hand) {
      fail(ErrorCode::GapInActions, "gap in stream '" + (pose ? options.hand_stream : options.pose_stream) +
                                        "' at tick " + std::to_string(r.tick_index));
    }
    if (i % options.chunk_length == 0) {
      ActionChunk c;
      c.dt = 1.0 / meta.tick_rate_hz;
      c.start_time_ns = r.tick_time_ns;
      c.steps.reserve(std::min(options.chunk_length, records.size() - i));
      chunks.push_back(std::move(c));
    }
    chunks.back().steps.push_back({std::get<Pose>(*pose), HandCommand{std::get<JointVector>(*hand)}});
  }
  return chunks;
}

}  // namespace exocap
