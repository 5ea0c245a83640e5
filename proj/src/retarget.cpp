#include "exocap/retarget.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "exocap/error.hpp"
#include "exocap/kv_text.hpp"
#include "exocap/le_io.hpp"

namespace exocap {

HandModel load_hand_model(std::string_view config_text) {
  const KvDocument doc = KvDocument::parse(config_text);
  HandModel model;
  std::unordered_set<std::string> seen;
  for (const auto& entry : doc.entries()) {
    if (entry.key == "hand") {
      if (!model.name.empty()) fail(ErrorCode::ParseError, "line " + std::to_string(entry.line) + ": hand named twice");
      model.name = entry.value;
    } else if (entry.key == "joint") {
      const auto tok = entry.tokens();
      if (tok.size() != 3) {
        fail(ErrorCode::ParseError, "line " + std::to_string(entry.line) + ": expected 'joint: <name> <lower> <upper>'");
      }
      JointLimit joint{tok[0], parse_double(tok[1], entry.line), parse_double(tok[2], entry.line)};
      if (!std::isfinite(joint.lower) || !std::isfinite(joint.upper)) {
        fail(ErrorCode::ParseError, "line " + std::to_string(entry.line) + ": limits must be finite");
      }
      if (!(joint.lower < joint.upper)) {
        fail(ErrorCode::LimitOrderError, "joint '" + joint.name + "': lower limit must be below upper limit");
      }
      if (!seen.insert(joint.name).second) fail(ErrorCode::DuplicateJoint, "duplicate joint '" + joint.name + "'");
      model.joints.push_back(std::move(joint));
    } else {
      fail(ErrorCode::ParseError, "line " + std::to_string(entry.line) + ": unknown key '" + entry.key + "'");
    }
  }
  if (model.name.empty()) fail(ErrorCode::ParseError, "hand config has no 'hand:' line");
  if (model.joints.empty()) fail(ErrorCode::ParseError, "hand config declares no joints");
  return model;
}

HandModel load_hand_model_file(const std::string& path) {
  return load_hand_model(read_text_file(path));
}

RetargetMap calibrate_map(const GloveFrame& open, const GloveFrame& closed, std::span<const std::size_t> assignment,
                          const HandModel& model) {
  if (assignment.size() != model.dof()) {
    fail(ErrorCode::InvalidArgument, "assignment has " + std::to_string(assignment.size()) + " entries, hand '" +
                                         model.name + "' has " + std::to_string(model.dof()) + " joints");
  }
  RetargetMap map;
  map.joints.reserve(model.dof());
  for (std::size_t j = 0; j < model.dof(); ++j) {
    const std::size_t src = assignment[j];
    if (src >= open.angles.size() || src >= closed.angles.size()) {
      fail(ErrorCode::SourceIndexOutOfRange, "joint " + std::to_string(j) + " reads glove channel " +
                                                 std::to_string(src) + " beyond the calibration frames");
    }
    const double lo = open.angles[src];
    const double hi = closed.angles[src];
    if (!std::isfinite(lo) || !std::isfinite(hi)) fail(ErrorCode::InvalidArgument, "non-finite calibration reading");
    if (lo == hi) {
      fail(ErrorCode::DegenerateRange, "glove channel " + std::to_string(src) + " reads the same open and closed");
    }
    const auto& limit = model.joints[j];
    const double gain = (limit.upper - limit.lower) / (hi - lo);
    map.joints.push_back({src, gain, limit.lower - gain * lo});
  }
  return map;
}

HandCommand retarget(const GloveFrame& frame, const RetargetMap& map, const HandModel& model) {
  if (map.joints.size() != model.dof()) {
    fail(ErrorCode::InvalidArgument, "retarget map does not match hand '" + model.name + "'");
  }
  HandCommand out;
  out.angles.resize(model.dof());
  for (std::size_t j = 0; j < model.dof(); ++j) {
    const auto& ch = map.joints[j];
    if (ch.source >= frame.angles.size()) {
      fail(ErrorCode::SourceIndexOutOfRange, "glove frame has " + std::to_string(frame.angles.size()) +
                                                 " channels, joint " + std::to_string(j) + " reads channel " +
                                                 std::to_string(ch.source));
    }
    const double reading = frame.angles[ch.source];
    if (!std::isfinite(reading)) fail(ErrorCode::InvalidArgument, "non-finite glove reading");
    const auto& limit = model.joints[j];
    out.angles[j] = std::clamp(ch.gain * reading + ch.offset, limit.lower, limit.upper);
  }
  return out;
}

bool is_valid(const HandCommand& command, const HandModel& model) {
  if (command.angles.size() != model.dof()) return false;
  for (std::size_t j = 0; j < model.dof(); ++j) {
    const double a = command.angles[j];
    if (!(a >= model.joints[j].lower && a <= model.joints[j].upper)) return false;
  }
  return true;
}

std::vector<std::byte> encode_hand_command(const HandCommand& command) {
  std::vector<std::byte> out;
  out.reserve(command.angles.size() * 8);
  for (double a : command.angles) le::put(out, a);
  return out;
}

HandCommand decode_hand_command(std::span<const std::byte> bytes) {
  if (bytes.size() % 8 != 0) fail(ErrorCode::SizeMismatch, "hand command payload is not a multiple of 8 bytes");
  HandCommand out;
  out.angles.resize(bytes.size() / 8);
  for (std::size_t i = 0; i < out.angles.size(); ++i) out.angles[i] = le::get<double>(bytes, i * 8);
  return out;
}

}  // namespace exocap
