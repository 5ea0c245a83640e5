#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace exocap {

struct JointLimit {
  std::string name;
  double lower = 0.0;
  double upper = 0.0;
};

/// Joint roster and limits of one target hand, in declaration order.
struct HandModel {
  std::string name;
  std::vector<JointLimit> joints;

  std::size_t dof() const { return joints.size(); }
};

/// Parses a hand config:
///
///   hand: <name>
///   joint: <name> <lower_rad> <upper_rad>     (one line per joint, in order)
///
/// Throws ParseError, LimitOrderError (lower >= upper) or DuplicateJoint.
HandModel load_hand_model(std::string_view config_text);
HandModel load_hand_model_file(const std::string& path);

struct GloveFrame {
  std::vector<double> angles;
};

struct HandCommand {
  std::vector<double> angles;

  friend bool operator==(const HandCommand&, const HandCommand&) = default;
};

/// target_j = clamp(gain_j · glove[source_j] + offset_j, limits_j)
struct RetargetMap {
  struct Channel {
    std::size_t source = 0;
    double gain = 1.0;
    double offset = 0.0;
  };
  std::vector<Channel> joints;
};

/// Two-pose fit: `open` lands every joint on its lower limit and `closed` on
/// its upper limit. `assignment[j]` is the glove channel driving joint j.
/// Throws DegenerateRange when open and closed agree on an assigned channel.
RetargetMap calibrate_map(const GloveFrame& open, const GloveFrame& closed, std::span<const std::size_t> assignment,
                          const HandModel& model);

/// Throws SourceIndexOutOfRange when the frame is too short for the map and
/// InvalidArgument on non-finite readings or a map/model size mismatch.
HandCommand retarget(const GloveFrame& frame, const RetargetMap& map, const HandModel& model);

bool is_valid(const HandCommand& command, const HandModel& model);

/// Little-endian f64 per joint, in model order.
std::vector<std::byte> encode_hand_command(const HandCommand& command);
HandCommand decode_hand_command(std::span<const std::byte> bytes);

}  // namespace exocap
