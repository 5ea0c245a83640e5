#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <array>
#include <span>

namespace exocap {

/// Rigid transform in SE(3): translation in meters, rotation as a unit
/// quaternion. Every operation in this header returns a renormalized
/// quaternion.
struct Pose {
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
  Eigen::Quaterniond rotation = Eigen::Quaterniond::Identity();

  static Pose identity() { return {}; }
  static Pose from_translation(const Eigen::Vector3d& t) { return {t, Eigen::Quaterniond::Identity()}; }
  /// Rotation of `angle` radians about `axis` (normalized internally).
  static Pose from_axis_angle(const Eigen::Vector3d& axis, double angle,
                              const Eigen::Vector3d& t = Eigen::Vector3d::Zero());

  Eigen::Matrix4d matrix() const;

  friend bool operator==(const Pose& a, const Pose& b) {
    return a.translation == b.translation && a.rotation.coeffs() == b.rotation.coeffs();
  }
};

/// a∘b: maps points of frame b into the frame a is expressed in.
Pose compose(const Pose& a, const Pose& b);
Pose invert(const Pose& p);

/// Translation lerp and shortest-arc slerp. u outside [0,1] throws OutOfRange.
/// u == 0 and u == 1 return the endpoints unchanged.
Pose interpolate(const Pose& a, const Pose& b, double u);

/// Rotation angle of q in [0, π], independent of quaternion sign.
double rotation_angle(const Eigen::Quaterniond& q);
/// Angle of the relative rotation between a and b, in [0, π].
double angular_distance(const Eigen::Quaterniond& a, const Eigen::Quaterniond& b);

inline constexpr std::size_t kPoseWireSize = 56;

/// tx,ty,tz,qw,qx,qy,qz as 7 little-endian f64.
std::array<std::byte, kPoseWireSize> encode_pose(const Pose& p);
Pose decode_pose(std::span<const std::byte> bytes);

}  // namespace exocap
