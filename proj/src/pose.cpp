#include "exocap/pose.hpp"

#include <cmath>

#include "exocap/error.hpp"
#include "exocap/le_io.hpp"

namespace exocap {

namespace {

Eigen::Quaterniond normalized(const Eigen::Quaterniond& q) {
  Eigen::Quaterniond out = q;
  out.normalize();
  return out;
}

}  // namespace

Pose Pose::from_axis_angle(const Eigen::Vector3d& axis, double angle, const Eigen::Vector3d& t) {
  return {t, normalized(Eigen::Quaterniond(Eigen::AngleAxisd(angle, axis.normalized())))};
}

Eigen::Matrix4d Pose::matrix() const {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = rotation.toRotationMatrix();
  m.topRightCorner<3, 1>() = translation;
  return m;
}

Pose compose(const Pose& a, const Pose& b) {
  return {a.translation + a.rotation * b.translation, normalized(a.rotation * b.rotation)};
}

Pose invert(const Pose& p) {
  const Eigen::Quaterniond inv = p.rotation.conjugate();
  return {-(inv * p.translation), normalized(inv)};
}

Pose interpolate(const Pose& a, const Pose& b, double u) {
  if (!(u >= 0.0 && u <= 1.0)) {
    fail(ErrorCode::OutOfRange, "interpolation fraction outside [0,1]");
  }
  if (u == 0.0) return a;
  if (u == 1.0) return b;

  Pose out;
  out.translation = a.translation + u * (b.translation - a.translation);

  Eigen::Vector4d qa = a.rotation.coeffs();
  Eigen::Vector4d qb = b.rotation.coeffs();
  if (qa.dot(qb) < 0.0) qb = -qb;

  // Angle between the two quaternions as 4-vectors; atan2 keeps precision
  // near 0 where acos(dot) would not.
  const double phi = 2.0 * std::atan2((qa - qb).norm(), (qa + qb).norm());
  Eigen::Vector4d q;
  if (phi < 1e-6) {
    q = (1.0 - u) * qa + u * qb;
  } else {
    const double s = std::sin(phi);
    q = (std::sin((1.0 - u) * phi) / s) * qa + (std::sin(u * phi) / s) * qb;
  }
  out.rotation = normalized(Eigen::Quaterniond(q(3), q(0), q(1), q(2)));
  return out;
}

double rotation_angle(const Eigen::Quaterniond& q) {
  return 2.0 * std::atan2(q.vec().norm(), std::abs(q.w()));
}

double angular_distance(const Eigen::Quaterniond& a, const Eigen::Quaterniond& b) {
  return rotation_angle(a.conjugate() * b);
}

std::array<std::byte, kPoseWireSize> encode_pose(const Pose& p) {
  std::vector<std::byte> buf;
  buf.reserve(kPoseWireSize);
  for (double v : {p.translation.x(), p.translation.y(), p.translation.z(), p.rotation.w(),
                   p.rotation.x(), p.rotation.y(), p.rotation.z()}) {
    le::put(buf, v);
  }
  std::array<std::byte, kPoseWireSize> out{};
  std::copy(buf.begin(), buf.end(), out.begin());
  return out;
}

Pose decode_pose(std::span<const std::byte> bytes) {
  if (bytes.size() != kPoseWireSize) {
    fail(ErrorCode::SizeMismatch, "pose payload must be 56 bytes");
  }
  Pose p;
  p.translation = {le::get<double>(bytes, 0), le::get<double>(bytes, 8), le::get<double>(bytes, 16)};
  p.rotation = Eigen::Quaterniond(le::get<double>(bytes, 24), le::get<double>(bytes, 32),
                                  le::get<double>(bytes, 40), le::get<double>(bytes, 48));
  return p;
}

}  // namespace exocap
