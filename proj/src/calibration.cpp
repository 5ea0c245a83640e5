#include "exocap/calibration.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <string>
#include <vector>

#include "exocap/error.hpp"

namespace exocap {

CalibrationResult estimate_calibration(std::span<const PosePair> pairs, const CalibrationOptions& options) {
  if (options.min_pairs == 0 || pairs.size() < options.min_pairs) {
    fail(ErrorCode::TooFewPairs, "need at least " + std::to_string(std::max<std::size_t>(options.min_pairs, 1)) +
                                     " pose pairs, got " + std::to_string(pairs.size()));
  }

  std::vector<Eigen::Quaterniond> candidates;
  candidates.reserve(pairs.size());
  Eigen::Matrix4d scatter = Eigen::Matrix4d::Zero();
  for (const auto& pair : pairs) {
    Eigen::Quaterniond q = pair.robot.rotation * pair.slam.rotation.conjugate();
    q.normalize();
    candidates.push_back(q);
    scatter += q.coeffs() * q.coeffs().transpose();
  }

  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> solver(scatter);
  // Eigenvalues come sorted ascending.
  const Eigen::Vector4d v = solver.eigenvectors().col(3);
  Eigen::Quaterniond rotation(v(3), v(0), v(1), v(2));
  rotation.normalize();
  if (rotation.w() < 0.0) rotation.coeffs() *= -1.0;

  double spread = 0.0;
  for (const auto& q : candidates) spread = std::max(spread, angular_distance(q, rotation));
  if (spread > options.max_spread_rad) {
    fail(ErrorCode::DegenerateInput, "rotation candidates spread " + std::to_string(spread) +
                                         " rad exceeds limit " + std::to_string(options.max_spread_rad));
  }

  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
  for (const auto& pair : pairs) translation += pair.robot.translation - rotation * pair.slam.translation;
  translation /= static_cast<double>(pairs.size());

  CalibrationResult result;
  result.calib = {translation, rotation};
  result.spread_rad = spread;
  double sum_t = 0.0;
  double sum_r = 0.0;
  for (const auto& pair : pairs) {
    const Pose predicted = apply_calibration(result.calib, pair.slam);
    sum_t += (predicted.translation - pair.robot.translation).squaredNorm();
    const double r = angular_distance(predicted.rotation, pair.robot.rotation);
    sum_r += r * r;
  }
  const auto n = static_cast<double>(pairs.size());
  result.rms_translation_m = std::sqrt(sum_t / n);
  result.rms_rotation_rad = std::sqrt(sum_r / n);
  return result;
}

}  // namespace exocap
