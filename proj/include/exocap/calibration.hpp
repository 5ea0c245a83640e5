#pragma once

#include <cstddef>
#include <numbers>
#include <span>

#include "exocap/pose.hpp"

namespace exocap {

/// One simultaneous observation of the tracking-camera pose and the robot
/// end-effector pose.
struct PosePair {
  Pose slam;
  Pose robot;
};

struct CalibrationOptions {
  std::size_t min_pairs = 3;
  /// Largest allowed angle between any per-pair rotation candidate and the
  /// averaged rotation. Above it the pairing is considered broken.
  double max_spread_rad = 5.0 * std::numbers::pi / 180.0;
};

struct CalibrationResult {
  Pose calib;
  double rms_translation_m = 0.0;
  double rms_rotation_rad = 0.0;
  double spread_rad = 0.0;
};

/// T_robot = T_calib · T_slam.
inline Pose apply_calibration(const Pose& t_calib, const Pose& t_slam) { return compose(t_calib, t_slam); }

/// Closed-form estimate of T_calib from pose pairs. Each pair yields a
/// candidate robot·slam⁻¹; rotations are averaged as the dominant eigenvector
/// of Σ q qᵀ and the translation is the mean of robot.t − R·slam.t.
///
/// Throws TooFewPairs when pairs.size() < options.min_pairs (or min_pairs is
/// 0) and DegenerateInput when the candidate spread exceeds the limit.
CalibrationResult estimate_calibration(std::span<const PosePair> pairs,
                                       const CalibrationOptions& options = {});

}  // namespace exocap
