#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "cemreg/point_cloud.hpp"

namespace cemreg {

using Vector6d = Eigen::Matrix<double, 6, 1>;

inline constexpr double kPi = 3.14159265358979323846;

double wrap_angle(double radians);  // into [-pi, pi]
inline double to_degrees(double radians) { return radians * 180.0 / kPi; }
inline double to_radians(double degrees) { return degrees * kPi / 180.0; }

/**
 * Rigid transform as [e1,e2,e3,t1,t2,t3]: Euler angles (radians) plus
 * translation. Angles are wrapped into [-pi, pi] on construction.
 */
struct Action {
  Eigen::Vector3d euler = Eigen::Vector3d::Zero();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  Action() = default;
  Action(const Eigen::Vector3d& e, const Eigen::Vector3d& t);

  static Action from_vector(const Vector6d& v);
  Vector6d to_vector() const;
};

// Fixed convention used everywhere: R = Rz(e3) * Ry(e2) * Rx(e1).
Eigen::Matrix3d euler_to_rotation(const Eigen::Vector3d& euler);

// Inverse of euler_to_rotation, canonical branch e2 in [-pi/2, pi/2].
// Gimbal lock (|cos e2| < 1e-8): e1 := 0, coupled angle folded into e3.
Eigen::Vector3d rotation_to_euler(const Eigen::Matrix3d& rotation);

// x -> R(a.euler) * x + a.translation, row order preserved.
PointCloud apply_action(const PointCloud& cloud, const Action& action);

// Action undoing `action`: rotation R^T, translation -R^T t.
Action inverse_action(const Action& action);

// Applying `first` then `second` as a single action.
Action compose_actions(const Action& second, const Action& first);

// Bidirectional sum of nearest-neighbor L2 norms (not squared, not averaged).
// Spatial index for clouds of 64+ points, brute force below.
double chamfer_distance(const PointCloud& a, const PointCloud& b);

struct ChamferCorrespondences {
  std::vector<Eigen::Index> nearest_in_second;  // per point of the first cloud
  std::vector<Eigen::Index> nearest_in_first;   // per point of the second cloud
  double distance = 0.0;
};

// Chamfer distance plus both nearest-neighbor assignments (for gradients
// and ICP-style consumers).
ChamferCorrespondences chamfer_correspondences(const PointCloud& a,
                                               const PointCloud& b);

// Center at the origin and scale so the farthest point sits on the unit
// sphere. Requires >= 2 distinct points.
PointCloud normalize_unit_sphere(const PointCloud& cloud);

// Per-coordinate i.i.d. Gaussian(0, stddev^2), each sample clamped to
// [-clip, clip]. Deterministic given the seed.
PointCloud add_gaussian_noise(const PointCloud& cloud, double stddev,
                              double clip, std::uint64_t seed);

struct RegistrationErrors {
  Eigen::Vector3d rotation_deg = Eigen::Vector3d::Zero();  // wrapped per axis
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
};

// Per-axis differences; angle diffs wrapped into (-180, 180] degrees.
// RMSE/MAE aggregation over a test set lives in the harness.
RegistrationErrors registration_errors(const Action& predicted,
                                       const Action& ground_truth);

}  // namespace cemreg
