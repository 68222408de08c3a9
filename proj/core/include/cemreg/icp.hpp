#pragma once

#include <vector>

#include "cemreg/geometry.hpp"
#include "cemreg/point_cloud.hpp"

namespace cemreg {

// Least-squares rigid fit for paired rows (Kabsch via SVD). Always returns a
// proper rotation (det +1); throws DegenerateGeometryError when the paired
// covariance has rank < 2 (coincident or collinear correspondences).
struct RigidFit {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
};
RigidFit kabsch_fit(const PointCloud::Matrix& source,
                    const PointCloud::Matrix& target);

struct IcpConfig {
  int max_iterations = 100;
  double rotation_tolerance = 1e-4;     // radians of per-step rotation change
  double translation_tolerance = 1e-6;  // norm of per-step translation change
  double max_correspondence = 0.0;      // 0 disables the distance gate
  Action initial;                       // identity unless a warm start exists
};

struct IcpResult {
  Action action;
  bool converged = false;
  int iterations = 0;
  // Root-mean-square correspondence distance at the start of each iteration;
  // non-increasing by construction of the alternation.
  std::vector<double> rms_history;
};

// Classic alternation: nearest-neighbor correspondences against the target,
// rigid refit, repeat until the incremental motion is below tolerance.
IcpResult icp_register(const PointCloud& source, const PointCloud& target,
                       const IcpConfig& config);

}  // namespace cemreg
