#include "cemreg/icp.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <limits>

#include "cemreg/errors.hpp"
#include "cemreg/kdtree.hpp"

namespace cemreg {

RigidFit kabsch_fit(const PointCloud::Matrix& source,
                    const PointCloud::Matrix& target) {
  if (source.rows() != target.rows())
    throw std::invalid_argument("kabsch_fit: row counts differ");
  if (source.rows() < 3)
    throw DegenerateGeometryError("kabsch_fit: need at least 3 correspondences");

  const Eigen::RowVector3d source_mean = source.colwise().mean();
  const Eigen::RowVector3d target_mean = target.colwise().mean();
  const Eigen::MatrixXd centered_source = source.rowwise() - source_mean;
  const Eigen::MatrixXd centered_target = target.rowwise() - target_mean;

  const Eigen::Matrix3d covariance = centered_source.transpose() * centered_target;
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(covariance,
                                        Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Vector3d& sigma = svd.singularValues();
  // Rank < 2 leaves a rotation axis unconstrained.
  if (sigma(1) <= 1e-12 * std::max(sigma(0), 1e-12))
    throw DegenerateGeometryError(
        "kabsch_fit: correspondence covariance is rank-deficient");

  Eigen::Matrix3d rotation = svd.matrixV() * svd.matrixU().transpose();
  if (rotation.determinant() < 0.0) {
    // Nearest proper rotation: flip the axis of least variance.
    Eigen::Matrix3d flipped_v = svd.matrixV();
    flipped_v.col(2) *= -1.0;
    rotation = flipped_v * svd.matrixU().transpose();
  }

  RigidFit fit;
  fit.rotation = rotation;
  fit.translation = target_mean.transpose() - rotation * source_mean.transpose();
  return fit;
}

IcpResult icp_register(const PointCloud& source, const PointCloud& target,
                       const IcpConfig& config) {
  if (source.empty() || target.empty())
    throw std::invalid_argument("icp_register: empty cloud");
  if (config.max_iterations < 1)
    throw ConfigError("icp max_iterations must be >= 1");

  const KdTree3 target_index(target);
  Eigen::Matrix3d rotation = euler_to_rotation(config.initial.euler);
  Eigen::Vector3d translation = config.initial.translation;

  IcpResult result;
  PointCloud::Matrix moved =
      (source.points() * rotation.transpose()).rowwise() + translation.transpose();

  for (int iteration = 0; iteration < config.max_iterations; ++iteration) {
    // Match every moved source point to its nearest target point.
    std::vector<Eigen::Index> kept;
    kept.reserve(static_cast<std::size_t>(moved.rows()));
    std::vector<Eigen::Index> matched(static_cast<std::size_t>(moved.rows()));
    double squared_sum = 0.0;
    for (Eigen::Index i = 0; i < moved.rows(); ++i) {
      const KdTree3::Hit hit = target_index.nearest(moved.row(i).transpose());
      matched[static_cast<std::size_t>(i)] = hit.index;
      if (config.max_correspondence > 0.0 && hit.distance > config.max_correspondence)
        continue;
      kept.push_back(i);
      squared_sum += hit.distance * hit.distance;
    }
    if (kept.size() < 3)
      throw DegenerateGeometryError(
          "icp_register: fewer than 3 correspondences inside the distance gate");
    result.rms_history.push_back(
        std::sqrt(squared_sum / static_cast<double>(kept.size())));

    PointCloud::Matrix fit_source(static_cast<Eigen::Index>(kept.size()), 3);
    PointCloud::Matrix fit_target(static_cast<Eigen::Index>(kept.size()), 3);
    for (std::size_t k = 0; k < kept.size(); ++k) {
      fit_source.row(static_cast<Eigen::Index>(k)) = moved.row(kept[k]);
      fit_target.row(static_cast<Eigen::Index>(k)) =
          target.points().row(matched[static_cast<std::size_t>(kept[k])]);
    }
    const RigidFit step = kabsch_fit(fit_source, fit_target);

    rotation = step.rotation * rotation;
    translation = step.rotation * translation + step.translation;
    moved = (source.points() * rotation.transpose()).rowwise() + translation.transpose();
    result.iterations = iteration + 1;

    // How far this step moved the estimate.
    const double cos_angle =
        std::clamp((step.rotation.trace() - 1.0) / 2.0, -1.0, 1.0);
    const double step_angle = std::acos(cos_angle);
    if (step_angle < config.rotation_tolerance &&
        step.translation.norm() < config.translation_tolerance) {
      result.converged = true;
      break;
    }
  }

  result.action = Action(rotation_to_euler(rotation), translation);
  return result;
}

}  // namespace cemreg
