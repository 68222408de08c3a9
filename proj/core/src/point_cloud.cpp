#include "cemreg/point_cloud.hpp"

#include <stdexcept>

namespace cemreg {

PointCloud::PointCloud(Matrix points) : points_(std::move(points)) {
  if (!points_.allFinite()) {
    throw std::invalid_argument("point cloud contains non-finite coordinates");
  }
}

PointCloud::PointCloud(const std::vector<Eigen::Vector3d>& points) {
  points_.resize(static_cast<Eigen::Index>(points.size()), 3);
  for (std::size_t i = 0; i < points.size(); ++i) {
    points_.row(static_cast<Eigen::Index>(i)) = points[i].transpose();
  }
  if (!points_.allFinite()) {
    throw std::invalid_argument("point cloud contains non-finite coordinates");
  }
}

Eigen::Vector3d PointCloud::centroid() const {
  if (empty()) {
    throw std::invalid_argument("centroid of empty point cloud");
  }
  return points_.colwise().mean().transpose();
}

double PointCloud::max_norm() const {
  if (empty()) return 0.0;
  return points_.rowwise().norm().maxCoeff();
}

}  // namespace cemreg
