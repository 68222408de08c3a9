#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

namespace cemreg {

/**
 * Point cloud as an Nx3 matrix in normalized model units, one point per row.
 * Order is meaningful: generated registration pairs keep exact row
 * correspondence between source and target.
 */
class PointCloud {
 public:
  using Matrix = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;

  PointCloud() = default;

  // Validates that every coordinate is finite.
  explicit PointCloud(Matrix points);
  explicit PointCloud(const std::vector<Eigen::Vector3d>& points);

  const Matrix& points() const { return points_; }
  Matrix& points() { return points_; }

  Eigen::Index size() const { return points_.rows(); }
  bool empty() const { return points_.rows() == 0; }

  Eigen::Vector3d point(Eigen::Index i) const {
    return points_.row(i).transpose();
  }

  Eigen::Vector3d centroid() const;

  // Largest point norm; 0 for an empty cloud.
  double max_norm() const;

 private:
  Matrix points_;
};

}  // namespace cemreg
