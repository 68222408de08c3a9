#pragma once

#include <cstdint>
#include <vector>

#include "cemreg/point_cloud.hpp"

namespace cemreg {

/**
 * Static 3-D KD-tree for exact nearest-neighbor queries.
 *
 * Median split on the widest axis, index tie-break in the ordering so the
 * tree content is deterministic for a given input. Queries return the true
 * nearest point; distance ties resolve to the lowest point index.
 */
class KdTree3 {
 public:
  explicit KdTree3(const PointCloud::Matrix& points);
  explicit KdTree3(const PointCloud& cloud) : KdTree3(cloud.points()) {}

  struct Hit {
    Eigen::Index index = -1;
    double distance = 0.0;
  };

  Hit nearest(const Eigen::Vector3d& query) const;

  Eigen::Index size() const { return points_.rows(); }

 private:
  static constexpr int kLeafSize = 16;

  struct Node {
    int axis = -1;  // -1 marks a leaf
    double split = 0.0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    std::int32_t begin = 0;  // leaf range into order_
    std::int32_t end = 0;
  };

  std::int32_t build(std::int32_t begin, std::int32_t end);
  void search(std::int32_t node_id, const Eigen::Vector3d& query,
              double& best_sq, Eigen::Index& best_index) const;

  PointCloud::Matrix points_;
  std::vector<std::int32_t> order_;
  std::vector<Node> nodes_;
  std::int32_t root_ = -1;
};

}  // namespace cemreg
