#include "cemreg/kdtree.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace cemreg {

KdTree3::KdTree3(const PointCloud::Matrix& points) : points_(points) {
  const auto n = static_cast<std::int32_t>(points_.rows());
  order_.resize(n);
  std::iota(order_.begin(), order_.end(), 0);
  if (n > 0) {
    nodes_.reserve(static_cast<std::size_t>(2 * n / kLeafSize + 8));
    root_ = build(0, n);
  }
}

std::int32_t KdTree3::build(std::int32_t begin, std::int32_t end) {
  const std::int32_t id = static_cast<std::int32_t>(nodes_.size());
  nodes_.emplace_back();

  if (end - begin <= kLeafSize) {
    nodes_[id].begin = begin;
    nodes_[id].end = end;
    return id;
  }

  Eigen::Vector3d lo = Eigen::Vector3d::Constant(
      std::numeric_limits<double>::infinity());
  Eigen::Vector3d hi = -lo;
  for (std::int32_t i = begin; i < end; ++i) {
    const auto p = points_.row(order_[i]);
    lo = lo.cwiseMin(p.transpose());
    hi = hi.cwiseMax(p.transpose());
  }
  int axis = 0;
  (hi - lo).maxCoeff(&axis);

  const std::int32_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid,
                   order_.begin() + end,
                   [this, axis](std::int32_t a, std::int32_t b) {
                     const double pa = points_(a, axis);
                     const double pb = points_(b, axis);
                     return pa < pb || (pa == pb && a < b);
                   });

  nodes_[id].axis = axis;
  nodes_[id].split = points_(order_[mid], axis);
  const std::int32_t left = build(begin, mid);
  const std::int32_t right = build(mid, end);
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

KdTree3::Hit KdTree3::nearest(const Eigen::Vector3d& query) const {
  if (points_.rows() == 0) {
    throw std::invalid_argument("nearest query on empty KD-tree");
  }
  double best_sq = std::numeric_limits<double>::infinity();
  Eigen::Index best_index = -1;
  search(root_, query, best_sq, best_index);
  return Hit{best_index, std::sqrt(best_sq)};
}

void KdTree3::search(std::int32_t node_id, const Eigen::Vector3d& query,
                     double& best_sq, Eigen::Index& best_index) const {
  const Node& node = nodes_[node_id];
  if (node.axis < 0) {
    for (std::int32_t i = node.begin; i < node.end; ++i) {
      const std::int32_t idx = order_[i];
      const double d_sq =
          (points_.row(idx).transpose() - query).squaredNorm();
      if (d_sq < best_sq || (d_sq == best_sq && idx < best_index)) {
        best_sq = d_sq;
        best_index = idx;
      }
    }
    return;
  }

  const double delta = query[node.axis] - node.split;
  const std::int32_t near_side = delta < 0.0 ? node.left : node.right;
  const std::int32_t far_side = delta < 0.0 ? node.right : node.left;
  search(near_side, query, best_sq, best_index);
  if (delta * delta <= best_sq) {
    search(far_side, query, best_sq, best_index);
  }
}

}  // namespace cemreg
