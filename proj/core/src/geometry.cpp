#include "cemreg/geometry.hpp"

#include <cmath>
#include <stdexcept>

#include "cemreg/errors.hpp"
#include "cemreg/kdtree.hpp"
#include "cemreg/rng.hpp"

namespace cemreg {

namespace {

constexpr Eigen::Index kBruteForceLimit = 64;
constexpr double kGimbalEps = 1e-8;

void require_finite(const Eigen::Vector3d& v, const char* what) {
  if (!v.allFinite()) {
    throw std::invalid_argument(std::string(what) + " is not finite");
  }
}

// Nearest-neighbor distances and indices from each query row into `targets`.
void nearest_all(const PointCloud::Matrix& queries,
                 const PointCloud::Matrix& targets,
                 std::vector<Eigen::Index>& indices, double& distance_sum) {
  const Eigen::Index nq = queries.rows();
  const Eigen::Index nt = targets.rows();
  indices.resize(static_cast<std::size_t>(nq));

  if (nt >= kBruteForceLimit) {
    KdTree3 tree(targets);
    for (Eigen::Index i = 0; i < nq; ++i) {
      const auto hit = tree.nearest(queries.row(i).transpose());
      indices[static_cast<std::size_t>(i)] = hit.index;
      distance_sum += hit.distance;
    }
    return;
  }
  for (Eigen::Index i = 0; i < nq; ++i) {
    double best_sq = std::numeric_limits<double>::infinity();
    Eigen::Index best = -1;
    for (Eigen::Index j = 0; j < nt; ++j) {
      const double d_sq = (targets.row(j) - queries.row(i)).squaredNorm();
      if (d_sq < best_sq) {
        best_sq = d_sq;
        best = j;
      }
    }
    indices[static_cast<std::size_t>(i)] = best;
    distance_sum += std::sqrt(best_sq);
  }
}

}  // namespace

double wrap_angle(double radians) {
  if (!std::isfinite(radians)) {
    throw std::invalid_argument("angle is not finite");
  }
  return std::remainder(radians, 2.0 * kPi);
}

Action::Action(const Eigen::Vector3d& e, const Eigen::Vector3d& t)
    : translation(t) {
  require_finite(e, "euler angles");
  require_finite(t, "translation");
  euler = Eigen::Vector3d(wrap_angle(e.x()), wrap_angle(e.y()),
                          wrap_angle(e.z()));
}

Action Action::from_vector(const Vector6d& v) {
  return Action(v.head<3>(), v.tail<3>());
}

Vector6d Action::to_vector() const {
  Vector6d v;
  v << euler, translation;
  return v;
}

Eigen::Matrix3d euler_to_rotation(const Eigen::Vector3d& euler) {
  require_finite(euler, "euler angles");
  const double cx = std::cos(euler.x()), sx = std::sin(euler.x());
  const double cy = std::cos(euler.y()), sy = std::sin(euler.y());
  const double cz = std::cos(euler.z()), sz = std::sin(euler.z());

  // Rz(e3) * Ry(e2) * Rx(e1), written out.
  Eigen::Matrix3d r;
  r << cz * cy, cz * sy * sx - sz * cx, cz * sy * cx + sz * sx,  //
      sz * cy, sz * sy * sx + cz * cx, sz * sy * cx - cz * sx,   //
      -sy, cy * sx, cy * cx;
  return r;
}

Eigen::Vector3d rotation_to_euler(const Eigen::Matrix3d& r) {
  // With R = Rz(e3) Ry(e2) Rx(e1):
  //   R(2,0) = -sin e2,  R(2,1) = cos e2 sin e1,  R(2,2) = cos e2 cos e1,
  //   R(1,0) = sin e3 cos e2,  R(0,0) = cos e3 cos e2.
  const double cos_e2 = std::sqrt(r(2, 1) * r(2, 1) + r(2, 2) * r(2, 2));
  const double e2 = std::atan2(-r(2, 0), cos_e2);
  if (cos_e2 < kGimbalEps) {
    // Gimbal lock: only e3 -/+ e1 is determined. Fix e1 = 0; then
    // R(0,1) = -sin e3 and R(1,1) = cos e3 for either sign of e2.
    return {0.0, e2, std::atan2(-r(0, 1), r(1, 1))};
  }
  return {std::atan2(r(2, 1), r(2, 2)), e2, std::atan2(r(1, 0), r(0, 0))};
}

PointCloud apply_action(const PointCloud& cloud, const Action& action) {
  if (cloud.empty()) {
    throw std::invalid_argument("apply_action on empty point cloud");
  }
  const Eigen::Matrix3d r = euler_to_rotation(action.euler);
  PointCloud::Matrix out = cloud.points() * r.transpose();
  out.rowwise() += action.translation.transpose();
  return PointCloud(std::move(out));
}

Action inverse_action(const Action& action) {
  const Eigen::Matrix3d r = euler_to_rotation(action.euler);
  const Eigen::Matrix3d r_inv = r.transpose();
  return Action(rotation_to_euler(r_inv), -(r_inv * action.translation));
}

Action compose_actions(const Action& second, const Action& first) {
  const Eigen::Matrix3d r2 = euler_to_rotation(second.euler);
  const Eigen::Matrix3d r1 = euler_to_rotation(first.euler);
  return Action(rotation_to_euler(r2 * r1),
                r2 * first.translation + second.translation);
}

double chamfer_distance(const PointCloud& a, const PointCloud& b) {
  if (a.empty() || b.empty()) {
    throw std::invalid_argument("chamfer_distance on empty point cloud");
  }
  // Per-direction accumulators keep the result exactly symmetric in the
  // arguments: the final addition commutes even in floating point.
  std::vector<Eigen::Index> scratch;
  double forward = 0.0;
  double backward = 0.0;
  nearest_all(a.points(), b.points(), scratch, forward);
  nearest_all(b.points(), a.points(), scratch, backward);
  return forward + backward;
}

ChamferCorrespondences chamfer_correspondences(const PointCloud& a,
                                               const PointCloud& b) {
  if (a.empty() || b.empty()) {
    throw std::invalid_argument("chamfer_correspondences on empty point cloud");
  }
  ChamferCorrespondences out;
  double forward = 0.0;
  double backward = 0.0;
  nearest_all(a.points(), b.points(), out.nearest_in_second, forward);
  nearest_all(b.points(), a.points(), out.nearest_in_first, backward);
  out.distance = forward + backward;
  return out;
}

PointCloud normalize_unit_sphere(const PointCloud& cloud) {
  if (cloud.size() < 2) {
    throw std::invalid_argument("normalize_unit_sphere needs >= 2 points");
  }
  PointCloud::Matrix centered =
      cloud.points().rowwise() - cloud.points().colwise().mean();
  const double scale = centered.rowwise().norm().maxCoeff();
  if (scale < 1e-12) {
    throw DegenerateInputError(
        "normalize_unit_sphere: all points are identical");
  }
  return PointCloud(PointCloud::Matrix(centered / scale));
}

PointCloud add_gaussian_noise(const PointCloud& cloud, double stddev,
                              double clip, std::uint64_t seed) {
  if (stddev < 0.0 || clip < 0.0) {
    throw std::invalid_argument("noise stddev and clip must be >= 0");
  }
  if (stddev == 0.0) return cloud;

  Rng rng(seed);
  PointCloud::Matrix out = cloud.points();
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    for (Eigen::Index j = 0; j < 3; ++j) {
      out(i, j) += std::clamp(rng.gaussian(0.0, stddev), -clip, clip);
    }
  }
  return PointCloud(std::move(out));
}

RegistrationErrors registration_errors(const Action& predicted,
                                       const Action& ground_truth) {
  RegistrationErrors errors;
  for (int i = 0; i < 3; ++i) {
    errors.rotation_deg[i] =
        to_degrees(wrap_angle(predicted.euler[i] - ground_truth.euler[i]));
  }
  errors.translation = predicted.translation - ground_truth.translation;
  return errors;
}

}  // namespace cemreg
