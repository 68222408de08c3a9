#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "cemreg/geometry.hpp"
#include "cemreg/kdtree.hpp"
#include "cemreg/latent_model.hpp"
#include "cemreg/point_cloud.hpp"

namespace cemreg {

// Diagonal Gaussian over the 6 action dimensions.
struct SamplingDistribution {
  Vector6d mean = Vector6d::Zero();
  Vector6d variance = Vector6d::Ones();
};

struct CemConfig {
  int iterations = 10;   // distribution updates
  int candidates = 1000; // samples per iteration, current mean included
  int elites = 25;
  // Initial spread: generous over rotations (radians) and translations.
  Vector6d initial_sigma = (Vector6d() << 0.8, 0.8, 0.8, 0.5, 0.5, 0.5).finished();
  double variance_floor = 1e-8;
  std::uint64_t seed = 0;
  bool return_best = false;  // return the best-ever candidate instead of the mean
};

// Scores candidate actions; higher is better.
class RewardOracle {
 public:
  virtual ~RewardOracle() = default;
  virtual Eigen::VectorXd evaluate(const std::vector<Action>& actions) const = 0;
};

/**
 * Exact objective: reward = negated chamfer distance between the moved
 * source and the target. Nearest-neighbor structures over both clouds are
 * built once; the source-direction query runs against the target index and
 * the target-direction query is folded through the inverse motion (rigid
 * motions preserve distances), so no per-candidate index is ever built.
 */
class ChamferRewardOracle : public RewardOracle {
 public:
  ChamferRewardOracle(const PointCloud& source, const PointCloud& target,
                      int threads = 1);

  Eigen::VectorXd evaluate(const std::vector<Action>& actions) const override;
  double evaluate_one(const Action& action) const;

 private:
  PointCloud source_;
  PointCloud target_;
  std::unique_ptr<KdTree3> source_index_;  // built for 64+ points
  std::unique_ptr<KdTree3> target_index_;
  int threads_ = 1;
};

// Learned objective: both clouds are encoded once, then every candidate is
// scored by the model's transform + evaluation nets in one batched pass.
class LatentRewardOracle : public RewardOracle {
 public:
  LatentRewardOracle(const DynamicModel& model, const PointCloud& source,
                     const PointCloud& target);

  Eigen::VectorXd evaluate(const std::vector<Action>& actions) const override;

  const DynamicModel::Latent& source_latent() const { return source_latent_; }
  const DynamicModel::Latent& target_latent() const { return target_latent_; }

 private:
  const DynamicModel& model_;
  DynamicModel::Latent source_latent_;
  DynamicModel::Latent target_latent_;
};

// One Gaussian draw per dimension, in a fixed order; angles wrap.
std::vector<Action> sample_candidates(const SamplingDistribution& distribution,
                                      int count, Rng& rng);

// Indices of the `elites` highest rewards; equal rewards keep input order.
std::vector<int> select_elites(const Eigen::VectorXd& rewards, int elites);

// Refit: per-dimension elite mean and population variance (/K), with the
// variance floor applied.
SamplingDistribution update_distribution(const std::vector<Action>& candidates,
                                         const std::vector<int>& elite_indices,
                                         double variance_floor);

struct IterationStats {
  SamplingDistribution sampled_from;  // distribution this iteration drew from
  double best_reward = 0.0;
  double elite_mean_reward = 0.0;
  Action best_action;
};

struct PlanResult {
  Action action;  // final mean (or best-ever candidate with return_best)
  SamplingDistribution final_distribution;
  std::vector<IterationStats> trace;
};

/**
 * Cross-entropy planning: repeatedly sample candidates, keep the top
 * `elites`, refit the Gaussian to them. The current mean always rides along
 * as candidate 0 of each iteration, so the incumbent is never lost to an
 * unlucky draw. Deterministic for a fixed seed.
 */
PlanResult plan(const RewardOracle& oracle, const CemConfig& config);

// Best-ever action across a trace (earliest iteration wins ties).
Action refine_best(const std::vector<IterationStats>& trace);

}  // namespace cemreg
