#include "cemreg/planner.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

#include "cemreg/errors.hpp"

namespace cemreg {

namespace {

// Same cutover as the chamfer routines: an index pays off from 64 points.
constexpr Eigen::Index kIndexThreshold = 64;

double nearest_distance(const KdTree3* index, const PointCloud::Matrix& points,
                        const Eigen::Vector3d& query) {
  if (index) return index->nearest(query).distance;
  double best_sq = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    const double sq = (points.row(i).transpose() - query).squaredNorm();
    if (sq < best_sq) best_sq = sq;
  }
  return std::sqrt(best_sq);
}

}  // namespace

ChamferRewardOracle::ChamferRewardOracle(const PointCloud& source,
                                         const PointCloud& target, int threads)
    : source_(source), target_(target), threads_(std::max(1, threads)) {
  if (source_.empty() || target_.empty())
    throw std::invalid_argument("ChamferRewardOracle: empty cloud");
  if (source_.size() >= kIndexThreshold)
    source_index_ = std::make_unique<KdTree3>(source_);
  if (target_.size() >= kIndexThreshold)
    target_index_ = std::make_unique<KdTree3>(target_);
}

double ChamferRewardOracle::evaluate_one(const Action& action) const {
  const Eigen::Matrix3d rotation = euler_to_rotation(action.euler);
  const Eigen::Matrix3d inverse = rotation.transpose();
  const Eigen::Vector3d& t = action.translation;

  double total = 0.0;
  for (Eigen::Index i = 0; i < source_.size(); ++i) {
    const Eigen::Vector3d moved = rotation * source_.point(i) + t;
    total += nearest_distance(target_index_.get(), target_.points(), moved);
  }
  // The target-side term needs distances to the moved source; pulling the
  // target back through the inverse motion gives the same distances against
  // the static source index.
  for (Eigen::Index i = 0; i < target_.size(); ++i) {
    const Eigen::Vector3d pulled = inverse * (target_.point(i) - t);
    total += nearest_distance(source_index_.get(), source_.points(), pulled);
  }
  return -total;
}

Eigen::VectorXd ChamferRewardOracle::evaluate(
    const std::vector<Action>& actions) const {
  const Eigen::Index n = static_cast<Eigen::Index>(actions.size());
  Eigen::VectorXd rewards(n);
  if (threads_ <= 1 || n < 2) {
    for (Eigen::Index i = 0; i < n; ++i)
      rewards(i) = evaluate_one(actions[static_cast<std::size_t>(i)]);
    return rewards;
  }
  // Candidates are independent; workers fill disjoint slots, so the result
  // does not depend on scheduling.
  const int workers = static_cast<int>(
      std::min<Eigen::Index>(threads_, n));
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([this, &actions, &rewards, n, workers, w]() {
      for (Eigen::Index i = w; i < n; i += workers)
        rewards(i) = evaluate_one(actions[static_cast<std::size_t>(i)]);
    });
  }
  for (std::thread& worker : pool) worker.join();
  return rewards;
}

LatentRewardOracle::LatentRewardOracle(const DynamicModel& model,
                                       const PointCloud& source,
                                       const PointCloud& target)
    : model_(model),
      source_latent_(model.encode(source)),
      target_latent_(model.encode(target)) {}

Eigen::VectorXd LatentRewardOracle::evaluate(
    const std::vector<Action>& actions) const {
  return model_.reward_batch(source_latent_, actions, target_latent_);
}

std::vector<Action> sample_candidates(const SamplingDistribution& distribution,
                                      int count, Rng& rng) {
  std::vector<Action> candidates;
  candidates.reserve(static_cast<std::size_t>(std::max(0, count)));
  for (int c = 0; c < count; ++c) {
    Vector6d v;
    for (int dim = 0; dim < 6; ++dim)
      v(dim) = distribution.mean(dim) +
               std::sqrt(distribution.variance(dim)) * rng.gaussian();
    candidates.push_back(Action::from_vector(v));
  }
  return candidates;
}

std::vector<int> select_elites(const Eigen::VectorXd& rewards, int elites) {
  const int n = static_cast<int>(rewards.size());
  if (elites < 1 || elites > n)
    throw std::invalid_argument("select_elites: need 1 <= elites <= candidate count");
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::partial_sort(order.begin(), order.begin() + elites, order.end(),
                    [&rewards](int a, int b) {
                      if (rewards(a) != rewards(b)) return rewards(a) > rewards(b);
                      return a < b;  // ties keep the earlier candidate
                    });
  order.resize(static_cast<std::size_t>(elites));
  return order;
}

SamplingDistribution update_distribution(const std::vector<Action>& candidates,
                                         const std::vector<int>& elite_indices,
                                         double variance_floor) {
  if (elite_indices.empty())
    throw std::invalid_argument("update_distribution: no elites");
  const double k = static_cast<double>(elite_indices.size());
  SamplingDistribution updated;
  updated.mean.setZero();
  for (int index : elite_indices)
    updated.mean += candidates[static_cast<std::size_t>(index)].to_vector();
  updated.mean /= k;
  updated.variance.setZero();
  for (int index : elite_indices) {
    const Vector6d diff =
        candidates[static_cast<std::size_t>(index)].to_vector() - updated.mean;
    updated.variance += diff.cwiseProduct(diff);
  }
  updated.variance /= k;  // population variance over the elite set
  updated.variance = updated.variance.cwiseMax(variance_floor);
  return updated;
}

PlanResult plan(const RewardOracle& oracle, const CemConfig& config) {
  if (config.iterations < 1) throw ConfigError("cem iterations must be >= 1");
  if (config.candidates < 2) throw ConfigError("cem candidates must be >= 2");
  if (config.elites < 1 || config.elites > config.candidates)
    throw ConfigError("cem elites must be in [1, candidates]");
  if (!(config.variance_floor > 0.0))
    throw ConfigError("cem variance floor must be positive");
  for (int dim = 0; dim < 6; ++dim)
    if (!(config.initial_sigma(dim) > 0.0))
      throw ConfigError("cem initial sigma must be positive in every dimension");

  SamplingDistribution distribution;
  distribution.mean.setZero();
  distribution.variance = config.initial_sigma.cwiseProduct(config.initial_sigma);

  Rng rng(config.seed);
  PlanResult result;
  result.trace.reserve(static_cast<std::size_t>(config.iterations));

  for (int iteration = 0; iteration < config.iterations; ++iteration) {
    // The incumbent mean is candidate 0, inside the sample budget.
    std::vector<Action> candidates;
    candidates.reserve(static_cast<std::size_t>(config.candidates));
    candidates.push_back(Action::from_vector(distribution.mean));
    std::vector<Action> sampled =
        sample_candidates(distribution, config.candidates - 1, rng);
    candidates.insert(candidates.end(), sampled.begin(), sampled.end());

    const Eigen::VectorXd rewards = oracle.evaluate(candidates);
    for (Eigen::Index i = 0; i < rewards.size(); ++i) {
      if (!std::isfinite(rewards(i)))
        throw PlanningError("iteration " + std::to_string(iteration) +
                            ": non-finite reward for candidate " + std::to_string(i));
    }

    const std::vector<int> elite_indices = select_elites(rewards, config.elites);

    IterationStats stats;
    stats.sampled_from = distribution;
    stats.best_action = candidates[static_cast<std::size_t>(elite_indices[0])];
    stats.best_reward = rewards(elite_indices[0]);
    double elite_sum = 0.0;
    for (int index : elite_indices) elite_sum += rewards(index);
    stats.elite_mean_reward = elite_sum / static_cast<double>(elite_indices.size());
    result.trace.push_back(stats);

    distribution = update_distribution(candidates, elite_indices, config.variance_floor);
  }

  result.final_distribution = distribution;
  result.action = config.return_best ? refine_best(result.trace)
                                     : Action::from_vector(distribution.mean);
  return result;
}

Action refine_best(const std::vector<IterationStats>& trace) {
  if (trace.empty()) throw std::invalid_argument("refine_best: empty trace");
  const IterationStats* best = &trace.front();
  for (const IterationStats& stats : trace)
    if (stats.best_reward > best->best_reward) best = &stats;  // earliest ties win
  return best->best_action;
}

}  // namespace cemreg
