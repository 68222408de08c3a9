// Microbenchmarks for the hot paths: chamfer evaluation, nearest-neighbor
// queries, planner iterations, and the latent model's forward/training steps.
#include <benchmark/benchmark.h>

#include "cemreg/dataio.hpp"
#include "cemreg/geometry.hpp"
#include "cemreg/icp.hpp"
#include "cemreg/kdtree.hpp"
#include "cemreg/latent_model.hpp"
#include "cemreg/planner.hpp"
#include "cemreg/rng.hpp"

namespace {

using namespace cemreg;

PointCloud bench_cloud(int points, std::uint64_t seed) {
  return normalize_unit_sphere(sample_surface(SurfaceShape::Torus, points, seed));
}

void BM_ChamferDistance(benchmark::State& state) {
  const int points = static_cast<int>(state.range(0));
  const PointCloud x = bench_cloud(points, 1);
  const PointCloud y = bench_cloud(points, 2);
  for (auto _ : state) benchmark::DoNotOptimize(chamfer_distance(x, y));
  state.SetItemsProcessed(state.iterations() * points);
}
BENCHMARK(BM_ChamferDistance)->Arg(32)->Arg(64)->Arg(256)->Arg(784)->Arg(2048);

void BM_KdTreeBuild(benchmark::State& state) {
  const PointCloud cloud = bench_cloud(static_cast<int>(state.range(0)), 3);
  for (auto _ : state) {
    KdTree3 tree(cloud);
    benchmark::DoNotOptimize(tree);
  }
}
BENCHMARK(BM_KdTreeBuild)->Arg(256)->Arg(1024)->Arg(4096);

void BM_KdTreeNearest(benchmark::State& state) {
  const PointCloud cloud = bench_cloud(static_cast<int>(state.range(0)), 4);
  const PointCloud queries = bench_cloud(256, 5);
  const KdTree3 tree(cloud);
  for (auto _ : state)
    for (Eigen::Index i = 0; i < queries.points().rows(); ++i)
      benchmark::DoNotOptimize(
          tree.nearest(queries.points().row(i).transpose()));
  state.SetItemsProcessed(state.iterations() * queries.points().rows());
}
BENCHMARK(BM_KdTreeNearest)->Arg(256)->Arg(1024)->Arg(4096);

// One full planning run at a reduced budget; the dominant cost is candidate
// evaluation, so items processed counts candidate-cloud transforms.
void BM_ChamferCemPlan(benchmark::State& state) {
  const PointCloud source = bench_cloud(256, 6);
  const PointCloud target =
      apply_action(source, Action(Eigen::Vector3d(0.2, -0.1, 0.4),
                                  Eigen::Vector3d(0.1, 0.0, -0.2)));
  const ChamferRewardOracle oracle(source, target, 1);
  CemConfig config;
  config.iterations = 3;
  config.candidates = static_cast<int>(state.range(0));
  config.elites = std::max(2, config.candidates / 40);
  for (auto _ : state) {
    config.seed = static_cast<std::uint64_t>(state.iterations());
    benchmark::DoNotOptimize(plan(oracle, config));
  }
  state.SetItemsProcessed(state.iterations() * config.iterations *
                          config.candidates);
}
BENCHMARK(BM_ChamferCemPlan)->Arg(100)->Arg(400);

void BM_EncodeCloud(benchmark::State& state) {
  const DynamicModel model(ModelConfig{}, 7);
  const PointCloud cloud = bench_cloud(784, 8);
  for (auto _ : state) benchmark::DoNotOptimize(model.encode(cloud));
}
BENCHMARK(BM_EncodeCloud);

// The latent planner's inner loop: transform + evaluation over a candidate
// batch, without re-encoding the clouds.
void BM_LatentRewardBatch(benchmark::State& state) {
  const DynamicModel model(ModelConfig{}, 9);
  const PointCloud cloud = bench_cloud(784, 10);
  const DynamicModel::Latent source = model.encode(cloud);
  const DynamicModel::Latent target = model.encode(apply_action(
      cloud, Action(Eigen::Vector3d(0.3, 0.0, -0.2), Eigen::Vector3d(0.1, 0.2, 0.0))));
  Rng rng(11);
  SamplingDistribution distribution;
  const std::vector<Action> actions =
      sample_candidates(distribution, static_cast<int>(state.range(0)), rng);
  for (auto _ : state)
    benchmark::DoNotOptimize(model.reward_batch(source, actions, target));
  state.SetItemsProcessed(state.iterations() * actions.size());
}
BENCHMARK(BM_LatentRewardBatch)->Arg(100)->Arg(1000);

void BM_TrainingBatch(benchmark::State& state) {
  ModelConfig config;
  config.latent_dim = 32;
  config.hidden = 64;
  config.decoder_points = 64;
  config.decoder_hidden = 64;
  DynamicModel model(config, 12);

  std::vector<RegistrationPair> pairs;
  for (int i = 0; i < 4; ++i)
    pairs.push_back(make_pair(bench_cloud(128, 13 + i), 45.0, 0.5, std::nullopt,
                              20 + i));
  const std::vector<TrainingSample> samples =
      generate_training_samples(pairs, 4, 1.0, 30);
  ModelGrads grads = make_grads(model);
  const LossOptions options;
  for (auto _ : state) {
    grads.zero();
    benchmark::DoNotOptimize(batch_losses(model, samples, options, &grads));
  }
  state.SetItemsProcessed(state.iterations() * samples.size());
}
BENCHMARK(BM_TrainingBatch);

void BM_IcpRegister(benchmark::State& state) {
  const PointCloud source = bench_cloud(static_cast<int>(state.range(0)), 40);
  const PointCloud target =
      apply_action(source, Action(Eigen::Vector3d(0.05, -0.03, 0.08),
                                  Eigen::Vector3d(0.02, 0.01, -0.04)));
  for (auto _ : state)
    benchmark::DoNotOptimize(icp_register(source, target, IcpConfig{}));
}
BENCHMARK(BM_IcpRegister)->Arg(256)->Arg(784);

}  // namespace

BENCHMARK_MAIN();
