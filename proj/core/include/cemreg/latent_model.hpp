#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "cemreg/checkpoint.hpp"
#include "cemreg/dataio.hpp"
#include "cemreg/geometry.hpp"
#include "cemreg/nnet.hpp"
#include "cemreg/point_cloud.hpp"

namespace cemreg {

struct ModelConfig {
  int latent_dim = 128;
  int hidden = 256;          // width inside the transform / evaluation nets
  int decoder_points = 256;  // points the decoder reconstructs
  int decoder_hidden = 256;
  std::vector<int> encoder_hidden = {64, 128};
  // Relu for real models; Tanh keeps everything smooth for finite-difference
  // gradient checks.
  nnet::Activation activation = nnet::Activation::Relu;
};

/**
 * Latent dynamics over point clouds, built from five dense nets:
 *
 *   encoder    per-point MLP + max-pool + linear head  -> latent vector
 *   decoder    latent vector -> reconstructed cloud
 *   transform  (latent, rigid action) -> predicted latent of the moved cloud
 *   evaluation (latent, latent) -> predicted alignment cost of the two clouds
 *
 * The reward of an action is the negated predicted cost between the
 * action-transformed source latent and the target latent, so a planner can
 * search rigid motions without touching raw points.
 */
class DynamicModel {
 public:
  using Latent = Eigen::VectorXf;

  DynamicModel() = default;
  DynamicModel(const ModelConfig& config, std::uint64_t seed);

  const ModelConfig& config() const { return config_; }
  std::uint64_t init_seed() const { return init_seed_; }
  int latent_dim() const { return config_.latent_dim; }

  Latent encode(const PointCloud& cloud) const;
  PointCloud decode(const Latent& z) const;
  Latent predict_transformed_latent(const Latent& z, const Action& action) const;
  float evaluate_alignment(const Latent& za, const Latent& zb) const;

  double reward(const Latent& source, const Action& action,
                const Latent& target) const;
  // One transform/evaluation pass over all actions, stacked row-wise.
  Eigen::VectorXd reward_batch(const Latent& source,
                               const std::vector<Action>& actions,
                               const Latent& target) const;

  nnet::Mlp& point_net() { return point_net_; }
  const nnet::Mlp& point_net() const { return point_net_; }
  nnet::Mlp& head() { return head_; }
  const nnet::Mlp& head() const { return head_; }
  nnet::Mlp& decoder() { return decoder_; }
  const nnet::Mlp& decoder() const { return decoder_; }
  nnet::Mlp& transform_net() { return transform_net_; }
  const nnet::Mlp& transform_net() const { return transform_net_; }
  nnet::Mlp& evaluation_net() { return evaluation_net_; }
  const nnet::Mlp& evaluation_net() const { return evaluation_net_; }

  void for_each_parameter(
      const std::function<void(const std::string&, nnet::Matrix&)>& fn);
  void for_each_parameter(
      const std::function<void(const std::string&, const nnet::Matrix&)>& fn) const;
  std::size_t parameter_count() const;

  Checkpoint to_checkpoint() const;
  static DynamicModel from_checkpoint(const Checkpoint& checkpoint);

 private:
  ModelConfig config_;
  std::uint64_t init_seed_ = 0;
  nnet::Mlp point_net_;       // 3 -> encoder_hidden... -> latent_dim
  nnet::Mlp head_;            // latent_dim -> latent_dim, linear
  nnet::Mlp decoder_;         // latent_dim -> decoder_hidden -> 3*decoder_points
  nnet::Mlp transform_net_;   // latent_dim+6 -> hidden -> hidden -> latent_dim
  nnet::Mlp evaluation_net_;  // 2*latent_dim -> hidden -> hidden -> 1
};

// Convenience wrappers pairing the model with the checkpoint file format.
void save_model(const DynamicModel& model, const std::filesystem::path& path);
// expect_latent_dim guards CLI configs against loading a mismatched model.
DynamicModel load_model(const std::filesystem::path& path,
                        int expect_latent_dim = 0);

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

/**
 * One supervision triple: a source cloud, a random action applied to it, and
 * the pair's target cloud. The alignment targets (chamfer source->target and
 * moved-source->target) are cached here so epochs never recompute them.
 */
struct TrainingSample {
  PointCloud source;
  PointCloud transformed;  // action applied to source
  PointCloud target;
  Action action;
  double chamfer_source_target = 0.0;
  double chamfer_transformed_target = 0.0;
};

TrainingSample make_training_sample(const PointCloud& source,
                                    const Action& action,
                                    const PointCloud& target);

// actions_per_pair samples per registration pair; action components drawn
// i.i.d. Gaussian(0, action_sigma^2), angles wrapped into [-pi, pi].
std::vector<TrainingSample> generate_training_samples(
    const std::vector<RegistrationPair>& pairs, int actions_per_pair,
    double action_sigma, std::uint64_t seed);

struct LossBreakdown {
  double total = 0.0;
  double reconstruction = 0.0;
  double transform = 0.0;
  double evaluation = 0.0;
};

struct ModelGrads {
  nnet::Mlp::Grads point, head, decoder, transform, evaluation;

  void zero();
};
ModelGrads make_grads(const DynamicModel& model);

// Parameter/gradient blocks in matching order, ready for the optimizer.
std::vector<nnet::ParamRef> parameter_refs(DynamicModel& model,
                                           ModelGrads& grads);

struct LossOptions {
  // By default the transform and evaluation losses treat encoder outputs as
  // constants (only reconstruction shapes the encoder); switching this on
  // lets their gradients flow into the encoder as well.
  bool joint_encoder_flow = false;
};

// Mean losses over one batch. With `grads` non-null, also accumulates exact
// reverse-mode parameter gradients (of the total loss) into it.
LossBreakdown batch_losses(const DynamicModel& model,
                           std::span<const TrainingSample> batch,
                           const LossOptions& options, ModelGrads* grads);

struct TrainOptions {
  int epochs = 30;
  int batch_size = 16;
  nnet::AdamConfig adam;
  std::uint64_t seed = 0;  // epoch shuffling
  bool joint_encoder_flow = false;
  std::function<void(int epoch, const LossBreakdown&)> on_epoch;
};

struct TrainReport {
  std::vector<LossBreakdown> epochs;  // per-epoch means over batches
};

// Shuffled mini-batch Adam. Throws TrainingError (with epoch/batch and the
// loss breakdown in the message) the moment any loss turns non-finite.
TrainReport train_model(DynamicModel& model,
                        std::span<const TrainingSample> samples,
                        const TrainOptions& options);

}  // namespace cemreg
