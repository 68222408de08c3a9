#include "cemreg/latent_model.hpp"

#include <array>
#include <cmath>
#include <cstdio>

#include "cemreg/errors.hpp"
#include "cemreg/rng.hpp"

namespace cemreg {

namespace {

nnet::Matrix cloud_to_f32(const PointCloud& cloud) {
  return cloud.points().cast<float>();
}

Eigen::RowVectorXf action_row(const Action& action) {
  const Vector6d v = action.to_vector();
  Eigen::RowVectorXf row(6);
  for (int i = 0; i < 6; ++i) row(i) = static_cast<float>(v(i));
  return row;
}

void validate_config(const ModelConfig& config) {
  if (config.latent_dim <= 0) throw ConfigError("model latent_dim must be positive");
  if (config.hidden <= 0) throw ConfigError("model hidden width must be positive");
  if (config.decoder_points <= 0) throw ConfigError("model decoder_points must be positive");
  if (config.decoder_hidden <= 0) throw ConfigError("model decoder_hidden must be positive");
  if (config.encoder_hidden.empty())
    throw ConfigError("model encoder needs at least one hidden width");
  for (int w : config.encoder_hidden)
    if (w <= 0) throw ConfigError("model encoder widths must be positive");
}

}  // namespace

DynamicModel::DynamicModel(const ModelConfig& config, std::uint64_t seed)
    : config_(config), init_seed_(seed) {
  validate_config(config);
  const nnet::Activation act = config.activation;
  const int d = config.latent_dim;

  std::vector<int> point_sizes{3};
  point_sizes.insert(point_sizes.end(), config.encoder_hidden.begin(),
                     config.encoder_hidden.end());
  point_sizes.push_back(d);
  point_net_ = nnet::Mlp(point_sizes,
                         std::vector<nnet::Activation>(point_sizes.size() - 1, act));
  head_ = nnet::Mlp({d, d}, {nnet::Activation::Identity});
  decoder_ = nnet::Mlp({d, config.decoder_hidden, 3 * config.decoder_points},
                       {act, nnet::Activation::Identity});
  transform_net_ = nnet::Mlp({d + 6, config.hidden, config.hidden, d},
                             {act, act, nnet::Activation::Identity});
  evaluation_net_ = nnet::Mlp({2 * d, config.hidden, config.hidden, 1},
                              {act, act, nnet::Activation::Identity});

  Rng rng(seed);
  point_net_.init_params(rng);
  head_.init_params(rng);
  decoder_.init_params(rng);
  transform_net_.init_params(rng);
  evaluation_net_.init_params(rng);
}

DynamicModel::Latent DynamicModel::encode(const PointCloud& cloud) const {
  if (cloud.empty()) throw std::invalid_argument("encode: empty cloud");
  // One forward pass per point: each feature row then depends only on that
  // point's coordinates, making the pooled code exactly invariant to point
  // order and duplication. (A batched matrix product rounds a row's last bits
  // differently depending on its position in the batch.)
  const nnet::Matrix input = cloud_to_f32(cloud);
  nnet::Matrix pooled;
  for (Eigen::Index i = 0; i < input.rows(); ++i) {
    const nnet::Matrix features = point_net_.forward(nnet::Matrix(input.row(i)));
    pooled = (i == 0) ? features : pooled.cwiseMax(features).eval();
  }
  const nnet::Matrix z = head_.forward(pooled);
  return z.row(0).transpose();
}

PointCloud DynamicModel::decode(const Latent& z) const {
  if (z.size() != config_.latent_dim)
    throw DimensionError("decode: latent has size " + std::to_string(z.size()) +
                         ", model expects " + std::to_string(config_.latent_dim));
  const nnet::Matrix out = decoder_.forward(z.transpose());
  PointCloud::Matrix points(config_.decoder_points, 3);
  for (int i = 0; i < config_.decoder_points; ++i)
    for (int k = 0; k < 3; ++k)
      points(i, k) = static_cast<double>(out(0, 3 * i + k));
  return PointCloud(std::move(points));
}

DynamicModel::Latent DynamicModel::predict_transformed_latent(
    const Latent& z, const Action& action) const {
  if (z.size() != config_.latent_dim)
    throw DimensionError("predict_transformed_latent: latent size mismatch");
  nnet::Matrix input(1, config_.latent_dim + 6);
  input.leftCols(config_.latent_dim) = z.transpose();
  input.rightCols(6) = action_row(action);
  return transform_net_.forward(input).row(0).transpose();
}

float DynamicModel::evaluate_alignment(const Latent& za, const Latent& zb) const {
  if (za.size() != config_.latent_dim || zb.size() != config_.latent_dim)
    throw DimensionError("evaluate_alignment: latent size mismatch");
  nnet::Matrix input(1, 2 * config_.latent_dim);
  input.leftCols(config_.latent_dim) = za.transpose();
  input.rightCols(config_.latent_dim) = zb.transpose();
  return evaluation_net_.forward(input)(0, 0);
}

double DynamicModel::reward(const Latent& source, const Action& action,
                            const Latent& target) const {
  return -static_cast<double>(
      evaluate_alignment(predict_transformed_latent(source, action), target));
}

Eigen::VectorXd DynamicModel::reward_batch(const Latent& source,
                                           const std::vector<Action>& actions,
                                           const Latent& target) const {
  if (source.size() != config_.latent_dim || target.size() != config_.latent_dim)
    throw DimensionError("reward_batch: latent size mismatch");
  const int d = config_.latent_dim;
  const Eigen::Index n = static_cast<Eigen::Index>(actions.size());
  nnet::Matrix input(n, d + 6);
  for (Eigen::Index i = 0; i < n; ++i) {
    input.row(i).head(d) = source.transpose();
    input.row(i).tail(6) = action_row(actions[static_cast<std::size_t>(i)]);
  }
  const nnet::Matrix moved = transform_net_.forward(input);
  nnet::Matrix pair(n, 2 * d);
  pair.leftCols(d) = moved;
  for (Eigen::Index i = 0; i < n; ++i) pair.row(i).tail(d) = target.transpose();
  const nnet::Matrix cost = evaluation_net_.forward(pair);
  return -cost.col(0).cast<double>();
}

namespace {

template <typename ModelT, typename Fn>
void visit_parameters(ModelT& model, const Fn& fn) {
  const std::array<std::pair<const char*, decltype(&model.point_net())>, 5> parts{
      {{"encoder.point", &model.point_net()},
       {"encoder.head", &model.head()},
       {"decoder", &model.decoder()},
       {"transform", &model.transform_net()},
       {"evaluation", &model.evaluation_net()}}};
  for (const auto& [prefix, net] : parts) {
    for (std::size_t l = 0; l < net->layer_count(); ++l) {
      const std::string base = std::string(prefix) + "." + std::to_string(l);
      fn(base + ".weight", net->weight(l));
      fn(base + ".bias", net->bias(l));
    }
  }
}

}  // namespace

void DynamicModel::for_each_parameter(
    const std::function<void(const std::string&, nnet::Matrix&)>& fn) {
  visit_parameters(*this, fn);
}

void DynamicModel::for_each_parameter(
    const std::function<void(const std::string&, const nnet::Matrix&)>& fn) const {
  visit_parameters(*this, fn);
}

std::size_t DynamicModel::parameter_count() const {
  std::size_t n = 0;
  for_each_parameter([&n](const std::string&, const nnet::Matrix& m) {
    n += static_cast<std::size_t>(m.size());
  });
  return n;
}

Checkpoint DynamicModel::to_checkpoint() const {
  Checkpoint checkpoint;
  checkpoint.latent_dim = static_cast<std::uint32_t>(config_.latent_dim);
  checkpoint.seed = init_seed_;
  for_each_parameter([&checkpoint](const std::string& name, const nnet::Matrix& m) {
    checkpoint.tensors.emplace_back(name, nnet::to_tensor(m));
  });
  // The activation cannot be recovered from tensor shapes, so it rides along
  // as a one-element tensor.
  nnet::Tensor act;
  act.shape = {1};
  act.values = {static_cast<float>(static_cast<int>(config_.activation))};
  checkpoint.tensors.emplace_back("config.activation", std::move(act));
  return checkpoint;
}

DynamicModel DynamicModel::from_checkpoint(const Checkpoint& checkpoint) {
  const auto need = [&checkpoint](const std::string& name) {
    const nnet::Tensor* t = checkpoint.find(name);
    if (!t)
      throw CorruptCheckpointError("checkpoint lacks tensor '" + name + "'");
    return nnet::matrix_from_tensor(*t);
  };
  const auto layer_count = [&checkpoint](const std::string& prefix) {
    std::size_t l = 0;
    while (checkpoint.find(prefix + "." + std::to_string(l) + ".weight")) ++l;
    if (l == 0)
      throw CorruptCheckpointError("checkpoint lacks tensors for '" + prefix + "'");
    return l;
  };

  // Reconstruct the architecture from the stored shapes.
  ModelConfig config;
  const std::size_t point_layers = layer_count("encoder.point");
  config.encoder_hidden.clear();
  for (std::size_t l = 0; l + 1 < point_layers; ++l)
    config.encoder_hidden.push_back(static_cast<int>(
        need("encoder.point." + std::to_string(l) + ".weight").cols()));
  config.latent_dim = static_cast<int>(
      need("encoder.point." + std::to_string(point_layers - 1) + ".weight").cols());
  if (config.latent_dim != static_cast<int>(checkpoint.latent_dim))
    throw CorruptCheckpointError(
        "checkpoint header says latent_dim " + std::to_string(checkpoint.latent_dim) +
        " but encoder tensors produce " + std::to_string(config.latent_dim));
  config.hidden = static_cast<int>(need("transform.0.weight").cols());
  config.decoder_hidden = static_cast<int>(need("decoder.0.weight").cols());
  const Eigen::Index decoder_out = need("decoder.1.weight").cols();
  if (decoder_out % 3 != 0)
    throw CorruptCheckpointError("decoder output width is not a multiple of 3");
  config.decoder_points = static_cast<int>(decoder_out / 3);
  if (const nnet::Tensor* act = checkpoint.find("config.activation")) {
    if (act->values.size() != 1)
      throw CorruptCheckpointError("config.activation must hold one value");
    config.activation = static_cast<nnet::Activation>(
        static_cast<int>(act->values[0]));
  }

  DynamicModel model(config, checkpoint.seed);
  model.for_each_parameter([&need](const std::string& name, nnet::Matrix& m) {
    const nnet::Matrix loaded = need(name);
    if (loaded.rows() != m.rows() || loaded.cols() != m.cols())
      throw CorruptCheckpointError("tensor '" + name + "' has shape " +
                                   std::to_string(loaded.rows()) + "x" +
                                   std::to_string(loaded.cols()) + ", expected " +
                                   std::to_string(m.rows()) + "x" +
                                   std::to_string(m.cols()));
    m = loaded;
  });
  return model;
}

void save_model(const DynamicModel& model, const std::filesystem::path& path) {
  save_checkpoint_file(model.to_checkpoint(), path);
}

DynamicModel load_model(const std::filesystem::path& path, int expect_latent_dim) {
  const Checkpoint checkpoint = load_checkpoint_file(path);
  if (expect_latent_dim > 0 &&
      static_cast<int>(checkpoint.latent_dim) != expect_latent_dim)
    throw DimensionError("checkpoint " + path.string() + " holds latent_dim " +
                         std::to_string(checkpoint.latent_dim) +
                         ", configuration asks for " +
                         std::to_string(expect_latent_dim));
  return DynamicModel::from_checkpoint(checkpoint);
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

TrainingSample make_training_sample(const PointCloud& source,
                                    const Action& action,
                                    const PointCloud& target) {
  if (source.empty() || target.empty())
    throw std::invalid_argument("make_training_sample: empty cloud");
  TrainingSample sample;
  sample.source = source;
  sample.action = action;
  sample.transformed = apply_action(source, action);
  sample.target = target;
  sample.chamfer_source_target = chamfer_distance(source, target);
  sample.chamfer_transformed_target = chamfer_distance(sample.transformed, target);
  return sample;
}

std::vector<TrainingSample> generate_training_samples(
    const std::vector<RegistrationPair>& pairs, int actions_per_pair,
    double action_sigma, std::uint64_t seed) {
  if (actions_per_pair <= 0)
    throw std::invalid_argument("generate_training_samples: actions_per_pair must be positive");
  if (!(action_sigma >= 0.0))
    throw std::invalid_argument("generate_training_samples: action_sigma must be non-negative");
  Rng rng(seed);
  std::vector<TrainingSample> samples;
  samples.reserve(pairs.size() * static_cast<std::size_t>(actions_per_pair));
  for (const RegistrationPair& pair : pairs) {
    for (int k = 0; k < actions_per_pair; ++k) {
      Eigen::Vector3d euler, translation;
      for (int i = 0; i < 3; ++i) euler(i) = rng.gaussian(0.0, action_sigma);
      for (int i = 0; i < 3; ++i) translation(i) = rng.gaussian(0.0, action_sigma);
      samples.push_back(make_training_sample(pair.source,
                                             Action(euler, translation),
                                             pair.target));
    }
  }
  return samples;
}

void ModelGrads::zero() {
  point.zero();
  head.zero();
  decoder.zero();
  transform.zero();
  evaluation.zero();
}

ModelGrads make_grads(const DynamicModel& model) {
  ModelGrads grads;
  grads.point = model.point_net().make_grads();
  grads.head = model.head().make_grads();
  grads.decoder = model.decoder().make_grads();
  grads.transform = model.transform_net().make_grads();
  grads.evaluation = model.evaluation_net().make_grads();
  return grads;
}

std::vector<nnet::ParamRef> parameter_refs(DynamicModel& model, ModelGrads& grads) {
  std::vector<nnet::ParamRef> refs;
  const auto add = [&refs](nnet::Mlp& net, nnet::Mlp::Grads& g) {
    for (std::size_t l = 0; l < net.layer_count(); ++l) {
      refs.push_back({net.weight(l).data(), g.weights[l].data(), net.weight(l).size()});
      refs.push_back({net.bias(l).data(), g.biases[l].data(), net.bias(l).size()});
    }
  };
  add(model.point_net(), grads.point);
  add(model.head(), grads.head);
  add(model.decoder(), grads.decoder);
  add(model.transform_net(), grads.transform);
  add(model.evaluation_net(), grads.evaluation);
  return refs;
}

LossBreakdown batch_losses(const DynamicModel& model,
                           std::span<const TrainingSample> batch,
                           const LossOptions& options, ModelGrads* grads) {
  if (batch.empty()) throw std::invalid_argument("batch_losses: empty batch");
  const Eigen::Index b = static_cast<Eigen::Index>(batch.size());
  const int d = model.config().latent_dim;
  const int m = model.config().decoder_points;

  // Clouds stacked by role: rows [0,b) are sources, [b,2b) moved sources,
  // [2b,3b) targets. Their points run through the per-point net as one batch.
  std::vector<const PointCloud*> clouds(static_cast<std::size_t>(3 * b));
  for (Eigen::Index i = 0; i < b; ++i) {
    const TrainingSample& sample = batch[static_cast<std::size_t>(i)];
    clouds[static_cast<std::size_t>(i)] = &sample.source;
    clouds[static_cast<std::size_t>(b + i)] = &sample.transformed;
    clouds[static_cast<std::size_t>(2 * b + i)] = &sample.target;
  }
  std::vector<int> sizes;
  sizes.reserve(clouds.size());
  Eigen::Index total_points = 0;
  for (const PointCloud* cloud : clouds) {
    if (cloud->empty()) throw std::invalid_argument("batch_losses: empty cloud");
    sizes.push_back(static_cast<int>(cloud->size()));
    total_points += cloud->size();
  }
  nnet::Matrix all_points(total_points, 3);
  Eigen::Index offset = 0;
  for (const PointCloud* cloud : clouds) {
    all_points.middleRows(offset, cloud->size()) = cloud_to_f32(*cloud);
    offset += cloud->size();
  }

  nnet::Mlp::Cache cache_point, cache_head, cache_decoder, cache_transform, cache_eval;
  const nnet::Matrix features = model.point_net().forward(all_points, cache_point);
  std::vector<int> argmax;
  const nnet::Matrix pooled = nnet::segment_max_pool(features, sizes, argmax);
  const nnet::Matrix z = model.head().forward(pooled, cache_head);  // 3b x d

  // --- reconstruction: decode every latent, chamfer against its own cloud
  const nnet::Matrix decoded = model.decoder().forward(z, cache_decoder);  // 3b x 3m
  nnet::Matrix decoded_grad;
  if (grads) decoded_grad = nnet::Matrix::Zero(decoded.rows(), decoded.cols());
  double loss_rec = 0.0;
  for (Eigen::Index r = 0; r < 3 * b; ++r) {
    PointCloud::Matrix hat_points(m, 3);
    for (int i = 0; i < m; ++i)
      for (int k = 0; k < 3; ++k)
        hat_points(i, k) = static_cast<double>(decoded(r, 3 * i + k));
    const PointCloud hat(std::move(hat_points));
    const PointCloud& original = *clouds[static_cast<std::size_t>(r)];
    const ChamferCorrespondences cc = chamfer_correspondences(hat, original);
    loss_rec += cc.distance;
    if (!grads) continue;

    // d/d hat_i of a nearest-neighbor norm is the unit vector away from the
    // matched point; the match itself is treated as locally constant.
    Eigen::Matrix<double, Eigen::Dynamic, 3> hat_grad =
        Eigen::Matrix<double, Eigen::Dynamic, 3>::Zero(m, 3);
    for (int i = 0; i < m; ++i) {
      const Eigen::Index j = cc.nearest_in_second[static_cast<std::size_t>(i)];
      const Eigen::RowVector3d diff = hat.points().row(i) - original.points().row(j);
      const double norm = diff.norm();
      if (norm > 1e-12) hat_grad.row(i) += diff / norm;
    }
    for (Eigen::Index j = 0; j < original.size(); ++j) {
      const Eigen::Index i = cc.nearest_in_first[static_cast<std::size_t>(j)];
      const Eigen::RowVector3d diff = hat.points().row(i) - original.points().row(j);
      const double norm = diff.norm();
      if (norm > 1e-12) hat_grad.row(i) += diff / norm;
    }
    for (int i = 0; i < m; ++i)
      for (int k = 0; k < 3; ++k)
        decoded_grad(r, 3 * i + k) =
            static_cast<float>(hat_grad(i, k) / static_cast<double>(b));
  }
  loss_rec /= static_cast<double>(b);

  nnet::Matrix z_grad;
  if (grads)
    z_grad = model.decoder().backward(cache_decoder, decoded_grad, grads->decoder);

  // --- transform: predicted latent of the moved cloud vs. its encoding
  nnet::Matrix transform_in(b, d + 6);
  transform_in.leftCols(d) = z.topRows(b);
  for (Eigen::Index i = 0; i < b; ++i)
    transform_in.row(i).tail(6) = action_row(batch[static_cast<std::size_t>(i)].action);
  const nnet::Matrix predicted = model.transform_net().forward(transform_in, cache_transform);
  const nnet::Matrix residual = predicted - z.middleRows(b, b);
  const double loss_trans =
      residual.cast<double>().squaredNorm() / static_cast<double>(b);
  if (grads) {
    const nnet::Matrix predicted_grad = (2.0f / static_cast<float>(b)) * residual;
    const nnet::Matrix transform_in_grad =
        model.transform_net().backward(cache_transform, predicted_grad, grads->transform);
    if (options.joint_encoder_flow) {
      z_grad.topRows(b) += transform_in_grad.leftCols(d);
      z_grad.middleRows(b, b) -= predicted_grad;
    }
  }

  // --- evaluation: predicted alignment cost vs. cached chamfer targets for
  //     both (source, target) and (moved source, target)
  nnet::Matrix eval_in(2 * b, 2 * d);
  eval_in.topRows(b).leftCols(d) = z.topRows(b);
  eval_in.topRows(b).rightCols(d) = z.bottomRows(b);
  eval_in.bottomRows(b).leftCols(d) = z.middleRows(b, b);
  eval_in.bottomRows(b).rightCols(d) = z.bottomRows(b);
  const nnet::Matrix cost = model.evaluation_net().forward(eval_in, cache_eval);
  double loss_eval = 0.0;
  nnet::Matrix cost_grad;
  if (grads) cost_grad = nnet::Matrix::Zero(2 * b, 1);
  for (Eigen::Index i = 0; i < b; ++i) {
    const TrainingSample& sample = batch[static_cast<std::size_t>(i)];
    const double err_source = static_cast<double>(cost(i, 0)) - sample.chamfer_source_target;
    const double err_moved =
        static_cast<double>(cost(b + i, 0)) - sample.chamfer_transformed_target;
    loss_eval += err_source * err_source + err_moved * err_moved;
    if (grads) {
      cost_grad(i, 0) = static_cast<float>(2.0 * err_source / static_cast<double>(b));
      cost_grad(b + i, 0) = static_cast<float>(2.0 * err_moved / static_cast<double>(b));
    }
  }
  loss_eval /= static_cast<double>(b);
  if (grads) {
    const nnet::Matrix eval_in_grad =
        model.evaluation_net().backward(cache_eval, cost_grad, grads->evaluation);
    if (options.joint_encoder_flow) {
      z_grad.topRows(b) += eval_in_grad.topRows(b).leftCols(d);
      z_grad.middleRows(b, b) += eval_in_grad.bottomRows(b).leftCols(d);
      z_grad.bottomRows(b) += eval_in_grad.topRows(b).rightCols(d) +
                              eval_in_grad.bottomRows(b).rightCols(d);
    }
  }

  // --- encoder backward. Reconstruction always flows here; the other two
  //     losses contribute only under joint_encoder_flow (handled above).
  if (grads) {
    const nnet::Matrix pooled_grad = model.head().backward(cache_head, z_grad, grads->head);
    const nnet::Matrix feature_grad =
        nnet::segment_max_pool_backward(total_points, sizes, argmax, pooled_grad);
    model.point_net().backward(cache_point, feature_grad, grads->point);
  }

  LossBreakdown breakdown;
  breakdown.reconstruction = loss_rec;
  breakdown.transform = loss_trans;
  breakdown.evaluation = loss_eval;
  breakdown.total = loss_rec + loss_trans + loss_eval;
  return breakdown;
}

TrainReport train_model(DynamicModel& model,
                        std::span<const TrainingSample> samples,
                        const TrainOptions& options) {
  if (options.epochs < 0) throw ConfigError("train epochs must be non-negative");
  if (options.batch_size <= 0) throw ConfigError("train batch size must be positive");
  TrainReport report;
  if (options.epochs == 0) return report;
  if (samples.empty()) throw ConfigError("no training samples");

  ModelGrads grads = make_grads(model);
  const std::vector<nnet::ParamRef> refs = parameter_refs(model, grads);
  nnet::Adam optimizer(options.adam);
  LossOptions loss_options;
  loss_options.joint_encoder_flow = options.joint_encoder_flow;

  std::vector<std::size_t> order(samples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    Rng shuffle_rng(derive_seed(options.seed, static_cast<std::uint64_t>(epoch)));
    shuffle_rng.shuffle(order);

    LossBreakdown epoch_mean;
    int batches = 0;
    for (std::size_t begin = 0; begin < order.size();
         begin += static_cast<std::size_t>(options.batch_size)) {
      const std::size_t end =
          std::min(order.size(), begin + static_cast<std::size_t>(options.batch_size));
      std::vector<TrainingSample> batch;
      batch.reserve(end - begin);
      for (std::size_t i = begin; i < end; ++i) batch.push_back(samples[order[i]]);

      grads.zero();
      LossBreakdown loss;
      try {
        loss = batch_losses(model, batch, loss_options, &grads);
      } catch (const std::runtime_error& err) {
        throw TrainingError("epoch " + std::to_string(epoch) + " batch " +
                            std::to_string(batches) + ": " + err.what());
      }
      if (!std::isfinite(loss.total)) {
        char detail[160];
        std::snprintf(detail, sizeof(detail),
                      "non-finite loss (total=%g reconstruction=%g transform=%g "
                      "evaluation=%g)",
                      loss.total, loss.reconstruction, loss.transform, loss.evaluation);
        throw TrainingError("epoch " + std::to_string(epoch) + " batch " +
                            std::to_string(batches) + ": " + detail);
      }
      optimizer.step(refs);

      epoch_mean.total += loss.total;
      epoch_mean.reconstruction += loss.reconstruction;
      epoch_mean.transform += loss.transform;
      epoch_mean.evaluation += loss.evaluation;
      ++batches;
    }
    epoch_mean.total /= batches;
    epoch_mean.reconstruction /= batches;
    epoch_mean.transform /= batches;
    epoch_mean.evaluation /= batches;
    report.epochs.push_back(epoch_mean);
    if (options.on_epoch) options.on_epoch(epoch, epoch_mean);
  }
  return report;
}

}  // namespace cemreg
