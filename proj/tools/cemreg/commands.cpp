#include "commands.hpp"

#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cemreg/dataio.hpp"
#include "cemreg/errors.hpp"
#include "cemreg/harness.hpp"
#include "cemreg/latent_model.hpp"
#include "cemreg/planner.hpp"
#include "cemreg/rng.hpp"

namespace fs = std::filesystem;

namespace cemreg::cli {

namespace {

std::optional<NoiseSpec> noise_from_config(const RunConfig& config) {
  if (!config.get_bool("data.noise")) return std::nullopt;
  NoiseSpec noise;
  noise.stddev = config.get_double("data.noise_std");
  noise.clip = config.get_double("data.noise_clip");
  if (!(noise.stddev >= 0.0)) throw ConfigError("data.noise_std must be non-negative");
  if (!(noise.clip > 0.0)) throw ConfigError("data.noise_clip must be positive");
  return noise;
}

CemConfig cem_from_config(const RunConfig& config) {
  CemConfig cem;
  cem.iterations = config.get_int("cem.iterations");
  cem.candidates = config.get_int("cem.candidates");
  cem.elites = config.get_int("cem.elites");
  const std::vector<double> sigma0 = config.get_double_list("cem.sigma0");
  if (sigma0.size() != 6)
    throw ConfigError("cem.sigma0 needs exactly 6 comma-separated values");
  for (int i = 0; i < 6; ++i) cem.initial_sigma(i) = sigma0[static_cast<std::size_t>(i)];
  cem.variance_floor = config.get_double("cem.variance_floor");
  cem.seed = config.get_u64("cem.seed");
  cem.return_best = config.get_bool("cem.return_best");
  return cem;
}

IcpConfig icp_from_config(const RunConfig& config) {
  IcpConfig icp;
  icp.max_iterations = config.get_int("icp.max_iterations");
  icp.rotation_tolerance = config.get_double("icp.rotation_tolerance");
  icp.translation_tolerance = config.get_double("icp.translation_tolerance");
  icp.max_correspondence = config.get_double("icp.max_correspondence");
  return icp;
}

ModelConfig model_from_config(const RunConfig& config) {
  ModelConfig model;
  model.latent_dim = config.get_int("model.latent_dim");
  model.hidden = config.get_int("model.hidden");
  model.decoder_points = config.get_int("model.decoder_points");
  model.decoder_hidden = config.get_int("model.decoder_hidden");
  return model;
}

DynamicModel load_configured_model(const RunConfig& config) {
  const std::string path = config.get_string("model.checkpoint");
  if (path.empty())
    throw ConfigError("cem.oracle=latent / method=latent-cem needs model.checkpoint");
  return load_model(path, config.get_int("model.latent_dim"));
}

std::vector<BenchPair> load_split(const Dataset& dataset, const std::string& split,
                                  int limit) {
  std::vector<BenchPair> pairs;
  for (const DatasetEntry* entry : entries_for_split(dataset, split)) {
    if (limit > 0 && static_cast<int>(pairs.size()) >= limit) break;
    pairs.push_back({load_pair(dataset, *entry), entry->shape});
  }
  return pairs;
}

}  // namespace

int cmd_synth(const RunConfig& config) {
  const fs::path out = config.get_string("data.out");
  const std::vector<std::string> shape_names = config.get_string_list("data.shapes");
  if (shape_names.empty()) throw ConfigError("data.shapes must name at least one shape");
  std::vector<SurfaceShape> shapes;
  for (const std::string& name : shape_names) {
    try {
      shapes.push_back(surface_shape_from_name(name));
    } catch (const std::invalid_argument& err) {
      throw ConfigError(std::string("data.shapes: ") + err.what());
    }
  }
  const int points = config.get_int("data.points");
  if (points < 4) throw ConfigError("data.points must be at least 4");
  const int train_pairs = config.get_int("data.train_pairs");
  const int test_pairs = config.get_int("data.test_pairs");
  if (train_pairs < 0 || test_pairs < 0)
    throw ConfigError("pair counts must be non-negative");
  const double max_rotation = config.get_double("data.max_rotation_deg");
  const double max_translation = config.get_double("data.max_translation");
  const std::optional<NoiseSpec> noise = noise_from_config(config);
  const bool resample = config.get_bool("data.resample");
  const std::uint64_t seed = config.get_u64("data.seed");

  Dataset dataset;
  dataset.root = out;
  dataset.seed = seed;
  dataset.config_echo = config.items();

  const struct {
    const char* split;
    int count;
    std::uint64_t stream_base;
  } splits[] = {{"train", train_pairs, 0}, {"test", test_pairs, 1u << 20}};

  for (const auto& split : splits) {
    for (int i = 0; i < split.count; ++i) {
      const SurfaceShape shape = shapes[static_cast<std::size_t>(i) % shapes.size()];
      const std::uint64_t stream = split.stream_base + 3 * static_cast<std::uint64_t>(i);
      const std::uint64_t cloud_seed = derive_seed(seed, stream);
      const std::uint64_t pair_seed = derive_seed(seed, stream + 1);

      const PointCloud source =
          normalize_unit_sphere(sample_surface(shape, points, cloud_seed));
      RegistrationPair pair =
          make_pair(source, max_rotation, max_translation, noise, pair_seed);
      if (resample) {
        // Independent sampling of the same surface, so the target shares the
        // shape but not the exact points of the source.
        const PointCloud fresh = normalize_unit_sphere(
            sample_surface(shape, points, derive_seed(seed, stream + 2)));
        pair.target = apply_action(fresh, *pair.ground_truth);
        if (noise)
          pair.target = add_gaussian_noise(pair.target, noise->stddev, noise->clip,
                                           derive_seed(pair_seed, 1));
      }

      char stem[64];
      std::snprintf(stem, sizeof(stem), "%s/pair%04d", split.split, i);
      DatasetEntry entry;
      entry.split = split.split;
      entry.index = i;
      entry.shape = to_string(shape);
      entry.source_file = std::string(stem) + "_source.xyz";
      entry.target_file = std::string(stem) + "_target.xyz";
      entry.ground_truth = pair.ground_truth;
      entry.pair_seed = pair_seed;
      entry.noisy = noise.has_value();

      save_cloud_xyz(pair.source, dataset.root / entry.source_file);
      save_cloud_xyz(pair.target, dataset.root / entry.target_file);
      dataset.entries.push_back(std::move(entry));
    }
  }

  write_manifest(dataset);
  std::printf("wrote %zu pairs (%d train, %d test) to %s\n", dataset.entries.size(),
              train_pairs, test_pairs, out.string().c_str());
  return 0;
}

int cmd_train(const RunConfig& config) {
  const Dataset dataset = read_manifest(config.get_string("train.dataset"));
  std::vector<RegistrationPair> pairs;
  for (const DatasetEntry* entry : entries_for_split(dataset, "train"))
    pairs.push_back(load_pair(dataset, *entry));
  const int epochs = config.get_int("train.epochs");
  if (pairs.empty() && epochs > 0)
    throw ConfigError("dataset " + dataset.root.string() + " has no train pairs");

  const std::uint64_t seed = config.get_u64("train.seed");
  DynamicModel model(model_from_config(config), derive_seed(seed, 0));

  std::vector<TrainingSample> samples;
  if (!pairs.empty())
    samples = generate_training_samples(pairs, config.get_int("train.actions_per_pair"),
                                        config.get_double("train.sigma"),
                                        derive_seed(seed, 1));

  TrainOptions options;
  options.epochs = epochs;
  options.batch_size = config.get_int("train.batch");
  options.adam.learning_rate = static_cast<float>(config.get_double("train.lr"));
  options.adam.weight_decay = static_cast<float>(config.get_double("train.weight_decay"));
  options.seed = derive_seed(seed, 2);
  options.joint_encoder_flow = config.get_bool("train.joint_encoder_flow");
  options.on_epoch = [](int epoch, const LossBreakdown& loss) {
    std::printf("epoch %3d  total %.6f  (rec %.6f  trans %.6f  eval %.6f)\n", epoch,
                loss.total, loss.reconstruction, loss.transform, loss.evaluation);
    std::fflush(stdout);
  };

  const TrainReport report = train_model(model, samples, options);

  Checkpoint checkpoint = model.to_checkpoint();
  checkpoint.seed = seed;
  for (const LossBreakdown& loss : report.epochs) {
    Checkpoint::EpochLoss entry;
    entry.total = static_cast<float>(loss.total);
    entry.reconstruction = static_cast<float>(loss.reconstruction);
    entry.transform = static_cast<float>(loss.transform);
    entry.evaluation = static_cast<float>(loss.evaluation);
    checkpoint.loss_history.push_back(entry);
  }
  const std::string out = config.get_string("train.out");
  save_checkpoint_file(checkpoint, out);

  const std::string history = config.get_string("train.history");
  if (!history.empty()) {
    std::string body;
    nlohmann::json header{{"record", "config"}};
    nlohmann::json echo = nlohmann::json::array();
    for (const auto& [key, value] : config.items()) echo.push_back({key, value});
    header["config"] = echo;
    body += header.dump() + "\n";
    for (std::size_t e = 0; e < report.epochs.size(); ++e) {
      const LossBreakdown& loss = report.epochs[e];
      nlohmann::json line{{"record", "epoch"},
                          {"epoch", e},
                          {"total", loss.total},
                          {"reconstruction", loss.reconstruction},
                          {"transform", loss.transform},
                          {"evaluation", loss.evaluation}};
      body += line.dump() + "\n";
    }
    write_file_atomic(history, body);
  }

  std::printf("saved checkpoint (%d epochs, %zu parameters) to %s\n", epochs,
              model.parameter_count(), out.c_str());
  return 0;
}

int cmd_register(const RunConfig& config) {
  const std::string source_path = config.get_string("register.source");
  const std::string target_path = config.get_string("register.target");
  if (source_path.empty()) throw ConfigError("register.source is required");
  if (target_path.empty()) throw ConfigError("register.target is required");
  const PointCloud source = load_cloud(source_path);
  const PointCloud target = load_cloud(target_path);

  const CemConfig cem = cem_from_config(config);
  const std::string oracle_name = config.get_string("cem.oracle");

  PlanResult result;
  if (oracle_name == "chamfer") {
    const ChamferRewardOracle oracle(source, target, config.get_int("threads"));
    result = plan(oracle, cem);
  } else if (oracle_name == "latent") {
    const DynamicModel model = load_configured_model(config);
    const LatentRewardOracle oracle(model, source, target);
    result = plan(oracle, cem);
  } else {
    throw ConfigError("cem.oracle must be 'chamfer' or 'latent', got '" +
                      oracle_name + "'");
  }

  for (const auto& [key, value] : config.items())
    std::printf("# %s = %s\n", key.c_str(), value.c_str());
  const Vector6d v = result.action.to_vector();
  std::printf("action: %.17g %.17g %.17g %.17g %.17g %.17g\n", v(0), v(1), v(2),
              v(3), v(4), v(5));
  std::printf("rotation_deg: %.17g %.17g %.17g\n", to_degrees(v(0)), to_degrees(v(1)),
              to_degrees(v(2)));
  std::printf("translation: %.17g %.17g %.17g\n", v(3), v(4), v(5));
  std::printf("best_reward: %.17g\n", result.trace.back().best_reward);

  const std::string aligned_path = config.get_string("register.emit_aligned");
  if (!aligned_path.empty())
    save_cloud_xyz(apply_action(source, result.action), aligned_path);
  return 0;
}

int cmd_bench(const RunConfig& config) {
  const Dataset dataset = read_manifest(config.get_string("bench.dataset"));
  const std::string split = config.get_string("bench.split");
  const std::vector<BenchPair> pairs =
      load_split(dataset, split, config.get_int("bench.pairs"));
  if (pairs.empty())
    throw ConfigError("dataset " + dataset.root.string() + " has no '" + split +
                      "' pairs");

  MethodContext context;
  context.method = method_from_name(config.get_string("bench.method"));
  context.cem = cem_from_config(config);
  context.icp = icp_from_config(config);
  context.threads = config.get_int("threads");
  context.record_timing = config.get_bool("bench.timing");

  DynamicModel model;
  if (context.method == Method::LatentCem) {
    model = load_configured_model(config);
    context.model = &model;
  }

  const std::string out = config.get_string("bench.out");
  if (config.get_bool("bench.sweep")) {
    const std::vector<SweepCell> cells =
        sweep_cem(pairs, config.get_int_list("bench.sweep_iterations"),
                  config.get_int_list("bench.sweep_candidates"), context);
    const fs::path path = out + ".sweep.csv";
    write_file_atomic(path, render_sweep_csv(cells, context.record_timing));
    for (const SweepCell& cell : cells)
      std::printf("T=%-3d N=%-5d mae_rot %.4f deg  mae_trans %.5f  (%.0f ms)\n",
                  cell.iterations, cell.candidates, cell.aggregates.mae_rotation_deg,
                  cell.aggregates.mae_translation, cell.wall_ms);
    std::printf("wrote sweep to %s\n", path.string().c_str());
    return 0;
  }

  BenchmarkReport report = evaluate_method(pairs, context);
  report.config_echo = config.items();
  for (const std::string& format_name : config.get_string_list("bench.format")) {
    const ReportFormat format = report_format_from_name(format_name);
    const char* extension = format == ReportFormat::JsonLines ? ".jsonl"
                            : format == ReportFormat::Csv     ? ".csv"
                                                              : ".txt";
    emit_report(report, out + extension, format);
  }
  std::printf("%s", render_report(report, ReportFormat::Text).c_str());
  return 0;
}

}  // namespace cemreg::cli
