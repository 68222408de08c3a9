#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cemreg/geometry.hpp"
#include "cemreg/point_cloud.hpp"

namespace cemreg {

// ---------------------------------------------------------------------------
// Cloud files
// ---------------------------------------------------------------------------

enum class CloudFormat { XyzText, Off, PlyAscii };

// .xyz/.txt -> XyzText, .off -> Off, .ply -> PlyAscii; anything else throws.
CloudFormat cloud_format_from_path(const std::filesystem::path& path);

PointCloud load_cloud(const std::filesystem::path& path, CloudFormat format);
PointCloud load_cloud(const std::filesystem::path& path);

// One "x y z" line per point, enough digits to round-trip through text.
void save_cloud_xyz(const PointCloud& cloud, const std::filesystem::path& path);

// Writes to a sibling temp file and renames into place, so a crash or error
// mid-write never leaves a partial file at `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

// ---------------------------------------------------------------------------
// Synthetic shapes and registration pairs
// ---------------------------------------------------------------------------

enum class SurfaceShape { Sphere, Torus, Box, Wedge };

SurfaceShape surface_shape_from_name(const std::string& name);
std::string to_string(SurfaceShape shape);

// Uniform area-weighted sampling of the shape surface, deterministic in seed.
PointCloud sample_surface(SurfaceShape shape, int count, std::uint64_t seed);

struct NoiseSpec {
  double stddev = 0.01;
  double clip = 0.05;
};

struct RegistrationPair {
  PointCloud source;
  PointCloud target;
  std::optional<Action> ground_truth;
};

// Draws a ground-truth action with per-axis rotations uniform in
// [0, max_rotation_deg] degrees and translations uniform in
// [-max_translation, max_translation], applies it to `source`, and optionally
// perturbs the target with clipped Gaussian noise.
RegistrationPair make_pair(const PointCloud& source, double max_rotation_deg,
                           double max_translation,
                           const std::optional<NoiseSpec>& noise,
                           std::uint64_t seed);

// ---------------------------------------------------------------------------
// Datasets on disk: cloud files plus a JSON manifest
// ---------------------------------------------------------------------------

struct DatasetEntry {
  std::string split;  // "train" or "test"
  int index = 0;
  std::string shape;
  std::string source_file;  // relative to the dataset root
  std::string target_file;
  std::optional<Action> ground_truth;
  std::uint64_t pair_seed = 0;
  bool noisy = false;
};

struct Dataset {
  std::filesystem::path root;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, std::string>> config_echo;
  std::vector<DatasetEntry> entries;
};

void write_manifest(const Dataset& dataset);
Dataset read_manifest(const std::filesystem::path& root);

std::vector<const DatasetEntry*> entries_for_split(const Dataset& dataset,
                                                   const std::string& split);
RegistrationPair load_pair(const Dataset& dataset, const DatasetEntry& entry);

}  // namespace cemreg
