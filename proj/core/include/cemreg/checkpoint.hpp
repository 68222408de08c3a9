#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "cemreg/nnet.hpp"

namespace cemreg {

/**
 * Model snapshot: named parameter tensors plus training metadata. Serialized
 * as a little-endian binary file ("CEMR" magic, version, latent dimension,
 * seed, per-epoch loss history, then the tensor table); values round-trip
 * bit-exactly.
 */
struct Checkpoint {
  std::uint32_t latent_dim = 0;
  std::uint64_t seed = 0;

  struct EpochLoss {
    float total = 0.0f;
    float reconstruction = 0.0f;
    float transform = 0.0f;
    float evaluation = 0.0f;
  };
  std::vector<EpochLoss> loss_history;

  std::vector<std::pair<std::string, nnet::Tensor>> tensors;

  const nnet::Tensor* find(const std::string& name) const;
};

void save_checkpoint_file(const Checkpoint& checkpoint,
                          const std::filesystem::path& path);
Checkpoint load_checkpoint_file(const std::filesystem::path& path);

}  // namespace cemreg
