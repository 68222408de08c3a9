#include "cemreg/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "cemreg/dataio.hpp"
#include "cemreg/errors.hpp"

namespace cemreg {

namespace {

constexpr char kMagic[4] = {'C', 'E', 'M', 'R'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
  out.push_back(static_cast<char>((v >> 16) & 0xff));
  out.push_back(static_cast<char>((v >> 24) & 0xff));
}

void put_u64(std::string& out, std::uint64_t v) {
  put_u32(out, static_cast<std::uint32_t>(v & 0xffffffffu));
  put_u32(out, static_cast<std::uint32_t>(v >> 32));
}

void put_f32(std::string& out, float v) {
  std::uint32_t bits;
  std::memcpy(&bits, &v, sizeof(bits));
  put_u32(out, bits);
}

class Reader {
 public:
  Reader(const std::string& data, std::string path)
      : data_(data), path_(std::move(path)) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i)
      v = (v << 8) | static_cast<unsigned char>(data_[pos_ + static_cast<std::size_t>(i)]);
    pos_ += 4;
    return v;
  }

  std::uint64_t u64() {
    const std::uint64_t lo = u32();
    const std::uint64_t hi = u32();
    return lo | (hi << 32);
  }

  float f32() {
    const std::uint32_t bits = u32();
    float v;
    std::memcpy(&v, &bits, sizeof(v));
    return v;
  }

  std::string bytes(std::size_t n) {
    need(n);
    std::string out = data_.substr(pos_, n);
    pos_ += n;
    return out;
  }

  bool at_end() const { return pos_ == data_.size(); }

 private:
  void need(std::size_t n) {
    if (pos_ + n > data_.size())
      throw CorruptCheckpointError("truncated checkpoint file " + path_);
  }

  const std::string& data_;
  std::string path_;
  std::size_t pos_ = 0;
};

}  // namespace

const nnet::Tensor* Checkpoint::find(const std::string& name) const {
  for (const auto& [tensor_name, tensor] : tensors)
    if (tensor_name == name) return &tensor;
  return nullptr;
}

void save_checkpoint_file(const Checkpoint& checkpoint,
                          const std::filesystem::path& path) {
  std::string out;
  out.append(kMagic, sizeof(kMagic));
  put_u32(out, kVersion);
  put_u32(out, checkpoint.latent_dim);
  put_u64(out, checkpoint.seed);
  put_u32(out, static_cast<std::uint32_t>(checkpoint.loss_history.size()));
  for (const Checkpoint::EpochLoss& loss : checkpoint.loss_history) {
    put_f32(out, loss.total);
    put_f32(out, loss.reconstruction);
    put_f32(out, loss.transform);
    put_f32(out, loss.evaluation);
  }
  put_u32(out, static_cast<std::uint32_t>(checkpoint.tensors.size()));
  for (const auto& [name, tensor] : checkpoint.tensors) {
    put_u32(out, static_cast<std::uint32_t>(name.size()));
    out += name;
    put_u32(out, static_cast<std::uint32_t>(tensor.shape.size()));
    for (std::uint32_t d : tensor.shape) put_u32(out, d);
    if (tensor.values.size() != tensor.element_count())
      throw CorruptCheckpointError("tensor '" + name + "' has " +
                                   std::to_string(tensor.values.size()) +
                                   " values but its shape needs " +
                                   std::to_string(tensor.element_count()));
    for (float v : tensor.values) put_f32(out, v);
  }
  write_file_atomic(path, out);
}

Checkpoint load_checkpoint_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string data((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  Reader reader(data, path.string());

  const std::string magic = reader.bytes(4);
  if (std::memcmp(magic.data(), kMagic, sizeof(kMagic)) != 0)
    throw CorruptCheckpointError("bad magic in " + path.string() +
                                 " (not a checkpoint file)");
  const std::uint32_t version = reader.u32();
  if (version != kVersion)
    throw IncompatibleCheckpointError("checkpoint " + path.string() +
                                      " has format version " + std::to_string(version) +
                                      ", this build reads version " +
                                      std::to_string(kVersion));

  Checkpoint checkpoint;
  checkpoint.latent_dim = reader.u32();
  checkpoint.seed = reader.u64();
  const std::uint32_t epochs = reader.u32();
  checkpoint.loss_history.resize(epochs);
  for (std::uint32_t e = 0; e < epochs; ++e) {
    checkpoint.loss_history[e].total = reader.f32();
    checkpoint.loss_history[e].reconstruction = reader.f32();
    checkpoint.loss_history[e].transform = reader.f32();
    checkpoint.loss_history[e].evaluation = reader.f32();
  }

  const std::uint32_t tensor_count = reader.u32();
  checkpoint.tensors.reserve(tensor_count);
  for (std::uint32_t i = 0; i < tensor_count; ++i) {
    const std::uint32_t name_len = reader.u32();
    std::string name = reader.bytes(name_len);
    nnet::Tensor tensor;
    const std::uint32_t rank = reader.u32();
    tensor.shape.resize(rank);
    for (std::uint32_t d = 0; d < rank; ++d) tensor.shape[d] = reader.u32();
    const std::size_t count = tensor.element_count();
    tensor.values.resize(count);
    for (std::size_t v = 0; v < count; ++v) tensor.values[v] = reader.f32();
    checkpoint.tensors.emplace_back(std::move(name), std::move(tensor));
  }
  if (!reader.at_end())
    throw CorruptCheckpointError("trailing bytes after tensor table in " + path.string());
  return checkpoint;
}

}  // namespace cemreg
