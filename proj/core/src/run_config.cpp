#include "cemreg/run_config.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "cemreg/errors.hpp"

namespace cemreg {

namespace {

struct KeyDef {
  const char* name;
  const char* default_value;
  const char* doc;
};

// The single source of truth for every configuration key.
const std::vector<KeyDef>& registry() {
  static const std::vector<KeyDef> keys = {
      {"threads", "1", "worker threads for candidate scoring"},

      {"data.out", "dataset", "directory the synthesizer writes into"},
      {"data.shapes", "wedge,box,torus", "shape cycle for generated clouds"},
      {"data.points", "784", "points per generated cloud"},
      {"data.train_pairs", "12", "registration pairs in the train split"},
      {"data.test_pairs", "50", "registration pairs in the test split"},
      {"data.max_rotation_deg", "45", "per-axis rotation range [0, max] in degrees"},
      {"data.max_translation", "0.5", "per-axis translation range [-max, max]"},
      {"data.noise", "false", "perturb targets with clipped Gaussian noise"},
      {"data.noise_std", "0.01", "noise standard deviation"},
      {"data.noise_clip", "0.05", "noise clamp, each coordinate into [-clip, clip]"},
      {"data.resample", "false", "resample target points instead of reusing source points"},
      {"data.seed", "7", "master seed for dataset generation"},

      {"model.latent_dim", "128", "latent vector dimension"},
      {"model.hidden", "256", "hidden width of the transform/evaluation nets"},
      {"model.decoder_points", "256", "points the decoder reconstructs"},
      {"model.decoder_hidden", "256", "decoder hidden width"},
      {"model.checkpoint", "", "model checkpoint path (read by register/bench)"},

      {"train.dataset", "dataset", "dataset directory to train from"},
      {"train.epochs", "30", "training epochs"},
      {"train.batch", "16", "mini-batch size"},
      {"train.actions_per_pair", "8", "random actions drawn per training pair"},
      {"train.sigma", "1", "stddev of the random training actions"},
      {"train.lr", "0.0001", "Adam learning rate"},
      {"train.weight_decay", "0.0005", "L2 weight decay"},
      {"train.joint_encoder_flow", "false",
       "let transform/evaluation losses shape the encoder too"},
      {"train.seed", "1", "seed for init, sample draws, and shuffling"},
      {"train.out", "model.ckpt", "checkpoint output path"},
      {"train.history", "", "optional loss-history jsonl output path"},

      {"cem.iterations", "10", "planner distribution updates"},
      {"cem.candidates", "1000", "candidates per iteration (mean included)"},
      {"cem.elites", "25", "elite count per iteration"},
      {"cem.sigma0", "0.8,0.8,0.8,0.5,0.5,0.5",
       "initial sampling stddev per action dimension"},
      {"cem.variance_floor", "1e-8", "lower bound on refit variances"},
      {"cem.seed", "0", "base planning seed"},
      {"cem.oracle", "chamfer", "candidate scorer: chamfer or latent"},
      {"cem.return_best", "false", "return best-ever candidate instead of final mean"},

      {"icp.max_iterations", "100", "iteration cap"},
      {"icp.rotation_tolerance", "0.0001", "convergence: per-step rotation (radians)"},
      {"icp.translation_tolerance", "1e-06", "convergence: per-step translation norm"},
      {"icp.max_correspondence", "0", "correspondence distance gate (0 = off)"},

      {"register.source", "", "source cloud file"},
      {"register.target", "", "target cloud file"},
      {"register.emit_aligned", "", "optional path for the aligned source cloud"},

      {"bench.dataset", "dataset", "dataset directory to evaluate on"},
      {"bench.split", "test", "dataset split to evaluate"},
      {"bench.method", "chamfer-cem", "latent-cem, chamfer-cem, or icp"},
      {"bench.pairs", "0", "evaluate only the first N pairs (0 = all)"},
      {"bench.out", "report", "output path prefix"},
      {"bench.format", "jsonl", "comma list of jsonl, csv, text"},
      {"bench.timing", "false", "record wall-clock times in reports"},
      {"bench.sweep", "false", "run the budget sweep instead of one evaluation"},
      {"bench.sweep_iterations", "1,2,5,10", "iteration grid for the sweep"},
      {"bench.sweep_candidates", "100,300,1000", "candidate grid for the sweep"},
  };
  return keys;
}

std::string trim(const std::string& s) {
  std::size_t begin = 0, end = s.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(s[begin]))) ++begin;
  while (end > begin && std::isspace(static_cast<unsigned char>(s[end - 1]))) --end;
  return s.substr(begin, end - begin);
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> parts;
  std::string current;
  for (char c : value) {
    if (c == ',') {
      parts.push_back(trim(current));
      current.clear();
    } else {
      current += c;
    }
  }
  current = trim(current);
  if (!current.empty() || !parts.empty()) parts.push_back(current);
  while (!parts.empty() && parts.back().empty()) parts.pop_back();
  return parts;
}

}  // namespace

RunConfig::RunConfig() {
  values_.reserve(registry().size());
  for (const KeyDef& def : registry()) values_.emplace_back(def.default_value);
}

std::size_t RunConfig::index_of(const std::string& key) const {
  const auto& keys = registry();
  for (std::size_t i = 0; i < keys.size(); ++i)
    if (key == keys[i].name) return i;
  throw ConfigError("unknown config key '" + key + "'");
}

bool RunConfig::is_known(const std::string& key) const {
  const auto& keys = registry();
  return std::any_of(keys.begin(), keys.end(),
                     [&key](const KeyDef& def) { return key == def.name; });
}

void RunConfig::load_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path.string());
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string content = trim(line);
    if (content.empty() || content[0] == '#') continue;
    const std::size_t eq = content.find('=');
    if (eq == std::string::npos)
      throw FormatError(path.string(), line_no, "expected 'key = value'");
    const std::string key = trim(content.substr(0, eq));
    const std::string value = trim(content.substr(eq + 1));
    try {
      set(key, value);
    } catch (const ConfigError& err) {
      throw FormatError(path.string(), line_no, err.what());
    }
  }
}

void RunConfig::set(const std::string& key, const std::string& value) {
  values_[index_of(key)] = value;
}

std::string RunConfig::get_string(const std::string& key) const {
  return values_[index_of(key)];
}

int RunConfig::get_int(const std::string& key) const {
  const std::string value = get_string(key);
  try {
    std::size_t used = 0;
    const int parsed = std::stoi(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return parsed;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': expected integer, got '" + value + "'");
  }
}

std::uint64_t RunConfig::get_u64(const std::string& key) const {
  const std::string value = get_string(key);
  try {
    std::size_t used = 0;
    const unsigned long long parsed = std::stoull(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return parsed;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': expected unsigned integer, got '" + value + "'");
  }
}

double RunConfig::get_double(const std::string& key) const {
  const std::string value = get_string(key);
  try {
    std::size_t used = 0;
    const double parsed = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return parsed;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': expected number, got '" + value + "'");
  }
}

bool RunConfig::get_bool(const std::string& key) const {
  std::string value = get_string(key);
  std::transform(value.begin(), value.end(), value.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
  if (value == "false" || value == "0" || value == "no" || value == "off") return false;
  throw ConfigError("key '" + key + "': expected boolean, got '" + get_string(key) + "'");
}

std::vector<std::string> RunConfig::get_string_list(const std::string& key) const {
  return split_list(get_string(key));
}

std::vector<int> RunConfig::get_int_list(const std::string& key) const {
  std::vector<int> out;
  for (const std::string& part : get_string_list(key)) {
    try {
      std::size_t used = 0;
      const int parsed = std::stoi(part, &used);
      if (used != part.size()) throw std::invalid_argument(part);
      out.push_back(parsed);
    } catch (const std::exception&) {
      throw ConfigError("key '" + key + "': expected integer list, got '" +
                        get_string(key) + "'");
    }
  }
  return out;
}

std::vector<double> RunConfig::get_double_list(const std::string& key) const {
  std::vector<double> out;
  for (const std::string& part : get_string_list(key)) {
    try {
      std::size_t used = 0;
      const double parsed = std::stod(part, &used);
      if (used != part.size()) throw std::invalid_argument(part);
      out.push_back(parsed);
    } catch (const std::exception&) {
      throw ConfigError("key '" + key + "': expected number list, got '" +
                        get_string(key) + "'");
    }
  }
  return out;
}

std::vector<std::pair<std::string, std::string>> RunConfig::items() const {
  std::vector<std::pair<std::string, std::string>> out;
  const auto& keys = registry();
  out.reserve(keys.size());
  for (std::size_t i = 0; i < keys.size(); ++i)
    out.emplace_back(keys[i].name, values_[i]);
  return out;
}

std::string RunConfig::describe() {
  std::string out;
  char line[256];
  for (const KeyDef& def : registry()) {
    std::snprintf(line, sizeof(line), "  %-24s %-28s %s\n", def.name,
                  (std::string("[") + def.default_value + "]").c_str(), def.doc);
    out += line;
  }
  return out;
}

}  // namespace cemreg
