#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace cemreg {

/**
 * Flat key=value run configuration with a fixed key registry.
 *
 * Precedence is defaults, then a config file, then explicit sets (CLI flags).
 * Unknown keys are rejected by name; values stay strings until a typed
 * getter parses them, so the full configuration can be echoed verbatim into
 * reports and manifests.
 */
class RunConfig {
 public:
  RunConfig();

  // Lines of "key = value"; blank lines and lines starting with '#' skipped.
  void load_file(const std::filesystem::path& path);
  void set(const std::string& key, const std::string& value);

  bool is_known(const std::string& key) const;

  std::string get_string(const std::string& key) const;
  int get_int(const std::string& key) const;
  std::uint64_t get_u64(const std::string& key) const;
  double get_double(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  std::vector<std::string> get_string_list(const std::string& key) const;
  std::vector<int> get_int_list(const std::string& key) const;
  std::vector<double> get_double_list(const std::string& key) const;

  // (key, current value) in registry order; reports echo exactly this.
  std::vector<std::pair<std::string, std::string>> items() const;

  // Key / default / doc table for --help output.
  static std::string describe();

 private:
  std::size_t index_of(const std::string& key) const;

  std::vector<std::string> values_;  // parallel to the registry
};

}  // namespace cemreg
