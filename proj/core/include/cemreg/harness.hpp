#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "cemreg/dataio.hpp"
#include "cemreg/icp.hpp"
#include "cemreg/planner.hpp"

namespace cemreg {

enum class Method { LatentCem, ChamferCem, Icp };

Method method_from_name(const std::string& name);
std::string to_string(Method method);

struct PairRecord {
  int pair_index = 0;
  std::string shape;
  bool success = true;
  std::string message;  // failure reason when success is false
  Action predicted;
  Action ground_truth;
  Eigen::Vector3d rotation_error_deg = Eigen::Vector3d::Zero();
  Eigen::Vector3d translation_error = Eigen::Vector3d::Zero();
  double mean_abs_rotation_deg = 0.0;
  double mean_abs_translation = 0.0;
  double chamfer_after = 0.0;  // chamfer(moved source, target)
  double wall_ms = 0.0;
};

struct Aggregates {
  int evaluated = 0;  // successful pairs only
  int failed = 0;
  double rmse_rotation_deg = 0.0;  // over all axes of all evaluated pairs
  double mae_rotation_deg = 0.0;
  double rmse_translation = 0.0;
  double mae_translation = 0.0;
  double mean_chamfer_after = 0.0;
  double total_wall_ms = 0.0;
};

struct BenchmarkReport {
  std::string method;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, std::string>> config_echo;
  std::vector<PairRecord> records;
  Aggregates aggregates;
};

struct BenchPair {
  RegistrationPair pair;
  std::string shape;
};

struct MethodContext {
  Method method = Method::ChamferCem;
  CemConfig cem;  // cem.seed doubles as the per-run base seed
  IcpConfig icp;
  const DynamicModel* model = nullptr;  // required for the latent method
  int threads = 1;
  // Wall-clock fields stay zero when off, keeping report bytes independent
  // of machine speed.
  bool record_timing = false;
};

// Failure rows (a method throwing on one pair) are recorded with the message
// and excluded from the aggregate statistics.
Aggregates compute_aggregates(const std::vector<PairRecord>& records);

// Runs one method over every pair. Pair i plans with seed derived from the
// base seed and i, so runs are reproducible and pairs are independent.
BenchmarkReport evaluate_method(const std::vector<BenchPair>& pairs,
                                const MethodContext& context);

struct SweepCell {
  int iterations = 0;
  int candidates = 0;
  Aggregates aggregates;
  double wall_ms = 0.0;  // measured regardless of record_timing
};

// Full grid over iteration and candidate counts; every cell replans the same
// pairs with the same derived seeds, so cells differ only in budget.
std::vector<SweepCell> sweep_cem(const std::vector<BenchPair>& pairs,
                                 const std::vector<int>& iteration_grid,
                                 const std::vector<int>& candidate_grid,
                                 const MethodContext& base);

enum class ReportFormat { JsonLines, Csv, Text };

ReportFormat report_format_from_name(const std::string& name);
std::string to_string(ReportFormat format);

// JsonLines: one object per pair, then one trailing aggregate object.
// Csv: union schema, one header; pair rows leave aggregate columns empty and
// the final aggregate row leaves pair columns empty.
// Text: human-readable summary.
std::string render_report(const BenchmarkReport& report, ReportFormat format);
void emit_report(const BenchmarkReport& report, const std::filesystem::path& path,
                 ReportFormat format);
BenchmarkReport parse_report_jsonl(const std::filesystem::path& path);

std::string render_sweep_csv(const std::vector<SweepCell>& cells,
                             bool include_timing);

}  // namespace cemreg
