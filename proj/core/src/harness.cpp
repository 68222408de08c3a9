#include "cemreg/harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cemreg/errors.hpp"
#include "cemreg/rng.hpp"

namespace cemreg {

Method method_from_name(const std::string& name) {
  if (name == "latent-cem") return Method::LatentCem;
  if (name == "chamfer-cem") return Method::ChamferCem;
  if (name == "icp") return Method::Icp;
  throw ConfigError("unknown method '" + name +
                    "' (expected latent-cem, chamfer-cem, or icp)");
}

std::string to_string(Method method) {
  switch (method) {
    case Method::LatentCem: return "latent-cem";
    case Method::ChamferCem: return "chamfer-cem";
    case Method::Icp: return "icp";
  }
  return "unknown";
}

Aggregates compute_aggregates(const std::vector<PairRecord>& records) {
  Aggregates aggregates;
  double rot_sq = 0.0, rot_abs = 0.0, trans_sq = 0.0, trans_abs = 0.0;
  for (const PairRecord& record : records) {
    if (!record.success) {
      ++aggregates.failed;
      continue;
    }
    ++aggregates.evaluated;
    for (int axis = 0; axis < 3; ++axis) {
      rot_sq += record.rotation_error_deg(axis) * record.rotation_error_deg(axis);
      rot_abs += std::abs(record.rotation_error_deg(axis));
      trans_sq += record.translation_error(axis) * record.translation_error(axis);
      trans_abs += std::abs(record.translation_error(axis));
    }
    aggregates.mean_chamfer_after += record.chamfer_after;
    aggregates.total_wall_ms += record.wall_ms;
  }
  if (aggregates.evaluated > 0) {
    const double axes = 3.0 * aggregates.evaluated;
    aggregates.rmse_rotation_deg = std::sqrt(rot_sq / axes);
    aggregates.mae_rotation_deg = rot_abs / axes;
    aggregates.rmse_translation = std::sqrt(trans_sq / axes);
    aggregates.mae_translation = trans_abs / axes;
    aggregates.mean_chamfer_after /= aggregates.evaluated;
  }
  return aggregates;
}

BenchmarkReport evaluate_method(const std::vector<BenchPair>& pairs,
                                const MethodContext& context) {
  if (context.method == Method::LatentCem && context.model == nullptr)
    throw ConfigError("latent-cem needs a trained model");

  BenchmarkReport report;
  report.method = to_string(context.method);
  report.seed = context.cem.seed;

  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const BenchPair& bench_pair = pairs[i];
    if (!bench_pair.pair.ground_truth)
      throw std::invalid_argument("evaluate_method: pair " + std::to_string(i) +
                                  " has no ground truth");
    PairRecord record;
    record.pair_index = static_cast<int>(i);
    record.shape = bench_pair.shape;
    record.ground_truth = *bench_pair.pair.ground_truth;

    CemConfig cem = context.cem;
    cem.seed = derive_seed(context.cem.seed, static_cast<std::uint64_t>(i));

    const auto started = std::chrono::steady_clock::now();
    try {
      Action predicted;
      switch (context.method) {
        case Method::ChamferCem: {
          const ChamferRewardOracle oracle(bench_pair.pair.source,
                                           bench_pair.pair.target, context.threads);
          predicted = plan(oracle, cem).action;
          break;
        }
        case Method::LatentCem: {
          const LatentRewardOracle oracle(*context.model, bench_pair.pair.source,
                                          bench_pair.pair.target);
          predicted = plan(oracle, cem).action;
          break;
        }
        case Method::Icp: {
          predicted =
              icp_register(bench_pair.pair.source, bench_pair.pair.target,
                           context.icp)
                  .action;
          break;
        }
      }
      record.predicted = predicted;
      const RegistrationErrors errors =
          registration_errors(predicted, record.ground_truth);
      record.rotation_error_deg = errors.rotation_deg;
      record.translation_error = errors.translation;
      record.mean_abs_rotation_deg = errors.rotation_deg.cwiseAbs().mean();
      record.mean_abs_translation = errors.translation.cwiseAbs().mean();
      record.chamfer_after = chamfer_distance(
          apply_action(bench_pair.pair.source, predicted), bench_pair.pair.target);
    } catch (const std::exception& err) {
      record.success = false;
      record.message = err.what();
    }
    if (context.record_timing) {
      record.wall_ms = std::chrono::duration<double, std::milli>(
                           std::chrono::steady_clock::now() - started)
                           .count();
    }
    report.records.push_back(std::move(record));
  }
  report.aggregates = compute_aggregates(report.records);
  return report;
}

std::vector<SweepCell> sweep_cem(const std::vector<BenchPair>& pairs,
                                 const std::vector<int>& iteration_grid,
                                 const std::vector<int>& candidate_grid,
                                 const MethodContext& base) {
  if (iteration_grid.empty() || candidate_grid.empty())
    throw ConfigError("sweep grids must be non-empty");
  std::vector<SweepCell> cells;
  cells.reserve(iteration_grid.size() * candidate_grid.size());
  for (int iterations : iteration_grid) {
    for (int candidates : candidate_grid) {
      MethodContext context = base;
      context.cem.iterations = iterations;
      context.cem.candidates = candidates;
      context.cem.elites = std::min(context.cem.elites, candidates);

      SweepCell cell;
      cell.iterations = iterations;
      cell.candidates = candidates;
      const auto started = std::chrono::steady_clock::now();
      cell.aggregates = evaluate_method(pairs, context).aggregates;
      cell.wall_ms = std::chrono::duration<double, std::milli>(
                         std::chrono::steady_clock::now() - started)
                         .count();
      cells.push_back(cell);
    }
  }
  return cells;
}

namespace {

nlohmann::json action_json(const Action& action) {
  return nlohmann::json{
      {"euler", {action.euler(0), action.euler(1), action.euler(2)}},
      {"translation",
       {action.translation(0), action.translation(1), action.translation(2)}}};
}

Action action_from_json(const nlohmann::json& j) {
  const auto& e = j.at("euler");
  const auto& t = j.at("translation");
  return Action(
      Eigen::Vector3d(e.at(0).get<double>(), e.at(1).get<double>(), e.at(2).get<double>()),
      Eigen::Vector3d(t.at(0).get<double>(), t.at(1).get<double>(), t.at(2).get<double>()));
}

std::string csv_escape(const std::string& value) {
  if (value.find_first_of(",\"\n") == std::string::npos) return value;
  std::string out = "\"";
  for (char c : value) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += "\"";
  return out;
}

std::string format_double(double v) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", v);
  return buffer;
}

std::string render_jsonl(const BenchmarkReport& report) {
  std::string out;
  for (const PairRecord& record : report.records) {
    nlohmann::json j{{"record", "pair"},
                     {"index", record.pair_index},
                     {"shape", record.shape},
                     {"success", record.success}};
    if (record.success) {
      j["predicted"] = action_json(record.predicted);
      j["ground_truth"] = action_json(record.ground_truth);
      j["rotation_error_deg"] = {record.rotation_error_deg(0),
                                 record.rotation_error_deg(1),
                                 record.rotation_error_deg(2)};
      j["translation_error"] = {record.translation_error(0),
                                record.translation_error(1),
                                record.translation_error(2)};
      j["mean_abs_rotation_deg"] = record.mean_abs_rotation_deg;
      j["mean_abs_translation"] = record.mean_abs_translation;
      j["chamfer_after"] = record.chamfer_after;
      j["wall_ms"] = record.wall_ms;
    } else {
      j["message"] = record.message;
    }
    out += j.dump() + "\n";
  }
  nlohmann::json aggregate{{"record", "aggregate"},
                           {"method", report.method},
                           {"seed", report.seed},
                           {"evaluated", report.aggregates.evaluated},
                           {"failed", report.aggregates.failed},
                           {"rmse_rotation_deg", report.aggregates.rmse_rotation_deg},
                           {"mae_rotation_deg", report.aggregates.mae_rotation_deg},
                           {"rmse_translation", report.aggregates.rmse_translation},
                           {"mae_translation", report.aggregates.mae_translation},
                           {"mean_chamfer_after", report.aggregates.mean_chamfer_after},
                           {"total_wall_ms", report.aggregates.total_wall_ms}};
  nlohmann::json config = nlohmann::json::array();
  for (const auto& [key, value] : report.config_echo) config.push_back({key, value});
  aggregate["config"] = config;
  out += aggregate.dump() + "\n";
  return out;
}

const char* kCsvHeader =
    "record,method,seed,index,shape,success,message,"
    "pred_e1,pred_e2,pred_e3,pred_t1,pred_t2,pred_t3,"
    "gt_e1,gt_e2,gt_e3,gt_t1,gt_t2,gt_t3,"
    "rot_err_x_deg,rot_err_y_deg,rot_err_z_deg,"
    "trans_err_x,trans_err_y,trans_err_z,"
    "mean_abs_rot_deg,mean_abs_trans,chamfer_after,wall_ms,"
    "evaluated,failed,rmse_rot_deg,mae_rot_deg,rmse_trans,mae_trans,"
    "mean_chamfer_after,total_wall_ms";

std::string render_csv(const BenchmarkReport& report) {
  std::ostringstream out;
  out << kCsvHeader << "\n";
  for (const PairRecord& record : report.records) {
    out << "pair," << report.method << "," << report.seed << ","
        << record.pair_index << "," << csv_escape(record.shape) << ","
        << (record.success ? "true" : "false") << "," << csv_escape(record.message);
    if (record.success) {
      const Vector6d p = record.predicted.to_vector();
      const Vector6d g = record.ground_truth.to_vector();
      for (int i = 0; i < 6; ++i) out << "," << format_double(p(i));
      for (int i = 0; i < 6; ++i) out << "," << format_double(g(i));
      for (int i = 0; i < 3; ++i) out << "," << format_double(record.rotation_error_deg(i));
      for (int i = 0; i < 3; ++i) out << "," << format_double(record.translation_error(i));
      out << "," << format_double(record.mean_abs_rotation_deg) << ","
          << format_double(record.mean_abs_translation) << ","
          << format_double(record.chamfer_after) << ","
          << format_double(record.wall_ms);
    } else {
      for (int i = 0; i < 22; ++i) out << ",";
    }
    out << ",,,,,,,,\n";  // aggregate columns stay empty on pair rows
  }
  const Aggregates& a = report.aggregates;
  out << "aggregate," << report.method << "," << report.seed << ",,,,";
  for (int i = 0; i < 22; ++i) out << ",";
  out << "," << a.evaluated << "," << a.failed << ","
      << format_double(a.rmse_rotation_deg) << "," << format_double(a.mae_rotation_deg)
      << "," << format_double(a.rmse_translation) << ","
      << format_double(a.mae_translation) << ","
      << format_double(a.mean_chamfer_after) << ","
      << format_double(a.total_wall_ms) << "\n";
  return out.str();
}

std::string render_text(const BenchmarkReport& report) {
  std::ostringstream out;
  out << "method: " << report.method << "\n";
  out << "seed: " << report.seed << "\n";
  const Aggregates& a = report.aggregates;
  char line[160];
  std::snprintf(line, sizeof(line), "pairs: %d evaluated, %d failed\n",
                a.evaluated, a.failed);
  out << line;
  std::snprintf(line, sizeof(line), "rotation rmse/mae (deg): %.6g / %.6g\n",
                a.rmse_rotation_deg, a.mae_rotation_deg);
  out << line;
  std::snprintf(line, sizeof(line), "translation rmse/mae: %.6g / %.6g\n",
                a.rmse_translation, a.mae_translation);
  out << line;
  std::snprintf(line, sizeof(line), "mean chamfer after: %.6g\n",
                a.mean_chamfer_after);
  out << line;
  for (const PairRecord& record : report.records) {
    if (record.success) {
      std::snprintf(line, sizeof(line),
                    "pair %4d  %-8s rot_err %8.4f deg  trans_err %8.5f  chamfer %.6g\n",
                    record.pair_index, record.shape.c_str(),
                    record.mean_abs_rotation_deg, record.mean_abs_translation,
                    record.chamfer_after);
      out << line;
    } else {
      std::snprintf(line, sizeof(line), "pair %4d  %-8s FAILED: %s\n",
                    record.pair_index, record.shape.c_str(), record.message.c_str());
      out << line;
    }
  }
  return out.str();
}

}  // namespace

ReportFormat report_format_from_name(const std::string& name) {
  if (name == "jsonl") return ReportFormat::JsonLines;
  if (name == "csv") return ReportFormat::Csv;
  if (name == "text") return ReportFormat::Text;
  throw ConfigError("unknown report format '" + name +
                    "' (expected jsonl, csv, or text)");
}

std::string to_string(ReportFormat format) {
  switch (format) {
    case ReportFormat::JsonLines: return "jsonl";
    case ReportFormat::Csv: return "csv";
    case ReportFormat::Text: return "text";
  }
  return "unknown";
}

std::string render_report(const BenchmarkReport& report, ReportFormat format) {
  switch (format) {
    case ReportFormat::JsonLines: return render_jsonl(report);
    case ReportFormat::Csv: return render_csv(report);
    case ReportFormat::Text: return render_text(report);
  }
  throw std::invalid_argument("render_report: unknown format");
}

void emit_report(const BenchmarkReport& report, const std::filesystem::path& path,
                 ReportFormat format) {
  write_file_atomic(path, render_report(report, format));
}

BenchmarkReport parse_report_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  BenchmarkReport report;
  bool saw_aggregate = false;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& err) {
      throw FormatError(path.string(), line_no, err.what());
    }
    const std::string kind = j.value("record", "");
    if (kind == "pair") {
      PairRecord record;
      record.pair_index = j.value("index", 0);
      record.shape = j.value("shape", "");
      record.success = j.value("success", false);
      if (record.success) {
        record.predicted = action_from_json(j.at("predicted"));
        record.ground_truth = action_from_json(j.at("ground_truth"));
        for (int i = 0; i < 3; ++i) {
          record.rotation_error_deg(i) = j.at("rotation_error_deg").at(i).get<double>();
          record.translation_error(i) = j.at("translation_error").at(i).get<double>();
        }
        record.mean_abs_rotation_deg = j.value("mean_abs_rotation_deg", 0.0);
        record.mean_abs_translation = j.value("mean_abs_translation", 0.0);
        record.chamfer_after = j.value("chamfer_after", 0.0);
        record.wall_ms = j.value("wall_ms", 0.0);
      } else {
        record.message = j.value("message", "");
      }
      report.records.push_back(std::move(record));
    } else if (kind == "aggregate") {
      saw_aggregate = true;
      report.method = j.value("method", "");
      report.seed = j.value("seed", std::uint64_t{0});
      report.aggregates.evaluated = j.value("evaluated", 0);
      report.aggregates.failed = j.value("failed", 0);
      report.aggregates.rmse_rotation_deg = j.value("rmse_rotation_deg", 0.0);
      report.aggregates.mae_rotation_deg = j.value("mae_rotation_deg", 0.0);
      report.aggregates.rmse_translation = j.value("rmse_translation", 0.0);
      report.aggregates.mae_translation = j.value("mae_translation", 0.0);
      report.aggregates.mean_chamfer_after = j.value("mean_chamfer_after", 0.0);
      report.aggregates.total_wall_ms = j.value("total_wall_ms", 0.0);
      for (const auto& pair : j.value("config", nlohmann::json::array()))
        report.config_echo.emplace_back(pair.at(0).get<std::string>(),
                                        pair.at(1).get<std::string>());
    } else {
      throw FormatError(path.string(), line_no, "unknown record kind");
    }
  }
  if (!saw_aggregate)
    throw FormatError(path.string(), line_no, "missing trailing aggregate record");
  return report;
}

std::string render_sweep_csv(const std::vector<SweepCell>& cells,
                             bool include_timing) {
  std::ostringstream out;
  out << "iterations,candidates,evaluated,failed,rmse_rot_deg,mae_rot_deg,"
         "rmse_trans,mae_trans,mean_chamfer_after";
  if (include_timing) out << ",wall_ms";
  out << "\n";
  for (const SweepCell& cell : cells) {
    out << cell.iterations << "," << cell.candidates << ","
        << cell.aggregates.evaluated << "," << cell.aggregates.failed << ","
        << format_double(cell.aggregates.rmse_rotation_deg) << ","
        << format_double(cell.aggregates.mae_rotation_deg) << ","
        << format_double(cell.aggregates.rmse_translation) << ","
        << format_double(cell.aggregates.mae_translation) << ","
        << format_double(cell.aggregates.mean_chamfer_after);
    if (include_timing) out << "," << format_double(cell.wall_ms);
    out << "\n";
  }
  return out.str();
}

}  // namespace cemreg
