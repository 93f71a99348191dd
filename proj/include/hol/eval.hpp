#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "hol/manifest.hpp"
#include "hol/model.hpp"

namespace hol {

struct MetricSet {
  double overall_acc = 0.0;
  double avg_class_acc = 0.0;
  double mean_abs_deviation = 0.0;  // reported as MSPE in the benchmark tables
  std::vector<int> absent_classes;  // excluded from avg_class_acc
};

MetricSet compute_metrics(std::span<const int> predicted, std::span<const int> truth, int num_classes);

enum class Method { hol, no_interval, mid_interval };

std::string to_string(Method method);
Method method_from_string(const std::string& name);

struct RunRecord {
  std::uint64_t seed = 0;
  MetricSet metrics;
  std::string config;
  std::size_t train_precise = 0;
  std::size_t train_interval = 0;
};

struct ReportRow {
  std::string dataset;
  std::string method;
  std::vector<RunRecord> runs;
  int run_count = 0;  // runs.size() unless loaded from a summary-only CSV
  double overall_acc_mean = 0.0, overall_acc_std = 0.0;
  double avg_class_acc_mean = 0.0, avg_class_acc_std = 0.0;
  double mad_mean = 0.0, mad_std = 0.0;
  std::string best_config_mode;

  // Recomputes the summary columns from the per-run records.
  void aggregate();
};

struct BenchmarkReport {
  std::vector<ReportRow> rows;
  std::vector<std::string> failures;  // "dataset/method/run: message"

  const ReportRow* find(const std::string& dataset, Method method) const;
};

struct BenchmarkOptions {
  int folds = 10;
  int jobs = 1;
  std::vector<HolConfig> grid;        // empty = default_grid(d)
  std::optional<HolConfig> frozen;    // skip tuning, use this config every run
  FitOptions fit;
};

BenchmarkReport run_benchmark(const DatasetManifest& manifest, std::span<const Method> methods, int runs,
                              std::uint64_t base_seed, const BenchmarkOptions& options = {});

enum class ReportFormat { table, csv, json, plot };

ReportFormat report_format_from_string(const std::string& name);
std::string render_report(const BenchmarkReport& report, ReportFormat format);
void emit_report(const BenchmarkReport& report, ReportFormat format, const std::filesystem::path& path);

nlohmann::json report_to_json(const BenchmarkReport& report);
BenchmarkReport report_from_json(const nlohmann::json& doc);
BenchmarkReport report_from_csv(const std::string& text);

// "0.80 (0.035)": mean to two decimals, std to two significant digits.
std::string format_mean_std(double mean, double std);

}  // namespace hol
