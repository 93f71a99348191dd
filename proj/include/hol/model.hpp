#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "hol/data.hpp"
#include "hol/kernel.hpp"
#include "hol/loss.hpp"
#include "hol/solver.hpp"

namespace hol {

struct HolConfig {
  LossKind loss = LossKind::mae;
  double lambda = 1.0;
  KernelSpec kernel;
  SolverOptions solver;

  void validate() const;
  std::string describe() const;

  friend bool operator==(const HolConfig& a, const HolConfig& b) {
    return a.loss == b.loss && a.lambda == b.lambda && a.kernel == b.kernel;
  }
};

struct FitOptions {
  bool standardize = true;
  bool screen = false;
  ScreeningOptions screening;
};

// Fit-time feature pipeline: column screening, then standardization.
struct FeatureTransform {
  int input_dims = 0;
  std::vector<int> retained;
  bool standardized = false;
  Standardizer stats;

  RowMatrix apply(const RowMatrix& features) const;
};

struct HolModel {
  FittedScorer scorer;
  HolConfig config;
  int num_classes = 2;
  FeatureTransform transform;
  Intercepts intercepts;
  bool converged = true;
  long solver_iterations = 0;

  int input_dims() const { return transform.input_dims; }
  RowMatrix decision_values(const RowMatrix& features) const;  // m x (K-1)
};

inline constexpr int kModelSchemaVersion = 1;

HolModel fit(const OrdinalDataset& data, const HolConfig& config, const FitOptions& options = {});
std::vector<int> predict(const HolModel& model, const RowMatrix& features);

nlohmann::json model_to_json(const HolModel& model);
HolModel model_from_json(const nlohmann::json& doc);
void save_model(const HolModel& model, const std::filesystem::path& path);
HolModel load_model(const std::filesystem::path& path);

nlohmann::json config_to_json(const HolConfig& config);
HolConfig config_from_json(const nlohmann::json& doc);

// lambda in {0.01, 0.1, 1, 10, 100}; linear and rbf with gamma in {0.5/d, 1/d, 2/d};
// both loss kinds.
std::vector<HolConfig> default_grid(int dims);

struct CvRow {
  HolConfig config;
  double mean_error = 0.0;
  std::vector<double> fold_errors;
  int nonconverged_fits = 0;
};

struct CvResult {
  HolConfig best;
  std::size_t best_index = 0;
  std::vector<CvRow> table;  // grid order
};

struct CvOptions {
  int folds = 10;
  std::uint64_t seed = 0;
  int jobs = 1;
  FitOptions fit;
};

// Validation error counts a sample as correct iff the prediction lies in its
// label interval. Ties: smaller lambda, then simpler kernel, then grid order.
CvResult grid_search_cv(const OrdinalDataset& data, std::span<const HolConfig> grid, const CvOptions& options);

// Baseline label handling.
OrdinalDataset to_no_interval(const OrdinalDataset& data);
OrdinalDataset to_mid_interval(const OrdinalDataset& data, std::uint64_t seed);

}  // namespace hol
