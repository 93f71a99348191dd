#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace hol {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

// Closed interval [lo, hi] of 1-based ordinal classes. lo == hi is a precise label.
struct LabelInterval {
  int lo = 1;
  int hi = 1;

  static LabelInterval precise(int c) { return {c, c}; }

  bool is_precise() const { return lo == hi; }
  bool contains(int c) const { return lo <= c && c <= hi; }
  int width() const { return hi - lo + 1; }

  friend bool operator==(const LabelInterval&, const LabelInterval&) = default;
};

struct OrdinalDataset {
  RowMatrix features;                    // n x d
  std::vector<LabelInterval> labels;     // n
  int num_classes = 2;                   // K
  std::vector<std::optional<std::int64_t>> group_ids;  // empty, or n entries
  std::vector<std::string> feature_names;              // empty, or d entries

  std::size_t size() const { return labels.size(); }
  int dims() const { return static_cast<int>(features.cols()); }
  std::size_t count_precise() const;

  // Throws ValidationError when any invariant is broken.
  void validate() const;

  OrdinalDataset subset(std::span<const int> indices) const;
};

// Numeric range with explicit endpoint closedness, e.g. "(0,5]" or "[14,inf)".
struct NumericRange {
  double lower = 0.0;
  double upper = 0.0;
  bool lower_inclusive = false;
  bool upper_inclusive = true;

  bool contains(double v) const;
  bool overlaps(const NumericRange& other) const;
  static NumericRange parse(const std::string& text);
  std::string to_string() const;
};

struct ClassRange {
  NumericRange range;
  int class_index = 1;
};

struct AmbiguousRange {
  NumericRange range;
  LabelInterval interval;
};

struct BinningSpec {
  std::vector<ClassRange> class_ranges;
  std::vector<AmbiguousRange> ambiguous_ranges;

  void validate() const;
};

struct BinningResult {
  std::vector<std::optional<LabelInterval>> labels;  // nullopt = excluded
  std::size_t precise = 0;
  std::size_t interval = 0;
  std::size_t excluded = 0;
};

BinningResult bin_numeric_target(std::span<const double> values, const BinningSpec& spec);

// Column roles for CSV ingestion. Either label_column (precise labels) or
// lo_column + hi_column must be set.
struct CsvSchema {
  std::vector<std::string> feature_columns;  // empty = every column without another role
  std::string label_column;
  std::string lo_column;
  std::string hi_column;
  std::string group_column;
  int num_classes = 0;  // 0 = infer as the largest label seen
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const;  // -1 when absent
};

CsvTable read_csv(const std::filesystem::path& path);
CsvTable parse_csv(const std::string& text);

OrdinalDataset load_csv(const std::filesystem::path& path, const CsvSchema& schema);
OrdinalDataset dataset_from_table(const CsvTable& table, const CsvSchema& schema);

// Writes features plus lo/hi label columns (and the group column when present).
void write_csv(const OrdinalDataset& data, const std::filesystem::path& path);
std::string to_csv_text(const OrdinalDataset& data);

struct SimulationParams {
  double sigma = 1.0;
  std::uint64_t seed = 0;
  // Shift of the unit-width integration window away from the true class, in
  // class units. 0 puts the window [v-0.5, v+0.5] around each candidate bound
  // v; 1 reproduces the printed [v+0.5, v+1.5] form.
  double window_offset = 0.0;

  void validate() const;
};

enum class BoundSide { lower, upper };

struct BoundPmf {
  int first_class = 1;        // support is [first_class, first_class + mass.size() - 1]
  std::vector<double> mass;   // sums to 1

  double at(int c) const;
  int last_class() const { return first_class + static_cast<int>(mass.size()) - 1; }
};

BoundPmf interval_bound_pmf(int y, int num_classes, BoundSide side, const SimulationParams& params);

// Replaces every (precise) label y by [y_l, y_r] drawn independently from the
// lower and upper bound distributions.
OrdinalDataset simulate_intervals(const OrdinalDataset& data, const SimulationParams& params);

struct ScreeningOptions {
  double corr_threshold = 0.95;
  double rae_threshold = 0.05;
  double ridge = 1e-8;
};

struct ScreeningResult {
  std::vector<int> retained;   // original column indices, increasing
  std::vector<int> removed;    // in removal order
  bool regression_skipped = false;
};

ScreeningResult screen_features(const RowMatrix& features, const ScreeningOptions& options = {});

// Per-feature max absolute partial correlation and relative absolute error of
// the regression on the remaining columns; exposed for diagnostics and tests.
std::vector<double> max_partial_correlations(const RowMatrix& features, double ridge = 1e-8);
std::vector<double> regression_relative_errors(const RowMatrix& features);

struct Standardizer {
  std::vector<double> mean;
  std::vector<double> scale;  // population std; 0 for constant columns

  static Standardizer fit(const RowMatrix& features);
  RowMatrix apply(const RowMatrix& features) const;
};

struct StandardizeResult {
  OrdinalDataset train;
  std::vector<OrdinalDataset> others;
  Standardizer stats;
};

StandardizeResult standardize(const OrdinalDataset& train, std::span<const OrdinalDataset> others = {});

struct Fold {
  std::vector<int> train;
  std::vector<int> validation;
};

// Group-aware k-fold: samples sharing a group id never straddle folds.
// Samples without a group id are singleton groups.
std::vector<Fold> group_kfold(const OrdinalDataset& data, int folds, std::uint64_t seed);

}  // namespace hol
