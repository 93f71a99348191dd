#include "hol/cli.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "hol/error.hpp"
#include "hol/eval.hpp"
#include "hol/manifest.hpp"
#include "hol/model.hpp"

namespace hol::cli {

namespace {

struct SchemaFlags {
  std::string features;  // comma-separated; empty = all non-label columns
  std::string label_col;
  std::string lo_col = "lo";
  std::string hi_col = "hi";
  std::string group_col;
  int classes = 0;

  void add(CLI::App& app) {
    app.add_option("--features", features, "Comma-separated feature columns (default: every other column)");
    app.add_option("--label-col", label_col, "Single precise-label column (overrides --lo-col/--hi-col)");
    app.add_option("--lo-col", lo_col, "Interval lower-bound column")->capture_default_str();
    app.add_option("--hi-col", hi_col, "Interval upper-bound column")->capture_default_str();
    app.add_option("--group-col", group_col, "Group id column for group-aware folds");
    app.add_option("--classes", classes, "Number of classes K (default: largest label)")->check(CLI::NonNegativeNumber);
  }

  CsvSchema schema() const {
    CsvSchema s;
    std::stringstream ss(features);
    for (std::string item; std::getline(ss, item, ',');)
      if (!item.empty()) s.feature_columns.push_back(item);
    if (!label_col.empty()) {
      s.label_column = label_col;
    } else {
      s.lo_column = lo_col;
      s.hi_column = hi_col;
    }
    s.group_column = group_col;
    s.num_classes = classes;
    return s;
  }
};

struct ModelFlags {
  std::string loss = "mae";
  double lambda = 1.0;
  std::string kernel = "rbf";
  double gamma = 0.0;  // 0 = 1/d
  int degree = 3;
  double coef0 = 0.0;
  double tol = 1e-3;
  long max_passes = 0;
  bool no_standardize = false;
  bool screen = false;

  void add(CLI::App& app) {
    app.add_option("--loss", loss, "Loss: mae or zero_one")->capture_default_str()->check(CLI::IsMember({"mae", "zero_one"}));
    app.add_option("--lambda", lambda, "Box bound lambda (> 0)")->capture_default_str()->check(CLI::PositiveNumber);
    app.add_option("--kernel", kernel, "Kernel: linear, rbf or polynomial")
        ->capture_default_str()
        ->check(CLI::IsMember({"linear", "rbf", "polynomial"}));
    app.add_option("--gamma", gamma, "RBF gamma (default 1/d)")->check(CLI::NonNegativeNumber);
    app.add_option("--degree", degree, "Polynomial degree")->capture_default_str()->check(CLI::PositiveNumber);
    app.add_option("--coef0", coef0, "Polynomial offset")->capture_default_str();
    app.add_option("--tol", tol, "SMO KKT tolerance")->capture_default_str()->check(CLI::PositiveNumber);
    app.add_option("--max-passes", max_passes, "SMO pair-update cap (0 = 10 x variables)")
        ->capture_default_str()
        ->check(CLI::NonNegativeNumber);
    app.add_flag("--no-standardize", no_standardize, "Skip feature standardization");
    app.add_flag("--screen", screen, "Run recursive feature screening before fitting");
  }

  HolConfig config(int dims) const {
    HolConfig c;
    c.loss = loss_kind_from_string(loss);
    c.lambda = lambda;
    c.kernel.kind = kernel_kind_from_string(kernel);
    c.kernel.gamma = gamma > 0.0 ? gamma : 1.0 / std::max(dims, 1);
    c.kernel.degree = degree;
    c.kernel.coef0 = coef0;
    c.solver.tol = tol;
    c.solver.max_passes = max_passes;
    c.validate();
    return c;
  }

  FitOptions fit_options() const {
    FitOptions f;
    f.standardize = !no_standardize;
    f.screen = screen;
    return f;
  }

  std::vector<HolConfig> grid(int dims) const {
    auto g = default_grid(dims);
    for (auto& c : g) {
      c.solver.tol = tol;
      c.solver.max_passes = max_passes;
    }
    return g;
  }
};

int default_jobs() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ValidationError("cannot write " + path);
  f << text;
  if (!f) throw ValidationError("failed writing " + path);
}

std::string fixed(double v, int digits = 4) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

// Share of samples whose prediction lies inside their label interval.
double interval_hit_rate(const std::vector<int>& predicted, const OrdinalDataset& data) {
  std::size_t hits = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) hits += data.labels[i].contains(predicted[i]) ? 1 : 0;
  return predicted.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(predicted.size());
}

std::filesystem::path resolve_manifest(const std::string& name, const std::string& dir) {
  if (name.size() > 5 && name.ends_with(".json") && std::filesystem::is_regular_file(name)) return name;
  return find_manifest(name, dir.empty() ? default_manifest_dir() : std::filesystem::path(dir));
}

// ---------------------------------------------------------------------------

struct SimulateCmd {
  std::string in, out;
  SchemaFlags schema;
  std::uint64_t seed = 0;
  double sigma = 1.0;
  double window_offset = 0.0;

  void add(CLI::App& app) {
    auto* c = app.add_subcommand("simulate", "Replace precise labels by simulated interval labels");
    c->add_option("--in", in, "Precise-labelled input CSV")->required();
    c->add_option("--out", out, "Output CSV with lo/hi label columns")->required();
    schema.add(*c);
    c->add_option("--seed", seed, "Random seed")->capture_default_str();
    c->add_option("--sigma", sigma, "Std of the discretized normal")->capture_default_str()->check(CLI::PositiveNumber);
    c->add_option("--window-offset", window_offset, "Offset of the integration window from the true class")
        ->capture_default_str()
        ->check(CLI::NonNegativeNumber);
  }

  int run(std::ostream& out_stream) const {
    const auto data = load_csv(in, schema.schema());
    SimulationParams p;
    p.seed = seed;
    p.sigma = sigma;
    p.window_offset = window_offset;
    const auto hybrid = simulate_intervals(data, p);
    write_csv(hybrid, out);
    const auto precise = hybrid.count_precise();
    out_stream << "precise: " << precise << "\ninterval: " << hybrid.size() - precise << '\n';
    return kSuccess;
  }
};

struct PrepareCmd {
  std::string manifest, manifest_dir, out_train, out_test;
  std::uint64_t seed = 0;
  bool no_simulate = false;

  void add(CLI::App& app) {
    auto* c = app.add_subcommand("prepare", "Load a dataset manifest and write a seeded train/test split");
    c->add_option("--manifest", manifest, "Manifest name or path to a manifest JSON file")->required();
    c->add_option("--manifest-dir", manifest_dir, "Directory to search for manifest names");
    c->add_option("--seed", seed, "Random seed")->capture_default_str();
    c->add_option("--out-train", out_train, "Training CSV (lo/hi label columns)")->required();
    c->add_option("--out-test", out_test, "Test CSV (precise labels as lo == hi)")->required();
    c->add_flag("--no-simulate", no_simulate, "Keep precise training labels even if the manifest simulates intervals");
  }

  int run(std::ostream& out) const {
    auto m = load_manifest(resolve_manifest(manifest, manifest_dir));
    if (no_simulate) m.simulate = false;
    const auto pool = load_manifest_dataset(m);
    const auto split = make_split(pool, m, seed);
    write_csv(split.train, out_train);
    write_csv(split.test, out_test);
    const auto precise = split.train.count_precise();
    out << "dataset: " << m.name << "\ntrain: " << split.train.size() << " (precise " << precise << ", interval "
        << split.train.size() - precise << ")\ntest: " << split.test.size() << '\n';
    return kSuccess;
  }
};

struct TrainCmd {
  std::string data, model_out;
  SchemaFlags schema;
  ModelFlags model;
  bool grid = false;
  int folds = 10;
  std::uint64_t seed = 0;
  int jobs = default_jobs();

  void add(CLI::App& app) {
    auto* c = app.add_subcommand("train", "Fit a model and write it to a model file");
    c->add_option("--data", data, "Training CSV")->required();
    c->add_option("--model", model_out, "Output model file")->required();
    schema.add(*c);
    model.add(*c);
    c->add_flag("--grid", grid, "Select the configuration by grid search with cross-validation first");
    c->add_option("--folds", folds, "Cross-validation folds for --grid")->capture_default_str()->check(CLI::Range(2, 1000));
    c->add_option("--seed", seed, "Random seed for fold assignment")->capture_default_str();
    c->add_option("--jobs", jobs, "Concurrent fit tasks")->check(CLI::PositiveNumber);
  }

  int run(std::ostream& out, std::ostream& err) const {
    const auto train = load_csv(data, schema.schema());
    HolConfig config = model.config(train.dims());
    if (grid) {
      CvOptions cv;
      cv.folds = folds;
      cv.seed = seed;
      cv.jobs = jobs;
      cv.fit = model.fit_options();
      const auto grid_configs = model.grid(train.dims());
      const auto result = grid_search_cv(train, grid_configs, cv);
      config = result.best;
      out << "selected: " << config.describe() << " (cv error " << fixed(result.table[result.best_index].mean_error) << ")\n";
    }
    const auto fitted = fit(train, config, model.fit_options());
    save_model(fitted, model_out);
    const auto predicted = predict(fitted, train.features);
    out << "training accuracy: " << fixed(interval_hit_rate(predicted, train)) << '\n';
    out << "intercepts:";
    for (double b : fitted.intercepts.values) out << ' ' << fixed(b, 6);
    out << (fitted.intercepts.projected ? " (projected)\n" : "\n");
    if (!fitted.converged) {
      err << "warning: solver stopped after " << fitted.solver_iterations << " updates without converging\n";
      return kSolverWarning;
    }
    return kSuccess;
  }
};

struct PredictCmd {
  std::string model_in, data, out_path;
  SchemaFlags schema;
  bool scores = false;

  void add(CLI::App& app) {
    auto* c = app.add_subcommand("predict", "Predict classes for a feature CSV");
    c->add_option("--model", model_in, "Model file")->required();
    c->add_option("--data", data, "Feature CSV; label and group columns are ignored")->required();
    c->add_option("--out", out_path, "Output CSV of predicted classes")->required();
    c->add_option("--features", schema.features, "Comma-separated feature columns (default: every non-label column)");
    c->add_option("--label-col", schema.label_col, "Label column to ignore");
    c->add_option("--lo-col", schema.lo_col, "Lower-bound column to ignore")->capture_default_str();
    c->add_option("--hi-col", schema.hi_col, "Upper-bound column to ignore")->capture_default_str();
    c->add_option("--group-col", schema.group_col, "Group column to ignore");
    c->add_flag("--scores", scores, "Append the K-1 decision values");
  }

  int run(std::ostream& out) const {
    const auto m = load_model(model_in);
    const auto table = read_csv(data);
    const auto s = schema.schema();
    std::vector<std::size_t> cols;
    if (!s.feature_columns.empty()) {
      for (const auto& name : s.feature_columns) {
        const int c = table.column(name);
        if (c < 0) throw ValidationError("missing column '" + name + "'");
        cols.push_back(static_cast<std::size_t>(c));
      }
    } else {
      for (std::size_t c = 0; c < table.header.size(); ++c) {
        const auto& h = table.header[c];
        if (h == schema.label_col || h == schema.lo_col || h == schema.hi_col || h == schema.group_col) continue;
        cols.push_back(c);
      }
    }
    CsvSchema feature_schema;
    for (auto c : cols) feature_schema.feature_columns.push_back(table.header[c]);
    // Reuse the dataset parser for numeric validation with a dummy label.
    CsvTable with_label = table;
    with_label.header.push_back("__label");
    for (auto& row : with_label.rows) row.push_back("1");
    feature_schema.label_column = "__label";
    const auto x = dataset_from_table(with_label, feature_schema).features;
    if (x.cols() != m.input_dims())
      throw ValidationError("model expects " + std::to_string(m.input_dims()) + " features, file has " +
                            std::to_string(x.cols()));
    const auto f = m.decision_values(x);
    std::ostringstream os;
    os << "predicted";
    if (scores)
      for (int k = 1; k < m.num_classes; ++k) os << ",f" << k;
    os << '\n';
    os.precision(17);
    for (Eigen::Index r = 0; r < f.rows(); ++r) {
      os << predict_label(std::span<const double>(f.row(r).data(), static_cast<std::size_t>(f.cols())));
      if (scores)
        for (Eigen::Index k = 0; k < f.cols(); ++k) os << ',' << f(r, k);
      os << '\n';
    }
    write_text(out_path, os.str());
    out << "predicted " << f.rows() << " rows\n";
    return kSuccess;
  }
};

struct CvCmd {
  std::string data, out_path;
  SchemaFlags schema;
  ModelFlags model;
  bool grid = false;
  int folds = 10;
  std::uint64_t seed = 0;
  int jobs = default_jobs();

  void add(CLI::App& app) {
    auto* c = app.add_subcommand("cv", "Cross-validate one configuration or the default grid");
    c->add_option("--data", data, "Training CSV")->required();
    c->add_option("--out", out_path, "CSV of per-configuration cross-validation errors");
    schema.add(*c);
    model.add(*c);
    c->add_flag("--grid", grid, "Evaluate the default grid instead of the single configuration");
    c->add_option("--folds", folds, "Cross-validation folds")->capture_default_str()->check(CLI::Range(2, 1000));
    c->add_option("--seed", seed, "Random seed for fold assignment")->capture_default_str();
    c->add_option("--jobs", jobs, "Concurrent fit tasks")->check(CLI::PositiveNumber);
  }

  int run(std::ostream& out) const {
    const auto train = load_csv(data, schema.schema());
    const std::vector<HolConfig> configs = grid ? model.grid(train.dims()) : std::vector{model.config(train.dims())};
    CvOptions cv;
    cv.folds = folds;
    cv.seed = seed;
    cv.jobs = jobs;
    cv.fit = model.fit_options();
    const auto result = grid_search_cv(train, configs, cv);
    std::ostringstream os;
    os << "loss,lambda,kernel,mean_error,nonconverged";
    for (int f = 1; f <= folds; ++f) os << ",fold" << f;
    os << '\n';
    for (const auto& row : result.table) {
      os << to_string(row.config.loss) << ',' << row.config.lambda << ",\"" << row.config.kernel.describe() << "\","
         << fixed(row.mean_error, 6) << ',' << row.nonconverged_fits;
      for (double e : row.fold_errors) os << ',' << fixed(e, 6);
      os << '\n';
    }
    if (!out_path.empty()) write_text(out_path, os.str());
    out << "best: " << result.best.describe() << " (cv error " << fixed(result.table[result.best_index].mean_error) << ")\n";
    return kSuccess;
  }
};

struct BenchmarkCmd {
  std::string manifest, manifest_dir, methods = "hol,no_interval,mid_interval";
  int runs = 30;
  std::uint64_t seed = 0;
  int folds = 10;
  int jobs = default_jobs();
  std::string format = "table";
  std::string out_path, csv_path, json_path, plot_path;
  bool freeze = false;
  ModelFlags model;

  void add(CLI::App& app) {
    auto* c = app.add_subcommand("benchmark", "Repeated-run benchmark of HOL and its baselines on a manifest");
    c->add_option("--manifest", manifest, "Manifest name or path to a manifest JSON file")->required();
    c->add_option("--manifest-dir", manifest_dir, "Directory to search for manifest names");
    c->add_option("--methods", methods, "Comma-separated methods: hol, no_interval, mid_interval")->capture_default_str();
    c->add_option("--runs", runs, "Number of seeded runs")->capture_default_str()->check(CLI::PositiveNumber);
    c->add_option("--seed", seed, "Base seed; run r uses seed + r")->capture_default_str();
    c->add_option("--folds", folds, "Cross-validation folds for tuning")->capture_default_str()->check(CLI::Range(2, 1000));
    c->add_option("--jobs", jobs, "Concurrent fit tasks")->check(CLI::PositiveNumber);
    c->add_option("--format", format, "Format for stdout or --out: table, csv, json or plot")
        ->capture_default_str()
        ->check(CLI::IsMember({"table", "csv", "json", "plot"}));
    c->add_option("--out", out_path, "Write the report in --format to this file instead of stdout");
    c->add_option("--csv", csv_path, "Also write a CSV report");
    c->add_option("--json", json_path, "Also write a JSON report with per-run values");
    c->add_option("--plot", plot_path, "Also write bar-chart data");
    c->add_flag("--freeze", freeze, "Skip tuning and use the model flags for every run");
    model.add(*c);
  }

  int run(std::ostream& out) const {
    const auto m = load_manifest(resolve_manifest(manifest, manifest_dir));
    std::vector<Method> list;
    std::stringstream ss(methods);
    for (std::string item; std::getline(ss, item, ',');)
      if (!item.empty()) list.push_back(method_from_string(item));
    BenchmarkOptions options;
    options.folds = folds;
    options.jobs = jobs;
    options.fit = model.fit_options();
    if (freeze) {
      // Resolve gamma against the manifest's encoded dimension.
      options.frozen = model.config(load_manifest_dataset(m).dims());
    }
    const auto report = run_benchmark(m, list, runs, seed, options);
    const auto fmt = report_format_from_string(format);
    if (out_path.empty()) out << render_report(report, fmt);
    else emit_report(report, fmt, out_path);
    if (!csv_path.empty()) emit_report(report, ReportFormat::csv, csv_path);
    if (!json_path.empty()) emit_report(report, ReportFormat::json, json_path);
    if (!plot_path.empty()) emit_report(report, ReportFormat::plot, plot_path);
    return report.failures.empty() ? kSuccess : kPartialFailure;
  }
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hybrid ordinal learner: kernel ordinal classification from precise and interval labels", "hol"};
  app.allow_config_extras(false);
  app.set_config("--config", "", "Read option values from a TOML/INI file; command-line flags take precedence");
  app.require_subcommand(1);

  SimulateCmd simulate;
  PrepareCmd prepare;
  TrainCmd train;
  PredictCmd predict_cmd;
  CvCmd cv;
  BenchmarkCmd benchmark;
  simulate.add(app);
  prepare.add(app);
  train.add(app);
  predict_cmd.add(app);
  cv.add(app);
  benchmark.add(app);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kUsage;
  }

  try {
    if (app.got_subcommand("simulate")) return simulate.run(out);
    if (app.got_subcommand("prepare")) return prepare.run(out);
    if (app.got_subcommand("train")) return train.run(out, err);
    if (app.got_subcommand("predict")) return predict_cmd.run(out);
    if (app.got_subcommand("cv")) return cv.run(out);
    if (app.got_subcommand("benchmark")) return benchmark.run(out);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const SolverError& e) {
    err << "solver error: " << e.what() << '\n';
    return kSolverWarning;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}

}  // namespace hol::cli
