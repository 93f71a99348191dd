#include "hol/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "hol/error.hpp"
#include "hol/parallel.hpp"
#include "hol/rng.hpp"

namespace hol {

using nlohmann::json;

void HolConfig::validate() const {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ValidationError("lambda must be positive, got " + std::to_string(lambda));
  kernel.validate();
  if (!(solver.tol > 0.0)) throw ValidationError("solver tolerance must be positive");
  if (solver.max_passes < 0) throw ValidationError("max_passes must be nonnegative");
}

std::string HolConfig::describe() const {
  std::ostringstream os;
  os.precision(6);
  os << to_string(loss) << " lambda=" << lambda << " " << kernel.describe();
  return os.str();
}

RowMatrix FeatureTransform::apply(const RowMatrix& features) const {
  if (features.cols() != input_dims)
    throw ValidationError("expected " + std::to_string(input_dims) + " features, got " + std::to_string(features.cols()));
  RowMatrix kept(features.rows(), static_cast<Eigen::Index>(retained.size()));
  for (std::size_t c = 0; c < retained.size(); ++c) kept.col(static_cast<Eigen::Index>(c)) = features.col(retained[c]);
  return standardized ? stats.apply(kept) : kept;
}

RowMatrix HolModel::decision_values(const RowMatrix& features) const {
  const RowMatrix x = transform.apply(features);
  RowMatrix f(x.rows(), num_classes - 1);
  const auto d = static_cast<std::size_t>(x.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const auto values = scorer.decision_values(std::span<const double>(x.row(r).data(), d));
    for (std::size_t k = 0; k < values.size(); ++k) f(r, static_cast<Eigen::Index>(k)) = values[k];
  }
  return f;
}

namespace {

struct CoreFit {
  DualProblem problem;
  DualSolution solution;
  Intercepts intercepts;
};

CoreFit fit_core(const OrdinalDataset& data, Eigen::MatrixXd gram, const HolConfig& config) {
  CoreFit core;
  core.problem = assemble_dual(data, std::move(gram), config.lambda, config.loss);
  if (core.problem.size() == 0)
    throw ValidationError("no trainable variable: every sample's interval spans all " + std::to_string(data.num_classes) +
                          " classes");
  core.solution = solve_smo(core.problem, config.solver);
  core.intercepts = recover_intercepts(core.problem, core.solution);
  return core;
}

FeatureTransform fit_transform(const RowMatrix& features, const FitOptions& options) {
  FeatureTransform t;
  t.input_dims = static_cast<int>(features.cols());
  if (options.screen) {
    t.retained = screen_features(features, options.screening).retained;
  } else {
    t.retained.resize(static_cast<std::size_t>(features.cols()));
    for (std::size_t j = 0; j < t.retained.size(); ++j) t.retained[j] = static_cast<int>(j);
  }
  if (options.standardize) {
    RowMatrix kept(features.rows(), static_cast<Eigen::Index>(t.retained.size()));
    for (std::size_t c = 0; c < t.retained.size(); ++c) kept.col(static_cast<Eigen::Index>(c)) = features.col(t.retained[c]);
    t.stats = Standardizer::fit(kept);
    t.standardized = true;
  }
  return t;
}

}  // namespace

HolModel fit(const OrdinalDataset& data, const HolConfig& config, const FitOptions& options) {
  data.validate();
  config.validate();
  if (data.size() == 0) throw ValidationError("cannot fit an empty dataset");
  HolModel model;
  model.config = config;
  model.num_classes = data.num_classes;
  model.transform = fit_transform(data.features, options);
  OrdinalDataset transformed = data;
  transformed.features = model.transform.apply(data.features);
  auto core = fit_core(transformed, gram(transformed.features, config.kernel), config);
  model.converged = core.solution.converged;
  model.solver_iterations = core.solution.iterations;
  model.scorer = make_scorer(transformed.features, config.kernel, core.problem, core.solution, core.intercepts.values);
  model.intercepts = std::move(core.intercepts);
  return model;
}

std::vector<int> predict(const HolModel& model, const RowMatrix& features) {
  const RowMatrix f = model.decision_values(features);
  std::vector<int> out(static_cast<std::size_t>(f.rows()));
  for (Eigen::Index r = 0; r < f.rows(); ++r)
    out[static_cast<std::size_t>(r)] = predict_label(std::span<const double>(f.row(r).data(), static_cast<std::size_t>(f.cols())));
  return out;
}

// ---------------------------------------------------------------------------
// Serialization

json config_to_json(const HolConfig& config) {
  return {
      {"loss", to_string(config.loss)},
      {"lambda", config.lambda},
      {"kernel",
       {{"kind", to_string(config.kernel.kind)},
        {"gamma", config.kernel.gamma},
        {"degree", config.kernel.degree},
        {"coef0", config.kernel.coef0}}},
      {"solver", {{"tol", config.solver.tol}, {"max_passes", config.solver.max_passes}}},
  };
}

HolConfig config_from_json(const json& doc) {
  HolConfig c;
  try {
    c.loss = loss_kind_from_string(doc.at("loss").get<std::string>());
    c.lambda = doc.at("lambda").get<double>();
    const auto& k = doc.at("kernel");
    c.kernel.kind = kernel_kind_from_string(k.at("kind").get<std::string>());
    c.kernel.gamma = k.value("gamma", 1.0);
    c.kernel.degree = k.value("degree", 3);
    c.kernel.coef0 = k.value("coef0", 0.0);
    if (const auto it = doc.find("solver"); it != doc.end()) {
      c.solver.tol = it->value("tol", c.solver.tol);
      c.solver.max_passes = it->value("max_passes", c.solver.max_passes);
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("bad config document: ") + e.what());
  }
  c.validate();
  return c;
}

json model_to_json(const HolModel& model) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < model.scorer.support_rows.rows(); ++r) {
    const auto row = model.scorer.support_rows.row(r);
    rows.push_back(std::vector<double>(row.data(), row.data() + row.size()));
  }
  return {
      {"schema_version", kModelSchemaVersion},
      {"num_classes", model.num_classes},
      {"config", config_to_json(model.config)},
      {"intercepts", model.intercepts.values},
      {"raw_intercepts", model.intercepts.raw},
      {"intercepts_projected", model.intercepts.projected},
      {"converged", model.converged},
      {"solver_iterations", model.solver_iterations},
      {"transform",
       {{"input_dims", model.transform.input_dims},
        {"retained", model.transform.retained},
        {"standardized", model.transform.standardized},
        {"mean", model.transform.stats.mean},
        {"scale", model.transform.stats.scale}}},
      {"support", {{"rows", rows}, {"coefficients", model.scorer.coefficients}}},
  };
}

HolModel model_from_json(const json& doc) {
  HolModel m;
  try {
    const int version = doc.at("schema_version").get<int>();
    if (version != kModelSchemaVersion)
      throw ValidationError("unsupported model schema version " + std::to_string(version));
    m.num_classes = doc.at("num_classes").get<int>();
    m.config = config_from_json(doc.at("config"));
    m.intercepts.values = doc.at("intercepts").get<std::vector<double>>();
    m.intercepts.raw = doc.value("raw_intercepts", m.intercepts.values);
    m.intercepts.projected = doc.value("intercepts_projected", false);
    for (std::size_t k = 0; k + 1 < m.intercepts.raw.size(); ++k)
      m.intercepts.max_raw_decrease = std::max(m.intercepts.max_raw_decrease, m.intercepts.raw[k] - m.intercepts.raw[k + 1]);
    m.converged = doc.value("converged", true);
    m.solver_iterations = doc.value("solver_iterations", 0L);
    const auto& t = doc.at("transform");
    m.transform.input_dims = t.at("input_dims").get<int>();
    m.transform.retained = t.at("retained").get<std::vector<int>>();
    m.transform.standardized = t.at("standardized").get<bool>();
    m.transform.stats.mean = t.at("mean").get<std::vector<double>>();
    m.transform.stats.scale = t.at("scale").get<std::vector<double>>();
    const auto& s = doc.at("support");
    const auto rows = s.at("rows").get<std::vector<std::vector<double>>>();
    m.scorer.coefficients = s.at("coefficients").get<std::vector<double>>();
    m.scorer.kernel = m.config.kernel;
    m.scorer.intercepts = m.intercepts.values;
    const auto dims = static_cast<Eigen::Index>(m.transform.retained.size());
    m.scorer.support_rows.resize(static_cast<Eigen::Index>(rows.size()), dims);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (static_cast<Eigen::Index>(rows[r].size()) != dims) throw ValidationError("support row has the wrong length");
      for (Eigen::Index j = 0; j < dims; ++j) m.scorer.support_rows(static_cast<Eigen::Index>(r), j) = rows[r][static_cast<std::size_t>(j)];
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("bad model file: ") + e.what());
  }
  if (m.num_classes < 2 || static_cast<int>(m.intercepts.values.size()) != m.num_classes - 1)
    throw ValidationError("model intercept count does not match K");
  if (m.scorer.coefficients.size() != static_cast<std::size_t>(m.scorer.support_rows.rows()))
    throw ValidationError("model support rows and coefficients differ in count");
  for (int c : m.transform.retained)
    if (c < 0 || c >= m.transform.input_dims) throw ValidationError("model retains a column outside the input");
  if (m.transform.standardized && (m.transform.stats.mean.size() != m.transform.retained.size() ||
                                   m.transform.stats.scale.size() != m.transform.retained.size()))
    throw ValidationError("model standardization statistics have the wrong length");
  return m;
}

void save_model(const HolModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << model_to_json(model).dump(2) << '\n';
  if (!out) throw ValidationError("failed writing " + path.string());
}

HolModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open model " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError("model file is not valid JSON: " + std::string(e.what()));
  }
  return model_from_json(doc);
}

// ---------------------------------------------------------------------------
// Grid search

std::vector<HolConfig> default_grid(int dims) {
  const double d = std::max(dims, 1);
  std::vector<KernelSpec> kernels = {KernelSpec::linear(), KernelSpec::rbf(0.5 / d), KernelSpec::rbf(1.0 / d),
                                     KernelSpec::rbf(2.0 / d)};
  std::vector<HolConfig> grid;
  for (LossKind loss : {LossKind::mae, LossKind::zero_one})
    for (const auto& kernel : kernels)
      for (double lambda : {0.01, 0.1, 1.0, 10.0, 100.0}) {
        HolConfig c;
        c.loss = loss;
        c.lambda = lambda;
        c.kernel = kernel;
        grid.push_back(c);
      }
  return grid;
}

namespace {

int kernel_rank(KernelKind kind) {
  switch (kind) {
    case KernelKind::linear:
      return 0;
    case KernelKind::rbf:
      return 1;
    case KernelKind::polynomial:
      return 2;
  }
  return 3;
}

struct CellResult {
  double error = 1.0;
  bool converged = true;
};

}  // namespace

CvResult grid_search_cv(const OrdinalDataset& data, std::span<const HolConfig> grid, const CvOptions& options) {
  if (grid.empty()) throw ValidationError("grid must not be empty");
  for (const auto& c : grid) c.validate();
  data.validate();
  const auto folds = group_kfold(data, options.folds, options.seed);

  const FeatureTransform transform = fit_transform(data.features, options.fit);
  OrdinalDataset transformed = data;
  transformed.features = transform.apply(data.features);

  // One Gram matrix per distinct kernel, sliced per fold.
  std::vector<KernelSpec> kernels;
  std::vector<std::size_t> kernel_of(grid.size());
  for (std::size_t c = 0; c < grid.size(); ++c) {
    const auto it = std::find(kernels.begin(), kernels.end(), grid[c].kernel);
    kernel_of[c] = static_cast<std::size_t>(it - kernels.begin());
    if (it == kernels.end()) kernels.push_back(grid[c].kernel);
  }
  std::vector<Eigen::MatrixXd> grams(kernels.size());
  parallel_for(kernels.size(), options.jobs, [&](std::size_t k) { grams[k] = gram(transformed.features, kernels[k]); });

  std::vector<OrdinalDataset> fold_train;
  for (const auto& f : folds) fold_train.push_back(transformed.subset(f.train));

  const std::size_t cells = grid.size() * folds.size();
  std::vector<CellResult> results(cells);
  parallel_for(cells, options.jobs, [&](std::size_t cell) {
    const std::size_t c = cell / folds.size();
    const std::size_t f = cell % folds.size();
    const auto& fold = folds[f];
    const auto& g = grams[kernel_of[c]];
    CellResult result;
    try {
      const auto core = fit_core(fold_train[f], g(fold.train, fold.train), grid[c]);
      Vector coef = Vector::Zero(static_cast<Eigen::Index>(fold.train.size()));
      for (std::size_t u = 0; u < core.problem.variables.size(); ++u)
        coef(core.problem.variables[u].sample) += core.solution.alphas[u] * core.problem.variables[u].z;
      const Vector h = g(fold.validation, fold.train) * coef;
      std::size_t hits = 0;
      std::vector<double> f_values(core.intercepts.values.size());
      for (std::size_t v = 0; v < fold.validation.size(); ++v) {
        for (std::size_t k = 0; k < f_values.size(); ++k)
          f_values[k] = h(static_cast<Eigen::Index>(v)) + core.intercepts.values[k];
        if (data.labels[static_cast<std::size_t>(fold.validation[v])].contains(predict_label(f_values))) ++hits;
      }
      result.error = 1.0 - static_cast<double>(hits) / static_cast<double>(fold.validation.size());
      result.converged = core.solution.converged;
    } catch (const ValidationError&) {
      result.error = 1.0;
    } catch (const SolverError&) {
      result.error = 1.0;
      result.converged = false;
    }
    results[cell] = result;
  });

  CvResult out;
  for (std::size_t c = 0; c < grid.size(); ++c) {
    CvRow row;
    row.config = grid[c];
    for (std::size_t f = 0; f < folds.size(); ++f) {
      const auto& r = results[c * folds.size() + f];
      row.fold_errors.push_back(r.error);
      if (!r.converged) ++row.nonconverged_fits;
    }
    double sum = 0.0;
    for (double e : row.fold_errors) sum += e;
    row.mean_error = sum / static_cast<double>(row.fold_errors.size());
    out.table.push_back(std::move(row));
  }

  constexpr double kTie = 1e-12;
  for (std::size_t c = 1; c < out.table.size(); ++c) {
    const auto& cand = out.table[c];
    const auto& best = out.table[out.best_index];
    if (cand.mean_error < best.mean_error - kTie) {
      out.best_index = c;
    } else if (cand.mean_error <= best.mean_error + kTie) {
      if (cand.config.lambda < best.config.lambda ||
          (cand.config.lambda == best.config.lambda &&
           kernel_rank(cand.config.kernel.kind) < kernel_rank(best.config.kernel.kind)))
        out.best_index = c;
    }
  }
  out.best = out.table[out.best_index].config;
  return out;
}

OrdinalDataset to_no_interval(const OrdinalDataset& data) {
  std::vector<int> keep;
  for (std::size_t i = 0; i < data.size(); ++i)
    if (data.labels[i].is_precise()) keep.push_back(static_cast<int>(i));
  if (keep.empty()) throw ValidationError("dataset has no precisely labeled sample");
  return data.subset(keep);
}

OrdinalDataset to_mid_interval(const OrdinalDataset& data, std::uint64_t seed) {
  OrdinalDataset out = data;
  for (std::size_t i = 0; i < out.labels.size(); ++i) {
    auto& label = out.labels[i];
    if (label.is_precise()) continue;
    int mid = (label.lo + label.hi) / 2;
    if (label.width() % 2 == 0) {
      auto rng = make_rng(seed, Stream::tiebreak, i);
      mid += static_cast<int>(uniform_below(rng, 2));
    }
    label = LabelInterval::precise(mid);
  }
  return out;
}

}  // namespace hol
