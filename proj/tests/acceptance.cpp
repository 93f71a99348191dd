// Acceptance suite: prints one PASS/FAIL line per criterion.
//
//   acceptance [--skip N]... [--only N]...

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "hol/cli.hpp"
#include "hol/data.hpp"
#include "hol/error.hpp"
#include "hol/eval.hpp"
#include "hol/loss.hpp"
#include "hol/manifest.hpp"
#include "hol/model.hpp"
#include "hol/rng.hpp"
#include "hol/solver.hpp"

namespace {

using namespace hol;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double normal(Rng& rng) {
  const double u1 = 1.0 - uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

int draw_int(Rng& rng, int lo, int hi) {
  return lo + static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(hi - lo + 1)));
}

LabelInterval random_interval(Rng& rng, int k) {
  int a = draw_int(rng, 1, k), b = draw_int(rng, 1, k);
  if (a > b) std::swap(a, b);
  if (uniform01(rng) < 0.4) b = a;
  return {a, b};
}

OrdinalDataset random_dataset(Rng& rng, int n, int d, int k, double interval_share) {
  OrdinalDataset data;
  data.num_classes = k;
  data.features.resize(n, d);
  for (int i = 0; i < n; ++i) {
    const int y = draw_int(rng, 1, k);
    for (int j = 0; j < d; ++j) data.features(i, j) = normal(rng);
    data.features(i, 0) += 1.2 * y;
    LabelInterval label = LabelInterval::precise(y);
    if (uniform01(rng) < interval_share) label = {std::max(1, y - draw_int(rng, 0, 1)), std::min(k, y + draw_int(rng, 0, 2))};
    data.labels.push_back(label);
  }
  return data;
}

KernelSpec random_kernel(Rng& rng, int d) {
  switch (uniform_below(rng, 3)) {
    case 0:
      return KernelSpec::linear();
    case 1:
      return KernelSpec::rbf((0.5 + 1.5 * uniform01(rng)) / d);
    default:
      return KernelSpec::polynomial(2, 1.0);
  }
}

std::string fmt(double v, int decimals = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// ---------------------------------------------------------------------------

// Direct interval loss vs binary-reduction loss, exact.
Outcome criterion_1() {
  const auto start = std::chrono::steady_clock::now();
  auto rng = make_rng(101, Stream::synthetic);
  int mismatches = 0;
  for (int c = 0; c < 10000; ++c) {
    const int k = draw_int(rng, 2, 6);
    const int n = draw_int(rng, 1, 50);
    const LossKind kind = c % 2 == 0 ? LossKind::mae : LossKind::zero_one;
    RowMatrix f(n, k - 1);
    std::vector<LabelInterval> labels;
    std::vector<ZEncoding> z;
    std::vector<WeightVector> w;
    double direct = 0.0;
    for (int i = 0; i < n; ++i) {
      // Non-decreasing rows on a coarse grid so ties and exact zeros occur.
      double v = draw_int(rng, -4, 2) * 0.5;
      for (int t = 0; t < k - 1; ++t) {
        f(i, t) = v;
        v += draw_int(rng, 0, 2) * 0.5;
      }
      const auto label = random_interval(rng, k);
      labels.push_back(label);
      z.push_back(encode_z(label, k));
      w.push_back(sample_weights(label, k, kind));
      int predicted = 1;
      for (int t = 0; t < k - 1; ++t) predicted += f(i, t) < 0.0 ? 1 : 0;
      const int distance = predicted < label.lo ? label.lo - predicted : predicted > label.hi ? predicted - label.hi : 0;
      direct += kind == LossKind::mae ? distance : (distance > 0 ? 1 : 0);
    }
    const double reduction = binary_reduction_loss(f, z, w);
    if (reduction != direct || !reduction_equivalence_check(f, labels, kind).equal) ++mismatches;
  }
  const double elapsed = seconds_since(start);
  return {mismatches == 0 && elapsed < 10.0,
          "10000 cases, " + std::to_string(mismatches) + " mismatches, " + fmt(elapsed, 2) + " s (limit 10 s)"};
}

// MAE fits shared by criteria 2 and 4.
struct MaeFit {
  OrdinalDataset data;
  HolModel model;
};

std::vector<MaeFit> mae_suite(double& elapsed) {
  const auto start = std::chrono::steady_clock::now();
  auto rng = make_rng(202, Stream::synthetic);
  std::vector<MaeFit> fits;
  for (int c = 0; c < 200; ++c) {
    const int n = draw_int(rng, 10, 60);
    const int k = draw_int(rng, 2, 5);
    const int d = draw_int(rng, 1, 4);
    MaeFit entry;
    entry.data = random_dataset(rng, n, d, k, 0.35);
    HolConfig config;
    config.loss = LossKind::mae;
    config.lambda = std::pow(10.0, -1.0 + 3.0 * uniform01(rng));
    config.kernel = random_kernel(rng, d);
    config.solver.tol = 1e-8;
    config.solver.max_passes = 50'000'000;
    entry.model = fit(entry.data, config);
    fits.push_back(std::move(entry));
  }
  elapsed = seconds_since(start);
  return fits;
}

const std::vector<MaeFit>& shared_mae_suite(double* elapsed = nullptr) {
  static double build_time = 0.0;
  static const std::vector<MaeFit> fits = mae_suite(build_time);
  if (elapsed) *elapsed = build_time;
  return fits;
}

Outcome criterion_2() {
  double elapsed = 0.0;
  const auto& fits = shared_mae_suite(&elapsed);
  int violations = 0, nonconverged = 0;
  double worst = 0.0;
  for (const auto& f : fits) {
    if (!f.model.converged) ++nonconverged;
    const auto& raw = f.model.intercepts.raw;
    for (std::size_t j = 0; j + 1 < raw.size(); ++j) {
      worst = std::max(worst, raw[j] - raw[j + 1]);
      if (raw[j] > raw[j + 1] + 1e-6) ++violations;
    }
  }
  return {violations == 0 && nonconverged == 0 && elapsed < 120.0,
          "200 fits, " + std::to_string(violations) + " violations, worst raw decrease " + fmt(worst, 10) + ", " +
              std::to_string(nonconverged) + " non-converged, " + fmt(elapsed, 1) + " s (limit 120 s)"};
}

Outcome criterion_3() {
  const auto start = std::chrono::steady_clock::now();
  auto rng = make_rng(303, Stream::synthetic);
  int failures = 0;
  double worst_gap = 0.0, worst_box = 0.0, worst_eq = 0.0, worst_kkt = 0.0;
  std::size_t max_vars = 0;
  for (int c = 0; c < 50; ++c) {
    DualProblem p;
    do {
      const int k = draw_int(rng, 2, 5);
      const int n = draw_int(rng, 5, 60);
      const int d = draw_int(rng, 1, 3);
      const auto data = random_dataset(rng, n, d, k, 0.4);
      p = assemble_dual(data, random_kernel(rng, d), std::pow(10.0, -1.0 + 2.0 * uniform01(rng)),
                        c % 2 == 0 ? LossKind::mae : LossKind::zero_one);
    } while (p.size() == 0 || p.size() > kDenseOracleMaxVariables);
    max_vars = std::max(max_vars, p.size());
    SolverOptions opts;
    opts.tol = 1e-6;
    opts.max_passes = 10'000'000;
    const auto smo = solve_smo(p, opts);
    const auto oracle = solve_dense_oracle(p);
    const double gap = std::abs(smo.objective - oracle.objective);
    worst_gap = std::max(worst_gap, gap);
    bool ok = gap <= 1e-4;
    for (const auto* s : {&smo, &oracle}) {
      const auto f = check_feasibility(p, s->alphas);
      worst_box = std::max(worst_box, f.box_violation);
      worst_eq = std::max(worst_eq, f.equality_residual);
      worst_kkt = std::max(worst_kkt, f.max_kkt_violation);
      ok = ok && f.box_violation <= 1e-9 && f.equality_residual <= 1e-9 && f.max_kkt_violation <= 1e-2;
    }
    if (!ok) ++failures;
  }
  const double elapsed = seconds_since(start);
  return {failures == 0 && elapsed < 120.0,
          "50 problems (up to " + std::to_string(max_vars) + " variables), " + std::to_string(failures) +
              " failures; max |dobj| " + fmt(worst_gap, 8) + ", box " + fmt(worst_box, 12) + ", equality " +
              fmt(worst_eq, 12) + ", KKT " + fmt(worst_kkt, 6) + ", " + fmt(elapsed, 1) + " s"};
}

// Reduction loss vs the hinge objective sum w*hinge + ||eta||^2 / (2 lambda),
// the lambda-scaled form of the primal that the dual box bound corresponds to.
Outcome criterion_4() {
  const auto& fits = shared_mae_suite();
  int violations = 0;
  double min_slack = 1e300;
  for (const auto& f : fits) {
    const auto& m = f.model;
    const RowMatrix values = m.decision_values(f.data.features);
    std::vector<ZEncoding> z;
    std::vector<WeightVector> w;
    double hinge = 0.0;
    for (std::size_t i = 0; i < f.data.size(); ++i) {
      z.push_back(encode_z(f.data.labels[i], m.num_classes));
      w.push_back(sample_weights(f.data.labels[i], m.num_classes, LossKind::mae));
      for (int k = 0; k < m.num_classes - 1; ++k) {
        const auto kk = static_cast<std::size_t>(k);
        if (w.back()[kk] == 0.0) continue;
        hinge += w.back()[kk] * std::max(0.0, 1.0 - z.back()[kk] * values(static_cast<Eigen::Index>(i), k));
      }
    }
    const Eigen::MatrixXd g = gram(m.scorer.support_rows, m.scorer.kernel);
    const Eigen::Map<const Vector> c(m.scorer.coefficients.data(), static_cast<Eigen::Index>(m.scorer.coefficients.size()));
    const double norm2 = c.dot(g * c);
    const double primal = hinge + norm2 / (2.0 * m.config.lambda);
    const double reduction = binary_reduction_loss(values, z, w);
    min_slack = std::min(min_slack, primal - reduction);
    if (reduction > primal) ++violations;
  }
  return {violations == 0, std::to_string(fits.size()) + " fitted models, " + std::to_string(violations) +
                               " violations, min(primal - B) " + fmt(min_slack, 6)};
}

// Textbook soft-margin SVM: dual with sum(a y) = 0, 0 <= a <= C, solved by SMO
// on the maximal violating pair, bias from the free multipliers.
struct TextbookSvm {
  std::vector<double> alpha;
  double bias = 0.0;
};

double textbook_kernel(const RowMatrix& x, int i, int j, const KernelSpec& spec) {
  const auto a = x.row(i), b = x.row(j);
  if (spec.kind == KernelKind::linear) return a.dot(b);
  return std::exp(-spec.gamma * (a - b).squaredNorm());
}

TextbookSvm textbook_svm(const RowMatrix& x, const std::vector<int>& y, const KernelSpec& spec, double c) {
  const int n = static_cast<int>(y.size());
  Eigen::MatrixXd k(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) k(i, j) = textbook_kernel(x, i, j, spec);
  TextbookSvm svm;
  svm.alpha.assign(static_cast<std::size_t>(n), 0.0);
  std::vector<double> grad(static_cast<std::size_t>(n), -1.0);
  auto up = [&](int t) { return (y[t] > 0 && svm.alpha[t] < c) || (y[t] < 0 && svm.alpha[t] > 0); };
  auto low = [&](int t) { return (y[t] > 0 && svm.alpha[t] > 0) || (y[t] < 0 && svm.alpha[t] < c); };
  double m = 0.0, big_m = 0.0;
  for (long iter = 0; iter < 10'000'000; ++iter) {
    int i = -1, j = -1;
    m = -1e300;
    big_m = 1e300;
    for (int t = 0; t < n; ++t) {
      const double v = -y[t] * grad[t];
      if (up(t) && v > m) m = v, i = t;
      if (low(t) && v < big_m) big_m = v, j = t;
    }
    if (i < 0 || j < 0 || m - big_m < 1e-11) break;
    const double curvature = std::max(k(i, i) + k(j, j) - 2.0 * k(i, j), 1e-12);
    double step = (m - big_m) / curvature;
    step = std::min(step, y[i] > 0 ? c - svm.alpha[i] : svm.alpha[i]);
    step = std::min(step, y[j] > 0 ? svm.alpha[j] : c - svm.alpha[j]);
    const double di = y[i] * step, dj = -y[j] * step;
    svm.alpha[i] += di;
    svm.alpha[j] += dj;
    for (int t = 0; t < n; ++t) grad[t] += y[t] * (y[i] * k(t, i) * di + y[j] * k(t, j) * dj);
  }
  double free_sum = 0.0;
  int free_count = 0;
  for (int t = 0; t < n; ++t)
    if (svm.alpha[t] > 1e-9 * c && svm.alpha[t] < c * (1 - 1e-9)) {
      free_sum += -y[t] * grad[t];
      ++free_count;
    }
  svm.bias = free_count > 0 ? free_sum / free_count : 0.5 * (m + big_m);
  return svm;
}

Outcome criterion_5() {
  auto rng = make_rng(505, Stream::synthetic);
  int disagreements = 0, datasets_failed = 0;
  for (int c = 0; c < 20; ++c) {
    const int n = draw_int(rng, 8, 40);
    OrdinalDataset data;
    data.num_classes = 2;
    data.features.resize(n, 2);
    std::vector<int> y;
    for (int i = 0; i < n; ++i) {
      data.features(i, 0) = normal(rng);
      data.features(i, 1) = normal(rng);
      const double score = data.features(i, 0) + 0.5 * data.features(i, 1) * data.features(i, 1) - 0.5 + 0.6 * normal(rng);
      const int label = score < 0 ? 1 : 2;
      data.labels.push_back(LabelInterval::precise(label));
      y.push_back(label == 1 ? 1 : -1);  // class 1 sits on the non-negative side of f_1
    }
    if (std::count(y.begin(), y.end(), 1) == 0 || std::count(y.begin(), y.end(), -1) == 0) {
      data.labels[0] = LabelInterval::precise(data.labels[0].lo == 1 ? 2 : 1);
      y[0] = -y[0];
    }
    HolConfig config;
    config.loss = LossKind::mae;
    config.lambda = std::pow(10.0, -1.0 + 2.0 * uniform01(rng));
    config.kernel = c % 2 == 0 ? KernelSpec::linear() : KernelSpec::rbf(0.7);
    config.solver.tol = 1e-10;
    config.solver.max_passes = 50'000'000;
    FitOptions raw;
    raw.standardize = false;
    const auto model = fit(data, config, raw);
    const auto hol_pred = predict(model, data.features);
    const auto svm = textbook_svm(data.features, y, config.kernel, config.lambda);
    int diff = 0;
    for (int i = 0; i < n; ++i) {
      double g = svm.bias;
      for (int t = 0; t < n; ++t) g += svm.alpha[static_cast<std::size_t>(t)] * y[t] * textbook_kernel(data.features, t, i, config.kernel);
      const int svm_pred = g >= 0.0 ? 1 : 2;
      if (svm_pred != hol_pred[static_cast<std::size_t>(i)]) ++diff;
    }
    disagreements += diff;
    if (diff > 0) ++datasets_failed;
  }
  return {disagreements == 0, "20 datasets, " + std::to_string(datasets_failed) + " with differing training labels (" +
                                  std::to_string(disagreements) + " samples)"};
}

// Repeated-run benchmarks on the shipped manifests.
Outcome criterion_6() {
  struct Target {
    std::string name;
    double lo, hi;
    bool compare_no_interval;
  };
  const std::vector<Target> targets = {{"abalone", 0.75, 0.85, false},
                                       {"auto_mpg", 0.68, 0.78, false},
                                       {"boston", 0.67, 0.77, true},
                                       {"eucalyptus", 0.60, 0.72, true}};
  const int jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  bool all = true;
  std::vector<std::string> parts;
  for (const auto& t : targets) {
    const auto wall_start = std::chrono::steady_clock::now();
    const std::clock_t cpu_start = std::clock();
    std::string line = t.name + ": ";
    bool ok = true;
    try {
      const auto manifest = load_manifest(find_manifest(t.name, HOL_TEST_MANIFEST_DIR));
      std::vector<Method> methods = {Method::hol};
      if (t.compare_no_interval) methods.push_back(Method::no_interval);
      BenchmarkOptions options;
      options.jobs = jobs;
      const auto report = run_benchmark(manifest, methods, 30, 0, options);
      const auto* hol = report.find(manifest.name, Method::hol);
      const double acc = hol->overall_acc_mean;
      ok = report.failures.empty() && hol->run_count == 30 && acc >= t.lo && acc <= t.hi;
      line += "HOL " + format_mean_std(acc, hol->overall_acc_std) + " [" + fmt(acc) + " in " + fmt(t.lo, 2) + ".." +
              fmt(t.hi, 2) + "]";
      if (t.compare_no_interval) {
        const auto* base = report.find(manifest.name, Method::no_interval);
        ok = ok && acc > base->overall_acc_mean;
        line += ", no-interval " + format_mean_std(base->overall_acc_mean, base->overall_acc_std) + " [" +
                fmt(base->overall_acc_mean) + "]";
      }
      if (!report.failures.empty()) line += ", " + std::to_string(report.failures.size()) + " failed runs";
      const double wall = seconds_since(wall_start);
      const double cpu = static_cast<double>(std::clock() - cpu_start) / CLOCKS_PER_SEC;
      const bool fast = wall < 1800.0 && cpu < 4.0 * 1800.0;
      ok = ok && fast;
      line += ", wall " + fmt(wall / 60.0, 1) + " min, cpu " + fmt(cpu / 60.0, 1) + " min (limits 30 / 120)";
    } catch (const std::exception& e) {
      ok = false;
      line += std::string("error: ") + e.what();
    }
    line += ok ? " ok" : " FAILED";
    std::cout << "  " << line << std::endl;
    parts.push_back(line);
    all = all && ok;
  }
  std::string detail;
  for (const auto& p : parts) detail += (detail.empty() ? "" : "; ") + p;
  return {all, detail};
}

// Stand-in for the clinical case study: 4 ordered classes, ~200 precise
// samples and ~145 interval samples labelled [2,4] or [3,4].
OrdinalDataset clinical_standin(std::uint64_t seed, std::vector<int>& truth) {
  auto rng = make_rng(seed, Stream::synthetic, 7);
  constexpr int d = 6;
  const int precise[4] = {55, 49, 54, 46};
  OrdinalDataset data;
  data.num_classes = 4;
  std::vector<std::vector<double>> rows;
  auto add = [&](int y, LabelInterval label) {
    std::vector<double> x(d);
    for (int j = 0; j < d; ++j) x[static_cast<std::size_t>(j)] = normal(rng);
    x[0] += 1.2 * y;
    x[1] += 0.6 * y;
    rows.push_back(x);
    data.labels.push_back(label);
    truth.push_back(y);
  };
  for (int c = 1; c <= 4; ++c)
    for (int i = 0; i < precise[c - 1]; ++i) add(c, LabelInterval::precise(c));
  for (int i = 0; i < 55; ++i) add(draw_int(rng, 2, 4), {2, 4});
  for (int i = 0; i < 90; ++i) add(draw_int(rng, 3, 4), {3, 4});
  data.features.resize(static_cast<Eigen::Index>(rows.size()), d);
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (int j = 0; j < d; ++j) data.features(static_cast<Eigen::Index>(r), j) = rows[r][static_cast<std::size_t>(j)];
  return data;
}

Outcome criterion_7() {
  const auto start = std::chrono::steady_clock::now();
  double hol_sum = 0.0, mid_sum = 0.0;
  constexpr int runs = 30;
  for (int r = 0; r < runs; ++r) {
    std::vector<int> truth;
    const auto pool = clinical_standin(static_cast<std::uint64_t>(r), truth);
    // Half of the precise samples are held out; interval samples always train.
    std::vector<int> precise_idx, train_idx, test_idx;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      if (pool.labels[i].is_precise()) precise_idx.push_back(static_cast<int>(i));
      else train_idx.push_back(static_cast<int>(i));
    }
    auto rng = make_rng(static_cast<std::uint64_t>(r), Stream::split);
    shuffle_range(precise_idx.begin(), precise_idx.end(), rng);
    const std::size_t half = precise_idx.size() / 2;
    train_idx.insert(train_idx.end(), precise_idx.begin(), precise_idx.begin() + static_cast<long>(half));
    test_idx.assign(precise_idx.begin() + static_cast<long>(half), precise_idx.end());
    std::sort(train_idx.begin(), train_idx.end());
    std::sort(test_idx.begin(), test_idx.end());
    const auto train = pool.subset(train_idx);
    const auto test = pool.subset(test_idx);
    std::vector<int> test_truth;
    for (int i : test_idx) test_truth.push_back(truth[static_cast<std::size_t>(i)]);

    HolConfig config;
    config.loss = LossKind::mae;
    config.lambda = 1.0;
    config.kernel = KernelSpec::rbf(1.0 / pool.dims());
    const auto hol_model = fit(train, config);
    const auto mid_model = fit(to_mid_interval(train, static_cast<std::uint64_t>(r)), config);
    hol_sum += compute_metrics(predict(hol_model, test.features), test_truth, 4).overall_acc;
    mid_sum += compute_metrics(predict(mid_model, test.features), test_truth, 4).overall_acc;
  }
  const double hol = hol_sum / runs, mid = mid_sum / runs;
  return {hol - mid >= 0.05, "HOL " + fmt(hol) + ", HOL/mid-interval " + fmt(mid) + ", gap " + fmt(hol - mid) +
                                 " (need >= 0.05), " + fmt(seconds_since(start), 1) + " s"};
}

// Empirical bound frequencies against the closed-form PMF.
Outcome criterion_8() {
  const auto start = std::chrono::steady_clock::now();
  constexpr int draws = 100000;
  int cells = 0, outside = 0, bad_draws = 0;
  double worst_z = 0.0;
  for (int k = 2; k <= 6; ++k)
    for (int y = 1; y <= k; ++y) {
      OrdinalDataset data;
      data.num_classes = k;
      data.features = RowMatrix::Zero(draws, 1);
      data.labels.assign(draws, LabelInterval::precise(y));
      SimulationParams params;
      params.seed = static_cast<std::uint64_t>(100 * k + y);
      const auto out = simulate_intervals(data, params);
      std::vector<double> lo_count(static_cast<std::size_t>(k + 1), 0.0), hi_count(static_cast<std::size_t>(k + 1), 0.0);
      for (const auto& l : out.labels) {
        if (!(l.lo <= y && y <= l.hi) || l.lo < 1 || l.hi > k) ++bad_draws;
        lo_count[static_cast<std::size_t>(l.lo)] += 1;
        hi_count[static_cast<std::size_t>(l.hi)] += 1;
      }
      for (auto side : {BoundSide::lower, BoundSide::upper}) {
        const auto pmf = interval_bound_pmf(y, k, side, params);
        const auto& counts = side == BoundSide::lower ? lo_count : hi_count;
        for (int c = 1; c <= k; ++c) {
          const double p = pmf.at(c);
          const double freq = counts[static_cast<std::size_t>(c)] / draws;
          const double se = std::sqrt(std::max(p * (1 - p), 1e-12) / draws);
          const double z = std::abs(freq - p) / se;
          if (p > 0.0 || freq > 0.0) {
            ++cells;
            worst_z = std::max(worst_z, z);
            if (z > 3.0) ++outside;
          }
        }
      }
    }
  const double elapsed = seconds_since(start);
  return {outside == 0 && bad_draws == 0 && elapsed < 30.0,
          std::to_string(cells) + " cells, " + std::to_string(outside) + " beyond 3 SE (max z " + fmt(worst_z, 2) + "), " +
              std::to_string(bad_draws) + " draws not containing y, " + fmt(elapsed, 2) + " s"};
}

Outcome criterion_9() {
  auto rng = make_rng(909, Stream::synthetic);
  int mismatches = 0, iff_failures = 0;
  for (int c = 0; c < 1000; ++c) {
    const int k = draw_int(rng, 2, 7);
    const int n = draw_int(rng, 1, 40);
    // Some cases are perfect predictions so both sides of the equivalence occur.
    const bool perfect = c % 10 == 0;
    std::vector<int> truth, pred;
    for (int i = 0; i < n; ++i) {
      truth.push_back(draw_int(rng, 1, k));
      pred.push_back(perfect ? truth.back() : draw_int(rng, 1, k));
    }
    std::vector<std::vector<long>> confusion(static_cast<std::size_t>(k), std::vector<long>(static_cast<std::size_t>(k), 0));
    for (int i = 0; i < n; ++i) ++confusion[static_cast<std::size_t>(truth[i] - 1)][static_cast<std::size_t>(pred[i] - 1)];
    long diag = 0, dev = 0;
    double cls = 0.0;
    int present = 0;
    for (int r = 0; r < k; ++r) {
      long row = 0;
      for (int col = 0; col < k; ++col) {
        row += confusion[static_cast<std::size_t>(r)][static_cast<std::size_t>(col)];
        dev += confusion[static_cast<std::size_t>(r)][static_cast<std::size_t>(col)] * std::abs(r - col);
      }
      diag += confusion[static_cast<std::size_t>(r)][static_cast<std::size_t>(r)];
      if (row > 0) {
        cls += static_cast<double>(confusion[static_cast<std::size_t>(r)][static_cast<std::size_t>(r)]) / static_cast<double>(row);
        ++present;
      }
    }
    const auto m = compute_metrics(pred, truth, k);
    if (m.overall_acc != static_cast<double>(diag) / n || m.mean_abs_deviation != static_cast<double>(dev) / n ||
        m.avg_class_acc != cls / present)
      ++mismatches;
    if ((m.mean_abs_deviation == 0.0) != (m.overall_acc == 1.0)) ++iff_failures;
  }
  return {mismatches == 0 && iff_failures == 0, "1000 cases, " + std::to_string(mismatches) + " mismatches, " +
                                                    std::to_string(iff_failures) + " MAD/accuracy equivalence failures"};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// Every subcommand twice with the same seed; all output files must match.
Outcome criterion_10() {
  const auto root = std::filesystem::temp_directory_path() / ("hol_acceptance_" + std::to_string(::time(nullptr)));
  std::filesystem::create_directories(root);
  const std::string manifests = HOL_TEST_MANIFEST_DIR;
  int compared = 0, differing = 0, failed_commands = 0;
  std::string first_problem;

  auto run_twice = [&](const std::string& label, const std::vector<std::string>& outputs,
                       const std::function<std::vector<std::string>(const std::filesystem::path&)>& args_for) {
    std::vector<std::string> stdout_text;
    for (const char* rep : {"a", "b"}) {
      const auto dir = root / rep;
      std::filesystem::create_directories(dir);
      std::ostringstream out, err;
      const int code = cli::run(args_for(dir), out, err);
      if (code != 0) {
        ++failed_commands;
        if (first_problem.empty()) first_problem = label + " exit " + std::to_string(code) + ": " + err.str();
      }
      stdout_text.push_back(out.str());
    }
    for (const auto& name : outputs) {
      ++compared;
      if (slurp(root / "a" / name) != slurp(root / "b" / name) || slurp(root / "a" / name).empty()) {
        ++differing;
        if (first_problem.empty()) first_problem = label + ": " + name + " differs";
      }
    }
    ++compared;
    if (stdout_text[0] != stdout_text[1]) {
      ++differing;
      if (first_problem.empty()) first_problem = label + ": stdout differs";
    }
  };

  run_twice("prepare", {"train.csv", "test.csv"}, [&](const std::filesystem::path& dir) {
    return std::vector<std::string>{"prepare", "--manifest", "boston", "--manifest-dir", manifests, "--seed", "11",
                                    "--out-train", (dir / "train.csv").string(), "--out-test", (dir / "test.csv").string()};
  });
  run_twice("simulate", {"sim.csv"}, [&](const std::filesystem::path& dir) {
    return std::vector<std::string>{"simulate", "--in", (dir / "test.csv").string(), "--out", (dir / "sim.csv").string(),
                                    "--seed", "5"};
  });
  run_twice("train", {"model.json"}, [&](const std::filesystem::path& dir) {
    return std::vector<std::string>{"train", "--data", (dir / "train.csv").string(), "--model",
                                    (dir / "model.json").string(), "--grid", "--folds", "3", "--seed", "2", "--jobs", "2"};
  });
  run_twice("predict", {"pred.csv"}, [&](const std::filesystem::path& dir) {
    return std::vector<std::string>{"predict", "--model", (dir / "model.json").string(), "--data",
                                    (dir / "test.csv").string(), "--out", (dir / "pred.csv").string(), "--scores"};
  });
  run_twice("cv", {"cv.csv"}, [&](const std::filesystem::path& dir) {
    return std::vector<std::string>{"cv", "--data", (dir / "train.csv").string(), "--grid", "--folds", "3", "--seed",
                                    "4", "--jobs", "2", "--out", (dir / "cv.csv").string()};
  });
  run_twice("benchmark", {"bench.csv", "bench.json", "bench.txt", "plot.csv"}, [&](const std::filesystem::path& dir) {
    return std::vector<std::string>{"benchmark", "--manifest", "auto_mpg", "--manifest-dir", manifests, "--runs", "2",
                                    "--folds", "3", "--seed", "8", "--jobs", "2", "--out", (dir / "bench.txt").string(),
                                    "--csv", (dir / "bench.csv").string(), "--json", (dir / "bench.json").string(),
                                    "--plot", (dir / "plot.csv").string()};
  });
  std::error_code ec;
  std::filesystem::remove_all(root, ec);
  const bool ok = differing == 0 && failed_commands == 0;
  return {ok, std::to_string(compared) + " outputs compared across 6 commands, " + std::to_string(differing) +
                  " differ, " + std::to_string(failed_commands) + " failed runs" +
                  (first_problem.empty() ? "" : " (" + first_problem + ")")};
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> skip, only;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if ((arg == "--skip" || arg == "--only") && i + 1 < argc) {
      (arg == "--skip" ? skip : only).insert(std::stoi(argv[++i]));
    } else {
      std::cerr << "usage: acceptance [--skip N]... [--only N]...\n";
      return 2;
    }
  }
  const std::vector<std::pair<std::string, Outcome (*)()>> criteria = {
      {"interval loss equals binary-reduction loss", criterion_1},
      {"MAE intercepts non-decreasing without projection", criterion_2},
      {"SMO matches dense projected-gradient oracle", criterion_3},
      {"reduction loss bounded by hinge objective", criterion_4},
      {"K=2 matches textbook soft-margin SVM", criterion_5},
      {"benchmark accuracies on the shipped datasets", criterion_6},
      {"interval labels beat mid-interval collapse on clinical stand-in", criterion_7},
      {"interval simulation matches its PMF", criterion_8},
      {"metrics match confusion-matrix oracle", criterion_9},
      {"CLI output byte-identical across repeated runs", criterion_10},
  };
  int failures = 0;
  for (std::size_t c = 0; c < criteria.size(); ++c) {
    const int id = static_cast<int>(c) + 1;
    if (skip.count(id) || (!only.empty() && !only.count(id))) continue;
    Outcome outcome;
    try {
      outcome = criteria[c].second();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    if (!outcome.pass) ++failures;
    std::cout << (outcome.pass ? "PASS" : "FAIL") << " criterion " << id << " (" << criteria[c].first
              << "): " << outcome.detail << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
