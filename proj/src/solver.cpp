#include "hol/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "hol/error.hpp"

namespace hol {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTau = 1e-12;

// v_u = z_u - h(x_{i_u}); the intercept that would put variable u exactly on
// its margin.
double margin_target(const DualVariable& var, const Vector& scores) {
  return var.z - scores(var.sample);
}

bool in_up(const DualVariable& var, double alpha, double lambda) {
  return var.z > 0 ? alpha < lambda : alpha > 0.0;
}

bool in_low(const DualVariable& var, double alpha, double lambda) {
  return var.z > 0 ? alpha > 0.0 : alpha < lambda;
}

struct BlockBounds {
  double up = -kInf;   // m_k: max v over I_up, a lower bound on b_k
  double low = kInf;   // M_k: min v over I_low, an upper bound on b_k
  int up_index = -1;

  double violation() const {
    if (up_index < 0 || !std::isfinite(low)) return 0.0;
    return std::max(0.0, up - low);
  }
};

BlockBounds block_bounds(const DualProblem& problem, const std::vector<int>& block, std::span<const double> alphas,
                         const Vector& scores) {
  BlockBounds b;
  for (int u : block) {
    const auto& var = problem.variables[static_cast<std::size_t>(u)];
    const double a = alphas[static_cast<std::size_t>(u)];
    const double v = margin_target(var, scores);
    if (in_up(var, a, problem.lambda) && v > b.up) {
      b.up = v;
      b.up_index = u;
    }
    if (in_low(var, a, problem.lambda)) b.low = std::min(b.low, v);
  }
  return b;
}

void validate_problem(const DualProblem& problem) {
  if (!(problem.lambda >= 0.0) || !std::isfinite(problem.lambda)) throw ValidationError("lambda must be finite and >= 0");
  if (problem.gram.rows() != problem.gram.cols()) throw ValidationError("gram matrix must be square");
  for (const auto& var : problem.variables) {
    if (var.z != 1 && var.z != -1) throw ValidationError("dual variable z must be +1 or -1");
    if (var.sample < 0 || var.sample >= problem.num_samples()) throw ValidationError("dual variable sample out of range");
  }
}

}  // namespace

std::vector<int> DualProblem::empty_blocks() const {
  std::vector<int> out;
  for (std::size_t k = 0; k < blocks.size(); ++k)
    if (blocks[k].empty()) out.push_back(static_cast<int>(k));
  return out;
}

DualProblem assemble_dual(const OrdinalDataset& data, Eigen::MatrixXd gram, double lambda, LossKind loss) {
  data.validate();
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ValidationError("lambda must be positive");
  if (gram.rows() != static_cast<Eigen::Index>(data.size()) || gram.cols() != gram.rows())
    throw ValidationError("gram matrix must be n x n for the training set");
  DualProblem problem;
  problem.gram = std::move(gram);
  problem.lambda = lambda;
  problem.loss = loss;
  problem.num_classes = data.num_classes;
  problem.blocks.resize(static_cast<std::size_t>(data.num_classes - 1));
  std::vector<ZEncoding> z;
  std::vector<WeightVector> w;
  for (const auto& label : data.labels) {
    z.push_back(encode_z(label, data.num_classes));
    w.push_back(sample_weights(label, data.num_classes, loss));
  }
  for (int k = 0; k < data.num_classes - 1; ++k) {
    for (std::size_t i = 0; i < data.size(); ++i) {
      const auto kk = static_cast<std::size_t>(k);
      if (w[i][kk] == 0.0) continue;
      problem.blocks[kk].push_back(static_cast<int>(problem.variables.size()));
      problem.variables.push_back({k, static_cast<int>(i), z[i][kk]});
    }
  }
  return problem;
}

DualProblem assemble_dual(const OrdinalDataset& data, const KernelSpec& kernel, double lambda, LossKind loss) {
  return assemble_dual(data, gram(data.features, kernel), lambda, loss);
}

Vector shared_scores(const DualProblem& problem, std::span<const double> alphas) {
  Vector coef = Vector::Zero(problem.num_samples());
  for (std::size_t u = 0; u < problem.variables.size(); ++u)
    coef(problem.variables[u].sample) += alphas[u] * problem.variables[u].z;
  return problem.gram * coef;
}

double dual_objective(const DualProblem& problem, std::span<const double> alphas) {
  if (alphas.size() != problem.size()) throw ValidationError("alpha count does not match the problem");
  const Vector scores = shared_scores(problem, alphas);
  double quad = 0.0;
  double linear = 0.0;
  for (std::size_t u = 0; u < problem.variables.size(); ++u) {
    quad += alphas[u] * problem.variables[u].z * scores(problem.variables[u].sample);
    linear += alphas[u];
  }
  return 0.5 * quad - linear;
}

Feasibility check_feasibility(const DualProblem& problem, std::span<const double> alphas) {
  Feasibility f;
  for (double a : alphas) f.box_violation = std::max({f.box_violation, -a, a - problem.lambda});
  const Vector scores = shared_scores(problem, alphas);
  for (const auto& block : problem.blocks) {
    double sum = 0.0;
    for (int u : block) sum += alphas[static_cast<std::size_t>(u)] * problem.variables[static_cast<std::size_t>(u)].z;
    f.equality_residual = std::max(f.equality_residual, std::abs(sum));
    f.max_kkt_violation = std::max(f.max_kkt_violation, block_bounds(problem, block, alphas, scores).violation());
  }
  return f;
}

DualSolution solve_smo(const DualProblem& problem, const SolverOptions& options) {
  validate_problem(problem);
  if (!(options.tol > 0.0)) throw ValidationError("solver tolerance must be positive");
  const std::size_t count = problem.size();
  const long cap = options.max_passes > 0 ? options.max_passes : 10 * static_cast<long>(std::max<std::size_t>(count, 1));
  const double lambda = problem.lambda;
  const auto& g = problem.gram;

  DualSolution sol;
  sol.alphas.assign(count, 0.0);
  Vector scores = Vector::Zero(problem.num_samples());
  auto& alpha = sol.alphas;

  while (true) {
    // Most violating block.
    int best_block = -1;
    BlockBounds best;
    double worst = 0.0;
    for (std::size_t k = 0; k < problem.blocks.size(); ++k) {
      const auto b = block_bounds(problem, problem.blocks[k], alpha, scores);
      if (b.violation() > worst) {
        worst = b.violation();
        best = b;
        best_block = static_cast<int>(k);
      }
    }
    sol.max_violation = worst;
    if (best_block < 0 || worst < options.tol) {
      sol.converged = true;
      break;
    }
    if (sol.iterations >= cap) break;

    // Second-order choice of the partner inside the same block.
    const int i = best.up_index;
    const auto& vi = problem.variables[static_cast<std::size_t>(i)];
    const double target_i = margin_target(vi, scores);
    int j = -1;
    double j_gain = 0.0;
    double j_curv = 1.0;
    for (int t : problem.blocks[static_cast<std::size_t>(best_block)]) {
      const auto& vt = problem.variables[static_cast<std::size_t>(t)];
      if (!in_low(vt, alpha[static_cast<std::size_t>(t)], lambda)) continue;
      const double diff = target_i - margin_target(vt, scores);
      if (diff <= 0.0) continue;
      double curv = g(vi.sample, vi.sample) + g(vt.sample, vt.sample) - 2.0 * g(vi.sample, vt.sample);
      if (curv <= 0.0) curv = kTau;
      const double gain = diff * diff / curv;
      if (j < 0 || gain > j_gain) {
        j = t;
        j_gain = gain;
        j_curv = curv;
      }
    }
    if (j < 0) throw SolverError("no partner found for a violating pair");

    const auto& vj = problem.variables[static_cast<std::size_t>(j)];
    auto& ai = alpha[static_cast<std::size_t>(i)];
    auto& aj = alpha[static_cast<std::size_t>(j)];
    const double room_i = vi.z > 0 ? lambda - ai : ai;
    const double room_j = vj.z > 0 ? aj : lambda - aj;
    const double step = (target_i - margin_target(vj, scores)) / j_curv;
    const double delta = std::min({step, room_i, room_j});

    ai += vi.z * delta;
    aj -= vj.z * delta;
    if (delta == room_i) ai = vi.z > 0 ? lambda : 0.0;
    if (delta == room_j) aj = vj.z > 0 ? 0.0 : lambda;
    ai = std::clamp(ai, 0.0, lambda);
    aj = std::clamp(aj, 0.0, lambda);

    scores += delta * (g.col(vi.sample) - g.col(vj.sample));
    ++sol.iterations;
  }

  sol.objective = dual_objective(problem, alpha);
  sol.max_violation = check_feasibility(problem, alpha).max_kkt_violation;
  return sol;
}

namespace {

// Euclidean projection of v onto {0 <= a <= lambda, sum a_u z_u = 0} for one
// block: a_u = clip(v_u - mu z_u), with mu found by bisection on the monotone
// residual.
void project_block(const DualProblem& problem, const std::vector<int>& block, const Vector& v, Vector& out) {
  const double lambda = problem.lambda;
  auto residual = [&](double mu) {
    double r = 0.0;
    for (int u : block) {
      const int z = problem.variables[static_cast<std::size_t>(u)].z;
      r += z * std::clamp(v(u) - mu * z, 0.0, lambda);
    }
    return r;
  };
  double span = lambda + 1.0;
  for (int u : block) span = std::max(span, std::abs(v(u)) + lambda + 1.0);
  double lo = -span;
  double hi = span;
  for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (residual(mid) > 0.0) lo = mid;
    else hi = mid;
  }
  const double mu = std::abs(residual(lo)) < std::abs(residual(hi)) ? lo : hi;
  for (int u : block) {
    const int z = problem.variables[static_cast<std::size_t>(u)].z;
    out(u) = std::clamp(v(u) - mu * z, 0.0, lambda);
  }
}

}  // namespace

DualSolution solve_dense_oracle(const DualProblem& problem, double tol) {
  validate_problem(problem);
  const auto count = static_cast<Eigen::Index>(problem.size());
  if (problem.size() > kDenseOracleMaxVariables)
    throw ValidationError("dense oracle is limited to " + std::to_string(kDenseOracleMaxVariables) + " variables, got " +
                          std::to_string(problem.size()));
  DualSolution sol;
  sol.alphas.assign(problem.size(), 0.0);
  if (count == 0 || problem.lambda == 0.0) {
    sol.converged = true;
    return sol;
  }

  Eigen::MatrixXd q(count, count);
  for (Eigen::Index a = 0; a < count; ++a) {
    const auto& va = problem.variables[static_cast<std::size_t>(a)];
    for (Eigen::Index b = 0; b < count; ++b) {
      const auto& vb = problem.variables[static_cast<std::size_t>(b)];
      q(a, b) = va.z * vb.z * problem.gram(va.sample, vb.sample);
    }
  }
  const double lipschitz = std::max(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(q).eigenvalues().maxCoeff(), 1e-12);
  const double step = 1.0 / lipschitz;

  auto project = [&](const Vector& v) {
    Vector out = Vector::Zero(count);
    for (const auto& block : problem.blocks) project_block(problem, block, v, out);
    return out;
  };
  auto objective = [&](const Vector& a) { return 0.5 * a.dot(q * a) - a.sum(); };

  Vector x = Vector::Zero(count);
  Vector y = x;
  double t = 1.0;
  constexpr long kMaxIterations = 2'000'000;
  for (long it = 0; it < kMaxIterations; ++it) {
    const Vector grad = q * y - Vector::Ones(count);
    const Vector next = project(y - step * grad);
    // Gradient-mapping norm at y measures stationarity.
    const double mapping = (y - next).lpNorm<Eigen::Infinity>() * lipschitz;
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    if (objective(next) > objective(x)) {
      ++sol.iterations;
      // A plain 1/L step always decreases the objective, so failing to do so
      // from x itself means x is stationary up to rounding.
      if (t == 1.0) {
        sol.converged = true;
        break;
      }
      // Adaptive restart keeps the iteration monotone.
      y = x;
      t = 1.0;
      continue;
    }
    y = next + ((t - 1.0) / t_next) * (next - x);
    x = next;
    t = t_next;
    ++sol.iterations;
    if (mapping < tol) {
      sol.converged = true;
      break;
    }
  }
  sol.alphas.assign(x.data(), x.data() + count);
  sol.objective = dual_objective(problem, sol.alphas);
  sol.max_violation = check_feasibility(problem, sol.alphas).max_kkt_violation;
  return sol;
}

std::vector<double> pool_adjacent_violators(std::span<const double> values) {
  struct Pool {
    double sum;
    int count;
    double mean() const { return sum / count; }
  };
  std::vector<Pool> pools;
  for (double v : values) {
    pools.push_back({v, 1});
    while (pools.size() > 1 && pools[pools.size() - 2].mean() > pools.back().mean()) {
      pools[pools.size() - 2].sum += pools.back().sum;
      pools[pools.size() - 2].count += pools.back().count;
      pools.pop_back();
    }
  }
  std::vector<double> out;
  out.reserve(values.size());
  for (const auto& p : pools) out.insert(out.end(), static_cast<std::size_t>(p.count), p.mean());
  return out;
}

Intercepts recover_intercepts(const DualProblem& problem, const DualSolution& solution) {
  if (solution.alphas.size() != problem.size()) throw ValidationError("solution does not match the problem");
  const double lambda = problem.lambda;
  const Vector scores = shared_scores(problem, solution.alphas);
  const std::size_t blocks = problem.blocks.size();
  std::vector<std::optional<double>> raw(blocks);

  for (std::size_t k = 0; k < blocks; ++k) {
    double free_sum = 0.0;
    int free_count = 0;
    double lower = -kInf;
    double upper = kInf;
    for (int u : problem.blocks[k]) {
      const auto& var = problem.variables[static_cast<std::size_t>(u)];
      const double a = solution.alphas[static_cast<std::size_t>(u)];
      const double v = margin_target(var, scores);
      if (a > 1e-8 * lambda && a < lambda * (1.0 - 1e-8)) {
        free_sum += v;
        ++free_count;
        continue;
      }
      const bool at_zero = a <= 1e-8 * lambda;
      // Inactive with z=+1 or saturated with z=-1 bounds b from below.
      if ((at_zero && var.z > 0) || (!at_zero && var.z < 0)) lower = std::max(lower, v);
      else upper = std::min(upper, v);
    }
    if (free_count > 0) raw[k] = free_sum / free_count;
    else if (std::isfinite(lower) && std::isfinite(upper)) raw[k] = 0.5 * (lower + upper);
    else if (std::isfinite(lower)) raw[k] = lower;
    else if (std::isfinite(upper)) raw[k] = upper;
  }

  // Classifiers without variables borrow from their neighbours.
  std::vector<int> known;
  for (std::size_t k = 0; k < blocks; ++k)
    if (raw[k]) known.push_back(static_cast<int>(k));
  if (known.empty()) throw SolverError("no classifier has any training variable");
  Intercepts out;
  out.raw.resize(blocks);
  for (std::size_t k = 0; k < blocks; ++k) {
    if (raw[k]) {
      out.raw[k] = *raw[k];
      continue;
    }
    const auto next = std::upper_bound(known.begin(), known.end(), static_cast<int>(k));
    if (next == known.begin()) {
      out.raw[k] = *raw[static_cast<std::size_t>(known.front())];
    } else if (next == known.end()) {
      out.raw[k] = *raw[static_cast<std::size_t>(known.back())];
    } else {
      const int a = *(next - 1);
      const int c = *next;
      const double t = static_cast<double>(static_cast<int>(k) - a) / (c - a);
      out.raw[k] = (1.0 - t) * *raw[static_cast<std::size_t>(a)] + t * *raw[static_cast<std::size_t>(c)];
    }
  }

  for (std::size_t k = 0; k + 1 < blocks; ++k)
    out.max_raw_decrease = std::max(out.max_raw_decrease, out.raw[k] - out.raw[k + 1]);
  if (out.max_raw_decrease > 0.0) {
    out.values = pool_adjacent_violators(out.raw);
    out.projected = true;
  } else {
    out.values = out.raw;
  }
  return out;
}

double FittedScorer::shared_score(std::span<const double> x) const {
  if (static_cast<Eigen::Index>(x.size()) != support_rows.cols())
    throw ValidationError("expected " + std::to_string(support_rows.cols()) + " features, got " + std::to_string(x.size()));
  double h = 0.0;
  const auto d = static_cast<std::size_t>(support_rows.cols());
  for (std::size_t s = 0; s < coefficients.size(); ++s)
    h += coefficients[s] *
         kernel_eval(std::span<const double>(support_rows.row(static_cast<Eigen::Index>(s)).data(), d), x, kernel);
  return h;
}

double FittedScorer::decision_value(std::span<const double> x, int k) const {
  if (k < 1 || k >= num_classes()) throw ValidationError("classifier index out of range");
  return shared_score(x) + intercepts[static_cast<std::size_t>(k - 1)];
}

std::vector<double> FittedScorer::decision_values(std::span<const double> x) const {
  const double h = shared_score(x);
  std::vector<double> f(intercepts.size());
  for (std::size_t k = 0; k < f.size(); ++k) f[k] = h + intercepts[k];
  return f;
}

FittedScorer make_scorer(const RowMatrix& train_features, const KernelSpec& kernel, const DualProblem& problem,
                         const DualSolution& solution, std::vector<double> intercepts) {
  if (train_features.rows() != problem.num_samples()) throw ValidationError("training features do not match the problem");
  std::vector<double> coef(static_cast<std::size_t>(problem.num_samples()), 0.0);
  for (std::size_t u = 0; u < problem.variables.size(); ++u)
    coef[static_cast<std::size_t>(problem.variables[u].sample)] += solution.alphas[u] * problem.variables[u].z;
  FittedScorer scorer;
  scorer.kernel = kernel;
  scorer.intercepts = std::move(intercepts);
  std::vector<int> support;
  for (std::size_t i = 0; i < coef.size(); ++i)
    if (coef[i] != 0.0) support.push_back(static_cast<int>(i));
  scorer.support_rows.resize(static_cast<Eigen::Index>(support.size()), train_features.cols());
  for (std::size_t s = 0; s < support.size(); ++s) {
    scorer.support_rows.row(static_cast<Eigen::Index>(s)) = train_features.row(support[s]);
    scorer.coefficients.push_back(coef[static_cast<std::size_t>(support[s])]);
  }
  return scorer;
}

}  // namespace hol
