#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hol/data.hpp"
#include "hol/kernel.hpp"
#include "hol/loss.hpp"

namespace hol {

// One dual multiplier: classifier k (0-based here, threshold k+1) on sample i.
struct DualVariable {
  int classifier = 0;
  int sample = 0;
  int z = 1;  // +1 or -1
};

// min 1/2 a' (Z C Z) a - sum(a)  s.t.  sum_{u in block k} a_u z_u = 0,  0 <= a <= lambda.
struct DualProblem {
  Eigen::MatrixXd gram;                   // n x n over training samples
  std::vector<DualVariable> variables;
  std::vector<std::vector<int>> blocks;   // K-1 lists of variable indices
  double lambda = 1.0;
  LossKind loss = LossKind::mae;
  int num_classes = 2;

  std::size_t size() const { return variables.size(); }
  int num_samples() const { return static_cast<int>(gram.rows()); }
  std::vector<int> empty_blocks() const;
};

struct DualSolution {
  std::vector<double> alphas;
  double objective = 0.0;
  long iterations = 0;
  bool converged = false;
  double max_violation = 0.0;
};

struct SolverOptions {
  double tol = 1e-3;
  long max_passes = 0;  // pair updates; 0 = 10 x variable count
};

DualProblem assemble_dual(const OrdinalDataset& data, const KernelSpec& kernel, double lambda, LossKind loss);
// Same, reusing a precomputed training Gram matrix.
DualProblem assemble_dual(const OrdinalDataset& data, Eigen::MatrixXd gram, double lambda, LossKind loss);

// Sequential minimal optimization. Pairs are always taken from one
// classifier block so every equality constraint is preserved.
DualSolution solve_smo(const DualProblem& problem, const SolverOptions& options = {});

// Accelerated projected gradient with an exact per-block projection onto
// box-and-hyperplane. Independent reference for small problems only.
inline constexpr std::size_t kDenseOracleMaxVariables = 200;
DualSolution solve_dense_oracle(const DualProblem& problem, double tol = 1e-9);

double dual_objective(const DualProblem& problem, std::span<const double> alphas);

// h(x_i) = sum_u a_u z_u k(x_{i_u}, x_i) for every training sample.
Vector shared_scores(const DualProblem& problem, std::span<const double> alphas);

struct Feasibility {
  double box_violation = 0.0;       // max distance outside [0, lambda]
  double equality_residual = 0.0;   // max |sum a z| over blocks
  double max_kkt_violation = 0.0;   // max over blocks of (m_k - M_k)^+
};

Feasibility check_feasibility(const DualProblem& problem, std::span<const double> alphas);

struct Intercepts {
  std::vector<double> raw;     // from the KKT conditions
  std::vector<double> values;  // non-decreasing; what the scorer uses
  bool projected = false;      // values differ from raw
  double max_raw_decrease = 0.0;  // max_k (b_k - b_{k+1})^+ over raw
};

Intercepts recover_intercepts(const DualProblem& problem, const DualSolution& solution);

// Isotonic (non-decreasing) least-squares fit with equal weights.
std::vector<double> pool_adjacent_violators(std::span<const double> values);

// f_k(x) = sum_i c_i k(x_i, x) + b_k, with c_i = sum_k a_{k,i} z_{k,i}.
struct FittedScorer {
  KernelSpec kernel;
  RowMatrix support_rows;
  std::vector<double> coefficients;
  std::vector<double> intercepts;  // K-1

  int num_classes() const { return static_cast<int>(intercepts.size()) + 1; }
  double shared_score(std::span<const double> x) const;
  double decision_value(std::span<const double> x, int k) const;  // k in 1..K-1
  std::vector<double> decision_values(std::span<const double> x) const;
};

FittedScorer make_scorer(const RowMatrix& train_features, const KernelSpec& kernel, const DualProblem& problem,
                         const DualSolution& solution, std::vector<double> intercepts);

}  // namespace hol
