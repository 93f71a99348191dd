#include <algorithm>
#include <cmath>

#include "hol/data.hpp"
#include "hol/error.hpp"

namespace hol {

namespace {

constexpr double kTieTolerance = 1e-9;

// Correlation matrix with constant columns decoupled (unit diagonal, zero
// off-diagonal) so that they never look partially correlated.
Eigen::MatrixXd correlation(const RowMatrix& x) {
  const auto n = static_cast<double>(x.rows());
  const Eigen::RowVectorXd mean = x.colwise().mean();
  const Eigen::MatrixXd centered = x.rowwise() - mean;
  Eigen::MatrixXd cov = centered.transpose() * centered / n;
  const auto d = cov.rows();
  Eigen::VectorXd sd(d);
  for (Eigen::Index j = 0; j < d; ++j) sd(j) = std::sqrt(std::max(cov(j, j), 0.0));
  Eigen::MatrixXd corr = Eigen::MatrixXd::Identity(d, d);
  for (Eigen::Index a = 0; a < d; ++a)
    for (Eigen::Index b = 0; b < d; ++b)
      if (a != b && sd(a) > 0.0 && sd(b) > 0.0) corr(a, b) = cov(a, b) / (sd(a) * sd(b));
  return corr;
}

bool is_constant(const RowMatrix& x, Eigen::Index j) {
  return (x.col(j).array() == x(0, j)).all();
}

}  // namespace

std::vector<double> max_partial_correlations(const RowMatrix& features, double ridge) {
  const auto d = features.cols();
  std::vector<double> out(static_cast<std::size_t>(d), 0.0);
  if (d < 2 || features.rows() < 2) return out;
  Eigen::MatrixXd corr = correlation(features);
  corr.diagonal().array() += ridge;
  const Eigen::MatrixXd precision = corr.ldlt().solve(Eigen::MatrixXd::Identity(d, d));
  for (Eigen::Index a = 0; a < d; ++a) {
    double best = 0.0;
    for (Eigen::Index b = 0; b < d; ++b) {
      if (a == b) continue;
      const double denom = std::sqrt(precision(a, a) * precision(b, b));
      if (!(denom > 0.0)) continue;
      best = std::max(best, std::min(1.0, std::abs(precision(a, b) / denom)));
    }
    out[static_cast<std::size_t>(a)] = best;
  }
  return out;
}

std::vector<double> regression_relative_errors(const RowMatrix& features) {
  const auto n = features.rows();
  const auto d = features.cols();
  std::vector<double> out(static_cast<std::size_t>(d), 1.0);
  for (Eigen::Index j = 0; j < d; ++j) {
    if (is_constant(features, j)) {
      out[static_cast<std::size_t>(j)] = 0.0;
      continue;
    }
    Eigen::MatrixXd design(n, d);
    design.col(0).setOnes();
    for (Eigen::Index c = 0, col = 1; c < d; ++c)
      if (c != j) design.col(col++) = features.col(c);
    const Eigen::VectorXd y = features.col(j);
    const Eigen::VectorXd coef = design.colPivHouseholderQr().solve(y);
    const double residual = (y - design * coef).cwiseAbs().sum();
    const double spread = (y.array() - y.mean()).abs().sum();
    out[static_cast<std::size_t>(j)] = residual / spread;
  }
  return out;
}

ScreeningResult screen_features(const RowMatrix& features, const ScreeningOptions& options) {
  if (features.rows() == 0) throw ValidationError("cannot screen an empty feature matrix");
  if (!features.allFinite()) throw ValidationError("features contain NaN or Inf");
  ScreeningResult result;
  std::vector<int> retained(static_cast<std::size_t>(features.cols()));
  for (std::size_t j = 0; j < retained.size(); ++j) retained[j] = static_cast<int>(j);

  while (retained.size() > 1) {
    RowMatrix current(features.rows(), static_cast<Eigen::Index>(retained.size()));
    for (std::size_t c = 0; c < retained.size(); ++c)
      current.col(static_cast<Eigen::Index>(c)) = features.col(retained[c]);

    const auto pc = max_partial_correlations(current, options.ridge);
    // The regression needs more samples than parameters (slopes plus intercept).
    const bool regress = current.rows() > current.cols();
    if (!regress) result.regression_skipped = true;
    const auto rae = regress ? regression_relative_errors(current)
                             : std::vector<double>(retained.size(), 1.0);

    int pick = -1;
    for (std::size_t c = 0; c < retained.size(); ++c) {
      if (!(pc[c] > options.corr_threshold || rae[c] < options.rae_threshold)) continue;
      if (pick < 0) {
        pick = static_cast<int>(c);
        continue;
      }
      const auto p = static_cast<std::size_t>(pick);
      // Least important first: best explained by the others, then most
      // correlated; ties resolve to the later column.
      if (rae[c] < rae[p] - kTieTolerance) {
        pick = static_cast<int>(c);
      } else if (rae[c] <= rae[p] + kTieTolerance) {
        if (pc[c] >= pc[p] - kTieTolerance) pick = static_cast<int>(c);
      }
    }
    if (pick < 0) break;
    result.removed.push_back(retained[static_cast<std::size_t>(pick)]);
    retained.erase(retained.begin() + pick);
  }
  result.retained = std::move(retained);
  return result;
}

}  // namespace hol
