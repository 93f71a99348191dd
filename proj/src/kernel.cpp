#include "hol/kernel.hpp"

#include <cmath>
#include <sstream>

#include "hol/error.hpp"

namespace hol {

void KernelSpec::validate() const {
  switch (kind) {
    case KernelKind::linear:
      return;
    case KernelKind::rbf:
      if (!(gamma > 0.0) || !std::isfinite(gamma)) throw ValidationError("rbf gamma must be positive");
      return;
    case KernelKind::polynomial:
      if (degree < 1) throw ValidationError("polynomial degree must be at least 1");
      if (!std::isfinite(coef0)) throw ValidationError("polynomial coef0 must be finite");
      return;
  }
}

std::string KernelSpec::describe() const {
  std::ostringstream os;
  os.precision(6);
  os << to_string(kind);
  if (kind == KernelKind::rbf) os << "(gamma=" << gamma << ")";
  if (kind == KernelKind::polynomial) os << "(degree=" << degree << ",coef0=" << coef0 << ")";
  return os.str();
}

std::string to_string(KernelKind kind) {
  switch (kind) {
    case KernelKind::linear:
      return "linear";
    case KernelKind::rbf:
      return "rbf";
    case KernelKind::polynomial:
      return "polynomial";
  }
  return "unknown";
}

KernelKind kernel_kind_from_string(const std::string& name) {
  if (name == "linear") return KernelKind::linear;
  if (name == "rbf") return KernelKind::rbf;
  if (name == "polynomial" || name == "poly") return KernelKind::polynomial;
  throw ValidationError("unknown kernel '" + name + "' (expected linear, rbf or polynomial)");
}

namespace {

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

double squared_distance(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = a[i] - b[i];
    s += t * t;
  }
  return s;
}

double eval_raw(const double* a, const double* b, std::size_t n, const KernelSpec& spec) {
  switch (spec.kind) {
    case KernelKind::linear:
      return dot(a, b, n);
    case KernelKind::rbf:
      return std::exp(-spec.gamma * squared_distance(a, b, n));
    case KernelKind::polynomial:
      return std::pow(dot(a, b, n) + spec.coef0, spec.degree);
  }
  return 0.0;
}

}  // namespace

double kernel_eval(std::span<const double> a, std::span<const double> b, const KernelSpec& spec) {
  if (a.size() != b.size())
    throw ValidationError("kernel dimension mismatch: " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  return eval_raw(a.data(), b.data(), a.size(), spec);
}

Eigen::MatrixXd gram(const RowMatrix& x, const RowMatrix& y, const KernelSpec& spec) {
  spec.validate();
  if (x.cols() != y.cols())
    throw ValidationError("gram dimension mismatch: " + std::to_string(x.cols()) + " vs " + std::to_string(y.cols()));
  const auto d = static_cast<std::size_t>(x.cols());
  Eigen::MatrixXd out(x.rows(), y.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index j = 0; j < y.rows(); ++j) out(i, j) = eval_raw(x.row(i).data(), y.row(j).data(), d, spec);
  return out;
}

Eigen::MatrixXd gram(const RowMatrix& x, const KernelSpec& spec) {
  spec.validate();
  const auto d = static_cast<std::size_t>(x.cols());
  const auto n = x.rows();
  Eigen::MatrixXd out(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      const double v = eval_raw(x.row(i).data(), x.row(j).data(), d, spec);
      out(i, j) = v;
      out(j, i) = v;
    }
  }
  return out;
}

}  // namespace hol
