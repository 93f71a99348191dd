#pragma once

#include <span>
#include <string>

#include "hol/data.hpp"

namespace hol {

enum class KernelKind { linear, rbf, polynomial };

struct KernelSpec {
  KernelKind kind = KernelKind::linear;
  double gamma = 1.0;   // rbf
  int degree = 3;       // polynomial
  double coef0 = 0.0;   // polynomial

  static KernelSpec linear() { return {}; }
  static KernelSpec rbf(double gamma) { return {KernelKind::rbf, gamma, 3, 0.0}; }
  static KernelSpec polynomial(int degree, double coef0) { return {KernelKind::polynomial, 1.0, degree, coef0}; }

  void validate() const;
  std::string describe() const;

  friend bool operator==(const KernelSpec&, const KernelSpec&) = default;
};

std::string to_string(KernelKind kind);
KernelKind kernel_kind_from_string(const std::string& name);

double kernel_eval(std::span<const double> a, std::span<const double> b, const KernelSpec& spec);

// Dense n x m Gram matrix between the rows of x and y.
Eigen::MatrixXd gram(const RowMatrix& x, const RowMatrix& y, const KernelSpec& spec);
// Symmetric Gram matrix of x with itself; entry (i,j) and (j,i) are the same evaluation.
Eigen::MatrixXd gram(const RowMatrix& x, const KernelSpec& spec);

}  // namespace hol
