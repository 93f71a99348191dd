#include "hol/loss.hpp"

#include <algorithm>
#include <cstdlib>

#include "hol/error.hpp"

namespace hol {

std::string to_string(LossKind kind) { return kind == LossKind::mae ? "mae" : "zero_one"; }

LossKind loss_kind_from_string(const std::string& name) {
  if (name == "mae") return LossKind::mae;
  if (name == "zero_one" || name == "zero-one" || name == "01") return LossKind::zero_one;
  throw ValidationError("unknown loss '" + name + "' (expected mae or zero_one)");
}

int predict_label(std::span<const double> f_values) {
  return 1 + static_cast<int>(std::count_if(f_values.begin(), f_values.end(), [](double f) { return f < 0.0; }));
}

ZEncoding encode_z(const LabelInterval& label, int num_classes) {
  ZEncoding z(static_cast<std::size_t>(num_classes - 1), 0);
  for (int k = 1; k < num_classes; ++k) {
    if (k >= label.hi) z[static_cast<std::size_t>(k - 1)] = 1;
    else if (k < label.lo) z[static_cast<std::size_t>(k - 1)] = -1;
  }
  return z;
}

WeightVector sample_weights(const LabelInterval& label, int num_classes, LossKind kind) {
  WeightVector w(static_cast<std::size_t>(num_classes - 1), 0.0);
  for (int k = 1; k < num_classes; ++k) {
    const bool active = kind == LossKind::mae ? (k <= label.lo - 1 || k >= label.hi)
                                              : (k == label.lo - 1 || k == label.hi);
    if (active) w[static_cast<std::size_t>(k - 1)] = 1.0;
  }
  return w;
}

double interval_loss(int predicted, const LabelInterval& label, LossKind kind) {
  if (label.contains(predicted)) return 0.0;
  if (kind == LossKind::zero_one) return 1.0;
  return predicted < label.lo ? label.lo - predicted : predicted - label.hi;
}

double general_form_loss(int predicted, const LabelInterval& label, std::span<const double> weights) {
  double loss = 0.0;
  if (predicted < label.lo) {
    for (int k = predicted; k <= label.lo - 1; ++k) loss += weights[static_cast<std::size_t>(k - 1)];
  } else if (predicted > label.hi) {
    for (int k = label.hi; k <= predicted - 1; ++k) loss += weights[static_cast<std::size_t>(k - 1)];
  }
  return loss;
}

double binary_reduction_loss(const RowMatrix& f_values, std::span<const ZEncoding> encodings,
                             std::span<const WeightVector> weights) {
  const auto n = static_cast<std::size_t>(f_values.rows());
  if (encodings.size() != n || weights.size() != n)
    throw ValidationError("reduction loss needs one encoding and one weight vector per row");
  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& z = encodings[i];
    const auto& w = weights[i];
    if (z.size() != static_cast<std::size_t>(f_values.cols()) || w.size() != z.size())
      throw ValidationError("reduction loss row " + std::to_string(i + 1) + " has mismatched lengths");
    for (std::size_t k = 0; k < z.size(); ++k) {
      // f = 0 sits on the non-negative side, as in the prediction rule.
      const bool negative = f_values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) < 0.0;
      if ((z[k] > 0 && negative) || (z[k] < 0 && !negative)) loss += w[k];
    }
  }
  return loss;
}

ReductionCheck reduction_equivalence_check(const RowMatrix& f_values, std::span<const LabelInterval> labels,
                                           LossKind kind) {
  const auto n = static_cast<std::size_t>(f_values.rows());
  if (labels.size() != n) throw ValidationError("one label per f row is required");
  const int num_classes = static_cast<int>(f_values.cols()) + 1;
  std::vector<ZEncoding> z;
  std::vector<WeightVector> w;
  ReductionCheck check;
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = f_values.row(static_cast<Eigen::Index>(i));
    for (Eigen::Index k = 1; k < row.size(); ++k)
      if (row(k) < row(k - 1))
        throw ValidationError("f row " + std::to_string(i + 1) + " is not non-decreasing");
    if (labels[i].lo < 1 || labels[i].hi > num_classes || labels[i].lo > labels[i].hi)
      throw ValidationError("label of row " + std::to_string(i + 1) + " is not a valid interval");
    const std::vector<double> f(row.data(), row.data() + row.size());
    check.direct_loss += interval_loss(predict_label(f), labels[i], kind);
    z.push_back(encode_z(labels[i], num_classes));
    w.push_back(sample_weights(labels[i], num_classes, kind));
  }
  check.reduction_loss = binary_reduction_loss(f_values, z, w);
  check.equal = check.direct_loss == check.reduction_loss;
  return check;
}

}  // namespace hol
