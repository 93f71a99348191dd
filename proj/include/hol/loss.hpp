#pragma once

#include <span>
#include <string>
#include <vector>

#include "hol/data.hpp"

namespace hol {

enum class LossKind { mae, zero_one };

std::string to_string(LossKind kind);
LossKind loss_kind_from_string(const std::string& name);

// Per-threshold signs: entry k-1 holds Z_k for k = 1..K-1.
using ZEncoding = std::vector<int>;
// Per-threshold nonnegative weights w_k, same indexing as ZEncoding.
using WeightVector = std::vector<double>;

// 1 + number of strictly negative ranking-function values.
int predict_label(std::span<const double> f_values);

ZEncoding encode_z(const LabelInterval& label, int num_classes);
WeightVector sample_weights(const LabelInterval& label, int num_classes, LossKind kind);

double interval_loss(int predicted, const LabelInterval& label, LossKind kind);
double general_form_loss(int predicted, const LabelInterval& label, std::span<const double> weights);

// Weighted count of sign disagreements over the K-1 coupled binary problems.
// f_values is n x (K-1).
double binary_reduction_loss(const RowMatrix& f_values, std::span<const ZEncoding> encodings,
                             std::span<const WeightVector> weights);

struct ReductionCheck {
  bool equal = false;
  double direct_loss = 0.0;
  double reduction_loss = 0.0;
};

// Compares the summed interval loss of the predicted labels against the
// binary-reduction loss. Every f row must be non-decreasing; otherwise throws
// ValidationError naming the row.
ReductionCheck reduction_equivalence_check(const RowMatrix& f_values, std::span<const LabelInterval> labels, LossKind kind);

}  // namespace hol
