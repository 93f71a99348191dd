#include <cmath>

#include "hol/data.hpp"
#include "hol/error.hpp"
#include "hol/rng.hpp"

namespace hol {

void SimulationParams::validate() const {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ValidationError("sigma must be positive");
  if (!std::isfinite(window_offset) || window_offset < 0.0)
    throw ValidationError("window offset must be a nonnegative finite number");
}

double BoundPmf::at(int c) const {
  if (c < first_class || c > last_class()) return 0.0;
  return mass[static_cast<std::size_t>(c - first_class)];
}

namespace {

// P(a < N(0,1) < b) computed from the upper tails so that far-tail windows keep
// their relative precision.
double normal_window(double a, double b) {
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  if (a >= 0.0) return 0.5 * (std::erfc(a * inv_sqrt2) - std::erfc(b * inv_sqrt2));
  if (b <= 0.0) return 0.5 * (std::erfc(-b * inv_sqrt2) - std::erfc(-a * inv_sqrt2));
  return 1.0 - 0.5 * std::erfc(-a * inv_sqrt2) - 0.5 * std::erfc(b * inv_sqrt2);
}

int draw(const BoundPmf& pmf, Rng& rng) {
  const double u = uniform01(rng);
  double cumulative = 0.0;
  for (std::size_t j = 0; j < pmf.mass.size(); ++j) {
    cumulative += pmf.mass[j];
    if (u < cumulative) return pmf.first_class + static_cast<int>(j);
  }
  return pmf.last_class();
}

}  // namespace

BoundPmf interval_bound_pmf(int y, int num_classes, BoundSide side, const SimulationParams& params) {
  params.validate();
  if (num_classes < 2) throw ValidationError("K must be at least 2");
  if (y < 1 || y > num_classes)
    throw ValidationError("class " + std::to_string(y) + " outside [1, " + std::to_string(num_classes) + "]");
  BoundPmf pmf;
  const int count = side == BoundSide::upper ? num_classes - y + 1 : y;
  pmf.first_class = side == BoundSide::upper ? y : 1;
  pmf.mass.resize(static_cast<std::size_t>(count));
  double total = 0.0;
  for (int c = pmf.first_class; c <= pmf.last_class(); ++c) {
    const double distance = std::abs(c - y) + params.window_offset;
    const double m = normal_window((distance - 0.5) / params.sigma, (distance + 0.5) / params.sigma);
    pmf.mass[static_cast<std::size_t>(c - pmf.first_class)] = m;
    total += m;
  }
  if (!(total > 0.0)) {
    // Every window underflowed; all mass goes to the true class.
    std::fill(pmf.mass.begin(), pmf.mass.end(), 0.0);
    pmf.mass[static_cast<std::size_t>(y - pmf.first_class)] = 1.0;
    return pmf;
  }
  for (auto& m : pmf.mass) m /= total;
  return pmf;
}

OrdinalDataset simulate_intervals(const OrdinalDataset& data, const SimulationParams& params) {
  params.validate();
  data.validate();
  const int k = data.num_classes;
  std::vector<BoundPmf> lower, upper;
  for (int y = 1; y <= k; ++y) {
    lower.push_back(interval_bound_pmf(y, k, BoundSide::lower, params));
    upper.push_back(interval_bound_pmf(y, k, BoundSide::upper, params));
  }
  OrdinalDataset out = data;
  auto rng = make_rng(params.seed, Stream::simulate);
  for (std::size_t i = 0; i < out.labels.size(); ++i) {
    const auto& label = data.labels[i];
    if (!label.is_precise())
      throw ValidationError("sample " + std::to_string(i + 1) + " already has an interval label");
    const auto y = static_cast<std::size_t>(label.lo - 1);
    const int lo = draw(lower[y], rng);
    const int hi = draw(upper[y], rng);
    out.labels[i] = {lo, hi};
  }
  return out;
}

}  // namespace hol
