#include "salref/bound.hpp"

#include <cmath>
#include <stdexcept>

namespace salref {

double generalization_bound(const BoundInputs& in) {
  if (in.m == 0) throw std::invalid_argument("generalization_bound: m must be positive");
  if (in.p < 1.0) throw std::invalid_argument("generalization_bound: p must be >= 1");
  if (in.hypothesis_count == 0)
    throw std::invalid_argument("generalization_bound: hypothesis count must be positive");
  if (!(in.delta > 0.0) || in.delta > 2.0)
    throw std::invalid_argument("generalization_bound: delta must be in (0, 2]");
  if (in.dataset_size == 0)
    throw std::invalid_argument("generalization_bound: dataset size must be positive");

  const double log_h = std::log(static_cast<double>(in.hypothesis_count));
  const double log_d = std::log(2.0 / in.delta);
  return std::pow(static_cast<double>(in.m), 1.0 / in.p) *
         std::sqrt((log_h + log_d) / (2.0 * static_cast<double>(in.dataset_size)));
}

}  // namespace salref
