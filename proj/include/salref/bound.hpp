#pragma once

#include <cstdint>

namespace salref {

struct BoundInputs {
  uint64_t m = 1;            // map dimensionality
  double p = 1.0;            // loss exponent, >= 1
  uint64_t hypothesis_count = 1;
  double delta = 0.05;       // in (0, 2]
  uint64_t dataset_size = 1;
};

// m^(1/p) * sqrt((ln|H| + ln(2/delta)) / (2|D|)), natural logs, 64-bit.
double generalization_bound(const BoundInputs& in);

}  // namespace salref
