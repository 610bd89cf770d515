#pragma once

#include "salref/grid.hpp"

namespace salref {

struct LossResult {
  double loss = 0.0;
  Grid grad;  // d loss / d pred, same shape as pred
};

// Max-normalized l1: loss = (1/m) * sum_i |pred_i/pmax - target_i/tmax|,
// where pmax/tmax are each map's maximum. A map with max 0 is used as
// all-zeros. The normalizers are treated as constants for the gradient
// (stop-gradient on the max), so d loss / d pred_i = sign(...)/(m*pmax).
LossResult normalized_l1(const Grid& pred, const Grid& target);

}  // namespace salref
