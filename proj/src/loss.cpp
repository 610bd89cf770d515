#include "salref/loss.hpp"

#include <cmath>
#include <stdexcept>

namespace salref {

LossResult normalized_l1(const Grid& pred, const Grid& target) {
  if (!pred.same_shape(target))
    throw std::invalid_argument("normalized_l1: pred and target shapes differ");
  const std::size_t m = pred.size();
  const float pmax = pred.max_value();
  const float tmax = target.max_value();
  const float p_scale = pmax > 0.0f ? 1.0f / pmax : 0.0f;
  const float t_scale = tmax > 0.0f ? 1.0f / tmax : 0.0f;

  LossResult res;
  res.grad = Grid(pred.shape());
  const float g_unit = p_scale / static_cast<float>(m);
  double acc = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const float d = pred[i] * p_scale - target[i] * t_scale;
    acc += std::abs(static_cast<double>(d));
    res.grad[i] = d > 0.0f ? g_unit : (d < 0.0f ? -g_unit : 0.0f);
  }
  res.loss = acc / static_cast<double>(m);
  return res;
}

}  // namespace salref
