#include "salref/adam.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace salref {

AdamState make_adam_state(std::size_t param_count) {
  AdamState s;
  s.first_moment.assign(param_count, 0.0f);
  s.second_moment.assign(param_count, 0.0f);
  return s;
}

void adam_step(ModelState& model, const std::vector<float>& grad, AdamState& state, double lr,
               double weight_decay) {
  const std::size_t n = model.param_count();
  if (grad.size() != n)
    throw std::invalid_argument("adam_step: gradient length does not match model");
  if (state.first_moment.size() != n)
    throw std::invalid_argument("adam_step: optimizer state sized for a different model");
  if (lr <= 0.0) throw std::invalid_argument("adam_step: lr must be positive");

  const auto layout = model.param_layout();
  for (std::size_t li = 0; li < layout.size(); ++li) {
    for (std::size_t i = layout[li].first; i < layout[li].first + layout[li].second; ++i) {
      if (!std::isfinite(grad[i]))
        throw std::runtime_error("adam_step: non-finite gradient in layer " + std::to_string(li));
    }
  }

  state.step_count += 1;
  const float b1 = state.beta1, b2 = state.beta2;
  const float bc1 = 1.0f - std::pow(b1, static_cast<float>(state.step_count));
  const float bc2 = 1.0f - std::pow(b2, static_cast<float>(state.step_count));
  const float step = static_cast<float>(lr);
  const float wd = static_cast<float>(weight_decay);

  std::vector<float> params = model.flatten_params();
  for (std::size_t i = 0; i < n; ++i) {
    const float g = grad[i] + wd * params[i];
    float& m = state.first_moment[i];
    float& v = state.second_moment[i];
    m = b1 * m + (1.0f - b1) * g;
    v = b2 * v + (1.0f - b2) * g * g;
    const float m_hat = m / bc1;
    const float v_hat = v / bc2;
    params[i] -= step * m_hat / (std::sqrt(v_hat) + state.eps_num);
  }
  model.load_params(params);
}

double lr_schedule(double base_lr, int epoch) {
  if (epoch < 0) throw std::invalid_argument("lr_schedule: epoch must be non-negative");
  return base_lr * std::pow(0.2, epoch / 3);
}

}  // namespace salref
