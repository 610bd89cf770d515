#pragma once

#include <vector>

#include "salref/model.hpp"

namespace salref {

// Classical Adam with L2 weight decay folded into the gradient
// (effective gradient = grad + weight_decay * param) and bias-corrected
// moments. Moments are stored in 32-bit like the parameters.
struct AdamState {
  std::vector<float> first_moment;
  std::vector<float> second_moment;
  long step_count = 0;
  float beta1 = 0.9f;
  float beta2 = 0.999f;
  float eps_num = 1e-8f;
};

AdamState make_adam_state(std::size_t param_count);

// One update over all model parameters; grad is the full-model gradient in
// flatten order. Throws if the gradient is non-finite, naming the layer.
void adam_step(ModelState& model, const std::vector<float>& grad, AdamState& state, double lr,
               double weight_decay);

// Step decay: base_lr * 0.2^floor(epoch / 3).
double lr_schedule(double base_lr, int epoch);

}  // namespace salref
