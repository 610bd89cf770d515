#pragma once

#include <vector>

#include "salref/model.hpp"

namespace salref {

// Knobs of the gradient correction. The inner step size is relative: the
// actual ascent step is inner_step_size * |g_source|, so behaviour does not
// depend on the gradient scale.
struct CorrectionConfig {
  double epsilon = 0.0;           // gate threshold on cos(g_source, g_ref)
  double lambda = 1e-3;           // norm regularization weight, >= 0
  int inner_steps = 5;            // ascent iterations K
  double inner_step_size = 0.1;   // relative step, > 0
  int backtracking_halvings = 20; // per-step halvings before giving up
};

struct CorrectionOutcome {
  GradientVector corrected;   // g-tilde
  bool gate_triggered = false;
  double cos_before = 0.0;
  double cos_after = 0.0;
  int inner_steps_taken = 0;  // accepted ascent steps
};

// cos(a, b) = a.b / (|a| |b|), clamped to [-1, 1] against rounding.
// Throws on zero-norm input.
double cosine(const GradientVector& a, const GradientVector& b);

// Gradient of the inner objective J(g) = cos(g, r) - lambda * |g|^2:
//   r/(|g||r|) - (cos(g,r)/|g|^2) g - 2 lambda g.
std::vector<double> inner_objective_grad(const std::vector<double>& g,
                                         const std::vector<double>& r, double lambda);

double inner_objective(const std::vector<double>& g, const std::vector<double>& r, double lambda);

// The reference process. If either gradient has zero norm the source
// gradient passes through untouched. Otherwise, if cos(g_source, g_ref) >=
// epsilon the source gradient passes through bit-exact; below the threshold
// the corrected gradient is produced by gradient ascent on J starting from
// g_source, accepting only strict increases of J (with step halving).
CorrectionOutcome correct_gradient(const GradientVector& g_source, const GradientVector& g_ref,
                                   const CorrectionConfig& cfg);

// Plain parameter update with the corrected gradient: params -= lr * g_tilde.
// The training pipeline feeds g_tilde through Adam instead; this direct form
// mirrors the update rule as stated and is used by tests and bindings.
CorrectionOutcome referenced_update(std::vector<float>& head_params,
                                    const GradientVector& g_source, const GradientVector& g_ref,
                                    const CorrectionConfig& cfg, double lr);

}  // namespace salref
