#include "salref/reference.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace salref {

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(const std::vector<double>& v) { return std::sqrt(dot(v, v)); }

std::vector<double> widen(const GradientVector& v) {
  return std::vector<double>(v.begin(), v.end());
}

void check_finite(const GradientVector& v, const char* name) {
  for (float x : v)
    if (!std::isfinite(x))
      throw std::invalid_argument(std::string("correct_gradient: non-finite ") + name);
}

// Exactly antiparallel gradients sit on a stationary point of the cosine
// where the ascent direction cancels to zero. The point is unstable: any
// sideways nudge escapes it, so use a unit direction orthogonal to g
// (picked deterministically). Returns the zero vector in one dimension,
// where no such direction exists.
std::vector<double> escape_direction(const std::vector<double>& g) {
  std::size_t k = 0;
  for (std::size_t i = 1; i < g.size(); ++i)
    if (std::abs(g[i]) < std::abs(g[k])) k = i;
  std::vector<double> d(g.size(), 0.0);
  d[k] = 1.0;
  const double proj = g[k] / dot(g, g);
  for (std::size_t i = 0; i < g.size(); ++i) d[i] -= proj * g[i];
  const double nd = norm(d);
  if (nd > 0.0)
    for (double& v : d) v /= nd;
  return d;
}

}  // namespace

double cosine(const GradientVector& a, const GradientVector& b) {
  if (a.size() != b.size()) throw std::invalid_argument("cosine: length mismatch");
  double ab = 0.0, aa = 0.0, bb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += static_cast<double>(a[i]) * b[i];
    aa += static_cast<double>(a[i]) * a[i];
    bb += static_cast<double>(b[i]) * b[i];
  }
  if (aa == 0.0 || bb == 0.0) throw std::invalid_argument("cosine: zero-norm input");
  return std::clamp(ab / (std::sqrt(aa) * std::sqrt(bb)), -1.0, 1.0);
}

double inner_objective(const std::vector<double>& g, const std::vector<double>& r,
                       double lambda) {
  const double ng = norm(g), nr = norm(r);
  if (ng == 0.0 || nr == 0.0)
    throw std::invalid_argument("inner_objective: zero-norm input");
  return dot(g, r) / (ng * nr) - lambda * dot(g, g);
}

std::vector<double> inner_objective_grad(const std::vector<double>& g,
                                         const std::vector<double>& r, double lambda) {
  if (g.size() != r.size()) throw std::invalid_argument("inner_objective_grad: length mismatch");
  const double ng = norm(g), nr = norm(r);
  if (ng == 0.0) throw std::invalid_argument("inner_objective_grad: zero-norm g");
  if (nr == 0.0) throw std::invalid_argument("inner_objective_grad: zero-norm r");
  const double cos_gr = std::clamp(dot(g, r) / (ng * nr), -1.0, 1.0);
  std::vector<double> out(g.size());
  for (std::size_t i = 0; i < g.size(); ++i)
    out[i] = r[i] / (ng * nr) - (cos_gr / (ng * ng)) * g[i] - 2.0 * lambda * g[i];
  return out;
}

CorrectionOutcome correct_gradient(const GradientVector& g_source, const GradientVector& g_ref,
                                   const CorrectionConfig& cfg) {
  if (g_source.size() != g_ref.size())
    throw std::invalid_argument("correct_gradient: length mismatch");
  check_finite(g_source, "source gradient");
  check_finite(g_ref, "reference gradient");

  CorrectionOutcome out;
  out.corrected = g_source;

  double nsrc2 = 0.0, nref2 = 0.0;
  for (float v : g_source) nsrc2 += static_cast<double>(v) * v;
  for (float v : g_ref) nref2 += static_cast<double>(v) * v;
  if (nsrc2 == 0.0 || nref2 == 0.0) return out;  // degenerate: pass through

  const double cos0 = cosine(g_source, g_ref);
  out.cos_before = cos0;
  out.cos_after = cos0;
  if (cos0 >= cfg.epsilon) return out;  // pass through bit-exact

  out.gate_triggered = true;
  const std::vector<double> r = widen(g_ref);
  std::vector<double> g = widen(g_source);
  const double base_step = cfg.inner_step_size * std::sqrt(nsrc2);
  double j_cur = inner_objective(g, r, cfg.lambda);

  std::vector<double> cand(g.size());
  for (int step = 0; step < cfg.inner_steps; ++step) {
    std::vector<double> dj = inner_objective_grad(g, r, cfg.lambda);
    if (norm(dj) == 0.0) dj = escape_direction(g);
    if (norm(dj) == 0.0) break;
    double eta = base_step;
    bool accepted = false;
    for (int halving = 0; halving <= cfg.backtracking_halvings; ++halving) {
      for (std::size_t i = 0; i < g.size(); ++i) cand[i] = g[i] + eta * dj[i];
      if (norm(cand) > 0.0) {
        const double j_cand = inner_objective(cand, r, cfg.lambda);
        if (j_cand > j_cur) {
          g = cand;
          j_cur = j_cand;
          accepted = true;
          break;
        }
      }
      eta *= 0.5;
    }
    if (!accepted) break;
    out.inner_steps_taken += 1;
  }

  for (std::size_t i = 0; i < g.size(); ++i) out.corrected[i] = static_cast<float>(g[i]);
  double n2 = 0.0;
  for (float v : out.corrected) n2 += static_cast<double>(v) * v;
  out.cos_after = n2 > 0.0 ? cosine(out.corrected, g_ref) : cos0;
  return out;
}

CorrectionOutcome referenced_update(std::vector<float>& head_params,
                                    const GradientVector& g_source, const GradientVector& g_ref,
                                    const CorrectionConfig& cfg, double lr) {
  if (head_params.size() != g_source.size())
    throw std::invalid_argument("referenced_update: parameter/gradient length mismatch");
  if (lr <= 0.0) throw std::invalid_argument("referenced_update: lr must be positive");
  CorrectionOutcome out = correct_gradient(g_source, g_ref, cfg);
  for (std::size_t i = 0; i < head_params.size(); ++i)
    head_params[i] -= static_cast<float>(lr) * out.corrected[i];
  return out;
}

}  // namespace salref
