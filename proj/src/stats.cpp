#include "salref/stats.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace salref {

MeanStd mean_std(const std::vector<double>& values) {
  if (values.empty()) throw std::invalid_argument("mean_std: empty group");
  MeanStd out;
  for (double v : values) out.mean += v;
  out.mean /= static_cast<double>(values.size());
  if (values.size() > 1) {
    double acc = 0.0;
    for (double v : values) acc += (v - out.mean) * (v - out.mean);
    out.std = std::sqrt(acc / static_cast<double>(values.size() - 1));
  }
  return out;
}

std::string format_mean_std(double mean, double std) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4f±%.4f", mean, std);
  return buf;
}

namespace {

// Lentz continued fraction for the incomplete beta (Numerical Recipes form).
double betacf(double a, double b, double x) {
  constexpr double kFpMin = 1e-300;
  constexpr double kEps = 3e-14;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kFpMin) d = kFpMin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 400; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::abs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::abs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) return h;
  }
  throw std::runtime_error("incomplete_beta: continued fraction did not converge");
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (a <= 0.0 || b <= 0.0) throw std::invalid_argument("incomplete_beta: a, b must be positive");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double bt = std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                             a * std::log(x) + b * std::log(1.0 - x));
  if (x < (a + 1.0) / (a + b + 2.0)) return bt * betacf(a, b, x) / a;
  return 1.0 - bt * betacf(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, double nu) {
  if (nu <= 0.0) throw std::invalid_argument("student_t_two_sided_p: nu must be positive");
  return incomplete_beta(nu / 2.0, 0.5, nu / (nu + t * t));
}

double paired_t_test(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("paired_t_test: length mismatch");
  if (a.size() < 2) throw std::invalid_argument("paired_t_test: need at least 2 pairs");
  std::vector<double> diffs(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) diffs[i] = a[i] - b[i];
  const MeanStd ms = mean_std(diffs);
  if (ms.std == 0.0)
    throw std::invalid_argument("paired_t_test: zero variance of paired differences");
  const double n = static_cast<double>(diffs.size());
  const double t = ms.mean / (ms.std / std::sqrt(n));
  return student_t_two_sided_p(t, n - 1.0);
}

double permutation_test(const std::vector<double>& a, const std::vector<double>& b,
                        int iterations, Rng& rng) {
  if (a.size() != b.size()) throw std::invalid_argument("permutation_test: length mismatch");
  if (a.empty()) throw std::invalid_argument("permutation_test: empty input");
  if (iterations < 1) throw std::invalid_argument("permutation_test: iterations must be >= 1");
  std::vector<double> diffs(a.size());
  double observed = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diffs[i] = a[i] - b[i];
    observed += diffs[i];
  }
  observed = std::abs(observed / static_cast<double>(diffs.size()));

  int hits = 0;
  for (int it = 0; it < iterations; ++it) {
    double s = 0.0;
    for (double d : diffs) s += (rng.next_u64() & 1) ? d : -d;
    if (std::abs(s / static_cast<double>(diffs.size())) >= observed) ++hits;
  }
  return static_cast<double>(1 + hits) / static_cast<double>(iterations + 1);
}

}  // namespace salref
