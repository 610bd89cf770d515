#include "salref/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace salref {

namespace {
void check_shapes(const SaliencyMap& pred, const FixationMap& fix, const char* op) {
  if (pred.dims() != 2 || pred.extent(0) != fix.height || pred.extent(1) != fix.width)
    throw std::invalid_argument(std::string(op) + ": map shapes differ");
}
}  // namespace

double nss(const SaliencyMap& pred, const FixationMap& fix) {
  check_shapes(pred, fix, "nss");
  const std::size_t n = pred.size();
  const int n_fix = fix.fixation_count();
  if (n_fix == 0) throw std::invalid_argument("nss: fixation map has no fixations");

  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean += pred[i];
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = pred[i] - mean;
    var += d * d;
  }
  const double stddev = std::sqrt(var / static_cast<double>(n));
  if (stddev == 0.0) return 0.0;

  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    if (fix.values[i]) acc += (pred[i] - mean) / stddev;
  return acc / static_cast<double>(n_fix);
}

double auc_judd(const SaliencyMap& pred, const FixationMap& fix) {
  check_shapes(pred, fix, "auc_judd");
  const std::size_t n = pred.size();
  const int n_fix = fix.fixation_count();
  if (n_fix == 0) throw std::invalid_argument("auc_judd: fixation map has no fixations");
  if (static_cast<std::size_t>(n_fix) == n)
    throw std::invalid_argument("auc_judd: every pixel is fixated");

  std::vector<float> fixated, rest;
  fixated.reserve(static_cast<std::size_t>(n_fix));
  rest.reserve(n - static_cast<std::size_t>(n_fix));
  for (std::size_t i = 0; i < n; ++i) (fix.values[i] ? fixated : rest).push_back(pred[i]);
  std::sort(fixated.begin(), fixated.end());
  std::sort(rest.begin(), rest.end());

  std::vector<float> thresholds = fixated;
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

  // Descending thresholds give points in ascending (fpr, tpr) order.
  std::vector<std::pair<double, double>> points;
  points.reserve(thresholds.size() + 2);
  points.emplace_back(0.0, 0.0);
  for (auto it = thresholds.rbegin(); it != thresholds.rend(); ++it) {
    const float t = *it;
    const auto above = [t](const std::vector<float>& v) {
      return static_cast<double>(v.end() - std::lower_bound(v.begin(), v.end(), t));
    };
    points.emplace_back(above(rest) / static_cast<double>(rest.size()),
                        above(fixated) / static_cast<double>(fixated.size()));
  }
  points.emplace_back(1.0, 1.0);

  double area = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i)
    area += (points[i].first - points[i - 1].first) *
            (points[i].second + points[i - 1].second) * 0.5;
  return area;
}

double cc(const SaliencyMap& pred, const SaliencyMap& gt) {
  if (!pred.same_shape(gt)) throw std::invalid_argument("cc: map shapes differ");
  const std::size_t n = pred.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += pred[i];
    my += gt[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = pred[i] - mx, dy = gt[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx == 0.0 || syy == 0.0)
    throw std::invalid_argument("cc: correlation undefined for a constant map");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

MetricTriple evaluate_sample(const SaliencyMap& pred, const SaliencyMap& gt_saliency,
                             const FixationMap& fixations) {
  return {nss(pred, fixations), auc_judd(pred, fixations), cc(pred, gt_saliency)};
}

}  // namespace salref
