#pragma once

#include "salref/grid.hpp"

namespace salref {

struct MetricTriple {
  double nss = 0.0;
  double auc = 0.0;
  double cc = 0.0;
};

// Normalized scanpath saliency: standardize pred to zero mean and unit
// population standard deviation over all pixels, then average the
// standardized values at fixated pixels. A constant map scores 0.
double nss(const SaliencyMap& pred, const FixationMap& fix);

// AUC-Judd: thresholds swept over the saliency values at fixated pixels,
// TP rate among fixated pixels, FP rate among non-fixated pixels, equal
// values counted as above threshold, trapezoidal integration with (0,0) and
// (1,1) endpoints. A constant map scores 0.5.
double auc_judd(const SaliencyMap& pred, const FixationMap& fix);

// Pearson correlation over pixels. Both maps must be non-constant.
double cc(const SaliencyMap& pred, const SaliencyMap& gt);

MetricTriple evaluate_sample(const SaliencyMap& pred, const SaliencyMap& gt_saliency,
                             const FixationMap& fixations);

}  // namespace salref
