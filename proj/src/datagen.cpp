#include "salref/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace salref {

namespace {

void add_blob(SaliencyMap& map, double cy, double cx, double sigma, double amplitude) {
  const int h = map.extent(0), w = map.extent(1);
  const double inv = 1.0 / (2.0 * sigma * sigma);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double d2 = (y - cy) * (y - cy) + (x - cx) * (x - cx);
      map.at(y, x) += static_cast<float>(amplitude * std::exp(-d2 * inv));
    }
}

void normalize_max(SaliencyMap& map) {
  const float m = map.max_value();
  if (m > 0.0f)
    for (auto& v : map.values()) v /= m;
}

}  // namespace

SaliencyMap gen_true_saliency(const DomainSpec& spec, Rng& rng) {
  const int h = spec.height, w = spec.width;
  SaliencyMap map({h, w}, 0.0f);

  // The generators keep true saliency compact: small enough that the
  // per-image fixation budget packs the salient support at roughly the blur
  // radius, which keeps the blurred ground truth high across the support.
  // Feature activations concentrate on the same support, so the loss
  // residuals that carry gradient weight sit where the ground truth is
  // high, and the per-channel gradient signs encode "raise the salient
  // pixels". Sprawling saliency spreads the fixations thin, the ground
  // truth dips low between them, and the dominant residual over the
  // high-activation area turns uniformly positive: every head channel then
  // gets the same sign and training subtracts an activation-shaped pattern
  // from the logits, which reads as anti-saliency.
  if (spec.kind == DomainKind::natural_like) {
    // One center-biased cluster of overlapping blobs rather than scattered
    // singletons: the union forms a flat-topped region, fixations sample it
    // out to its edge, and the blurred ground truth stays high across the
    // whole feature support instead of just at isolated peaks.
    const int n_blobs = rng.range_int(spec.min_blobs, spec.max_blobs);
    const double cy0 = std::clamp(h / 2.0 + rng.gaussian(0.0, h / 8.0), 6.0, h - 7.0);
    const double cx0 = std::clamp(w / 2.0 + rng.gaussian(0.0, w / 8.0), 6.0, w - 7.0);
    for (int b = 0; b < n_blobs; ++b) {
      const double cy = std::clamp(cy0 + rng.gaussian(0.0, 2.0), 3.0, h - 4.0);
      const double cx = std::clamp(cx0 + rng.gaussian(0.0, 2.0), 3.0, w - 4.0);
      const double sigma = rng.uniform(spec.blob_scale_min, spec.blob_scale_max);
      add_blob(map, cy, cx, sigma, rng.uniform(0.7, 1.0));
    }
  } else {
    // F-pattern: a thick top band, a left column, one or two small blobs in
    // the content area. Inset from the border by a small margin; a 3x3 conv
    // stack loses context in the outermost rows, and saliency pinned right
    // at the edge would be systematically underserved by any such model.
    const int inset = 2;
    const int band_rows = 3;
    const double band_amp = rng.uniform(0.8, 1.0);
    for (int y = inset; y < inset + band_rows && y < h; ++y)
      for (int x = inset; x < w - inset; ++x)
        map.at(y, x) += static_cast<float>(band_amp);
    const int col_cols = 2;
    const double col_amp = rng.uniform(0.6, 0.9);
    for (int y = inset + band_rows; y < h - inset; ++y)
      for (int x = inset; x < inset + col_cols && x < w; ++x)
        map.at(y, x) += static_cast<float>(col_amp);
    const int n_blobs = rng.range_int(1, 2);
    for (int b = 0; b < n_blobs; ++b) {
      const double cy = rng.uniform(inset + band_rows + 3.0, h - inset - 2.0);
      const double cx = rng.uniform(inset + col_cols + 3.0, w - inset - 2.0);
      const double sigma = rng.uniform(spec.blob_scale_min, spec.blob_scale_max);
      add_blob(map, cy, cx, sigma, rng.uniform(0.5, 0.8));
    }
  }
  normalize_max(map);
  return map;
}

FixationMap render_fixations(const SaliencyMap& true_sal, int n_fix, Rng& rng) {
  if (n_fix <= 0) throw std::invalid_argument("render_fixations: n_fix must be positive");
  std::vector<double> mass(true_sal.values().begin(), true_sal.values().end());
  double total = 0.0;
  for (double m : mass) total += m;
  if (total <= 0.0) throw std::invalid_argument("render_fixations: saliency map has zero mass");

  FixationMap fix(true_sal.extent(0), true_sal.extent(1));
  for (int k = 0; k < n_fix && total > 0.0; ++k) {
    double u = rng.uniform() * total;
    std::size_t pick = mass.size() - 1;
    for (std::size_t i = 0; i < mass.size(); ++i) {
      u -= mass[i];
      if (u < 0.0) {
        pick = i;
        break;
      }
    }
    // rounding can land on an already-taken cell; fall back to the heaviest
    if (mass[pick] <= 0.0)
      pick = static_cast<std::size_t>(std::max_element(mass.begin(), mass.end()) - mass.begin());
    if (mass[pick] <= 0.0) break;
    fix.values[pick] = 1;
    total -= mass[pick];
    mass[pick] = 0.0;
  }
  return fix;
}

SaliencyMap blur_to_gt(const FixationMap& fix, double sigma) {
  if (sigma <= 0.0) throw std::invalid_argument("blur_to_gt: sigma must be positive");
  const int h = fix.height, w = fix.width;
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
  for (int i = -radius; i <= radius; ++i)
    kernel[static_cast<std::size_t>(i + radius)] = std::exp(-(i * i) / (2.0 * sigma * sigma));

  // separable blur, zero padding
  std::vector<double> tmp(static_cast<std::size_t>(h) * w, 0.0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) {
        const int xi = x + i;
        if (xi >= 0 && xi < w && fix.at(y, xi))
          acc += kernel[static_cast<std::size_t>(i + radius)];
      }
      tmp[static_cast<std::size_t>(y) * w + x] = acc;
    }
  SaliencyMap out({h, w}, 0.0f);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) {
        const int yi = y + i;
        if (yi >= 0 && yi < h)
          acc += kernel[static_cast<std::size_t>(i + radius)] * tmp[static_cast<std::size_t>(yi) * w + x];
      }
      out.at(y, x) = static_cast<float>(acc);
    }
  normalize_max(out);
  return out;
}

std::vector<float> mixing_coefficients(const DomainSpec& spec) {
  Rng rng(spec.mixing_seed, "mixing");
  std::vector<float> m(static_cast<std::size_t>(spec.channels));
  // Keeps salient-region logits of a freshly initialized model inside the
  // responsive part of the sigmoid: much larger coefficients saturate the
  // output over salient pixels and the zero sigmoid slope there freezes
  // exactly the locations training has to move.
  for (auto& v : m) v = static_cast<float>(rng.uniform(spec.mixing_min, spec.mixing_max));
  return m;
}

Grid gen_features(const SaliencyMap& true_sal, const DomainSpec& spec, Rng& rng) {
  const int h = spec.height, w = spec.width;
  const std::vector<float> mix = mixing_coefficients(spec);
  Grid features({spec.channels, h, w});
  for (int c = 0; c < spec.channels; ++c) {
    float* dst = features.data() + static_cast<std::size_t>(c) * h * w;
    const float coeff = mix[static_cast<std::size_t>(c)];
    for (std::size_t i = 0; i < static_cast<std::size_t>(h) * w; ++i)
      dst[i] = coeff * true_sal[i] + static_cast<float>(rng.gaussian(0.0, spec.noise_level));
  }
  return features;
}

Dataset generate_dataset(const DomainSpec& spec, int count, uint64_t seed, DomainTag tag) {
  if (count <= 0) throw std::invalid_argument("generate_dataset: count must be positive");
  Rng rng(seed, "datagen");
  Dataset d;
  d.domain_tag = tag;
  d.samples.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    Sample s;
    const SaliencyMap true_sal = gen_true_saliency(spec, rng);
    s.fixations = render_fixations(true_sal, spec.fixations_per_image, rng);
    s.gt_saliency = blur_to_gt(s.fixations, spec.blur_sigma);
    s.features = gen_features(true_sal, spec, rng);
    d.samples.push_back(std::move(s));
  }
  return d;
}

}  // namespace salref
