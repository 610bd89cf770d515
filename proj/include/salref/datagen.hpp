#pragma once

#include <cstdint>
#include <vector>

#include "salref/dataset.hpp"
#include "salref/rng.hpp"

namespace salref {

enum class DomainKind : uint8_t { natural_like = 0, webpage_like = 1 };

// Generative description of one synthetic domain. natural_like produces
// center-biased Gaussian-blob saliency (photo stand-in); webpage_like
// produces an F-pattern of a top band, a left column and a couple of blobs
// (webpage stand-in). Feature channels are saliency mixed by per-domain
// coefficients plus Gaussian noise; the coefficients come from mixing_seed
// and differ between domains, which is what makes the transfer nontrivial.
struct DomainSpec {
  DomainKind kind = DomainKind::natural_like;
  int height = 32;
  int width = 32;
  int channels = 3;
  int min_blobs = 2;
  int max_blobs = 5;
  double blob_scale_min = 1.0;
  double blob_scale_max = 1.4;
  uint64_t mixing_seed = 1;
  double mixing_min = 8.0;
  double mixing_max = 16.0;
  int fixations_per_image = 20;
  double blur_sigma = 1.5;
  double noise_level = 0.05;
};

SaliencyMap gen_true_saliency(const DomainSpec& spec, Rng& rng);

// n_fix pixels sampled without replacement, probability proportional to
// saliency mass. Throws if the map has zero total mass.
FixationMap render_fixations(const SaliencyMap& true_sal, int n_fix, Rng& rng);

// Gaussian blur with truncation radius ceil(3*sigma), renormalized to max 1.
SaliencyMap blur_to_gt(const FixationMap& fix, double sigma);

// Per-domain mixing coefficients, one per channel, drawn from mixing_seed.
std::vector<float> mixing_coefficients(const DomainSpec& spec);

Grid gen_features(const SaliencyMap& true_sal, const DomainSpec& spec, Rng& rng);

// Full dataset; a pure function of (spec, count, seed).
Dataset generate_dataset(const DomainSpec& spec, int count, uint64_t seed, DomainTag tag);

}  // namespace salref
