#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "salref/grid.hpp"
#include "salref/rng.hpp"

namespace salref {

enum class Activation : uint8_t { relu = 0, sigmoid = 1 };

// One conv2d layer, stride 1, zero same-padding (H x W preserved).
struct LayerSpec {
  int kernel = 3;
  int in_channels = 1;
  int out_channels = 1;
  Activation activation = Activation::relu;

  std::size_t weight_count() const {
    return static_cast<std::size_t>(out_channels) * in_channels * kernel * kernel;
  }
  std::size_t param_count() const { return weight_count() + out_channels; }

  bool operator==(const LayerSpec&) const = default;
};

// Flat gradient over a contiguous slice of parameters (body or head).
using GradientVector = std::vector<float>;

// Layered parameter set with an explicit body/head split. Layers with index
// < head_boundary form the body, the rest the head. head_boundary == 0 means
// the whole model is head; head_boundary == layers.size() means an empty head.
//
// Flatten order (used by gradients, Adam and the checkpoint format):
// layers in ascending order; within a layer, weights first in
// (out_channel, in_channel, ky, kx) row-major order, then biases by
// out_channel.
struct ModelState {
  std::vector<LayerSpec> layers;
  std::vector<Grid> weights;  // per layer, shape {out_ch, in_ch, k*k}
  std::vector<Grid> biases;   // per layer, shape {out_ch}
  int head_boundary = 0;

  std::size_t param_count() const;
  std::size_t body_param_count() const;
  std::size_t head_param_count() const;

  // Byte offset pairs (first param index, count) per layer in flatten order.
  std::vector<std::pair<std::size_t, std::size_t>> param_layout() const;

  std::vector<float> flatten_params() const;
  void load_params(const std::vector<float>& flat);

  bool same_architecture(const ModelState& other) const;
};

// Default desk-scale architecture standing in for a full saliency net:
// conv3x3(C->hidden)+relu, conv3x3(hidden->hidden)+relu as body,
// conv1x1(hidden->1)+sigmoid as head. head_layers counts downstream layers
// assigned to the head (0 = empty head, up to the full layer count).
std::vector<LayerSpec> default_architecture(int in_channels, int hidden_channels = 16);

// Weights uniform in +-sqrt(1/fan_in) from the given stream, biases zero.
ModelState make_model(std::vector<LayerSpec> layers, int head_layers, Rng& init_rng);

// Per-layer activations cached by forward for the matching backward call.
struct ForwardCache {
  Grid input;
  std::vector<Grid> pre_act;   // conv output before activation, per layer
  std::vector<Grid> post_act;  // after activation, per layer
  bool valid = false;
};

// Runs the model on a C x H x W input and returns the H x W prediction map.
// The final sigmoid keeps outputs in [0, 1]. Pure function of (model, input).
SaliencyMap forward(const ModelState& model, const Grid& input, ForwardCache* cache = nullptr);

// Exact gradients of the scalar loss whose map-gradient is output_grad,
// partitioned at head_boundary. Requires the cache produced by forward.
std::pair<GradientVector, GradientVector> backward(const ModelState& model,
                                                   const ForwardCache& cache,
                                                   const Grid& output_grad);

// Concatenates body and head slices back into a full-model gradient in
// flatten order; inverse of the split performed by backward.
std::vector<float> assemble_gradient(const ModelState& model, const GradientVector& body,
                                     const GradientVector& head);

}  // namespace salref
