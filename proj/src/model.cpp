#include "salref/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace salref {

namespace {

void apply_activation(Activation act, Grid& g) {
  float* p = g.data();
  const std::size_t n = g.size();
  if (act == Activation::relu) {
    for (std::size_t i = 0; i < n; ++i) p[i] = p[i] > 0.0f ? p[i] : 0.0f;
  } else {
    for (std::size_t i = 0; i < n; ++i) p[i] = 1.0f / (1.0f + std::exp(-p[i]));
  }
}

// out[oc] += w * shifted in[ic], the shared kernel of conv forward/backward.
// Accumulates in double so long fan-in sums do not drift; values are stored
// back as f32 only once per layer.
inline void accumulate_shifted(const float* in_row0, double* out_row0, int h, int w, int dy,
                               int dx, double coeff) {
  const int y_lo = std::max(0, -dy);
  const int y_hi = std::min(h, h - dy);
  const int x_lo = std::max(0, -dx);
  const int x_hi = std::min(w, w - dx);
  for (int y = y_lo; y < y_hi; ++y) {
    const float* in_row = in_row0 + static_cast<std::size_t>(y + dy) * w + dx;
    double* out_row = out_row0 + static_cast<std::size_t>(y) * w;
    for (int x = x_lo; x < x_hi; ++x) out_row[x] += coeff * in_row[x];
  }
}

Grid conv2d(const Grid& input, const LayerSpec& spec, const Grid& weight, const Grid& bias) {
  const int h = input.extent(1), w = input.extent(2);
  const int k = spec.kernel, pad = k / 2;
  Grid out({spec.out_channels, h, w});
  std::vector<double> acc(static_cast<std::size_t>(h) * w);
  for (int oc = 0; oc < spec.out_channels; ++oc) {
    std::fill(acc.begin(), acc.end(), static_cast<double>(bias[static_cast<std::size_t>(oc)]));
    for (int ic = 0; ic < spec.in_channels; ++ic) {
      const float* in_ch = input.data() + static_cast<std::size_t>(ic) * h * w;
      const float* w_oc_ic =
          weight.data() + (static_cast<std::size_t>(oc) * spec.in_channels + ic) * k * k;
      for (int ky = 0; ky < k; ++ky)
        for (int kx = 0; kx < k; ++kx)
          accumulate_shifted(in_ch, acc.data(), h, w, ky - pad, kx - pad, w_oc_ic[ky * k + kx]);
    }
    float* out_ch = out.data() + static_cast<std::size_t>(oc) * h * w;
    for (std::size_t i = 0; i < acc.size(); ++i) out_ch[i] = static_cast<float>(acc[i]);
  }
  return out;
}

}  // namespace

std::size_t ModelState::param_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.param_count();
  return n;
}

std::size_t ModelState::body_param_count() const {
  std::size_t n = 0;
  for (int i = 0; i < head_boundary; ++i) n += layers[static_cast<std::size_t>(i)].param_count();
  return n;
}

std::size_t ModelState::head_param_count() const { return param_count() - body_param_count(); }

std::vector<std::pair<std::size_t, std::size_t>> ModelState::param_layout() const {
  std::vector<std::pair<std::size_t, std::size_t>> layout;
  std::size_t offset = 0;
  for (const auto& l : layers) {
    layout.emplace_back(offset, l.param_count());
    offset += l.param_count();
  }
  return layout;
}

std::vector<float> ModelState::flatten_params() const {
  std::vector<float> flat;
  flat.reserve(param_count());
  for (std::size_t i = 0; i < layers.size(); ++i) {
    flat.insert(flat.end(), weights[i].values().begin(), weights[i].values().end());
    flat.insert(flat.end(), biases[i].values().begin(), biases[i].values().end());
  }
  return flat;
}

void ModelState::load_params(const std::vector<float>& flat) {
  if (flat.size() != param_count())
    throw std::invalid_argument("load_params: flat vector length does not match model");
  std::size_t pos = 0;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    std::copy_n(flat.begin() + pos, weights[i].size(), weights[i].values().begin());
    pos += weights[i].size();
    std::copy_n(flat.begin() + pos, biases[i].size(), biases[i].values().begin());
    pos += biases[i].size();
  }
}

bool ModelState::same_architecture(const ModelState& other) const {
  return layers == other.layers && head_boundary == other.head_boundary;
}

std::vector<LayerSpec> default_architecture(int in_channels, int hidden_channels) {
  return {
      {3, in_channels, hidden_channels, Activation::relu},
      {3, hidden_channels, hidden_channels, Activation::relu},
      {1, hidden_channels, 1, Activation::sigmoid},
  };
}

ModelState make_model(std::vector<LayerSpec> layers, int head_layers, Rng& init_rng) {
  if (layers.empty()) throw std::invalid_argument("make_model: at least one layer required");
  const int n = static_cast<int>(layers.size());
  if (head_layers < 0 || head_layers > n)
    throw std::invalid_argument("make_model: head_layers out of range");
  for (std::size_t i = 1; i < layers.size(); ++i)
    if (layers[i].in_channels != layers[i - 1].out_channels)
      throw std::invalid_argument("make_model: layer channel counts do not chain");
  if (layers.back().out_channels != 1 || layers.back().activation != Activation::sigmoid)
    throw std::invalid_argument("make_model: final layer must be 1-channel sigmoid");

  ModelState m;
  m.layers = std::move(layers);
  m.head_boundary = n - head_layers;
  for (const auto& l : m.layers) {
    const double bound = std::sqrt(1.0 / (static_cast<double>(l.in_channels) * l.kernel * l.kernel));
    Grid w({l.out_channels, l.in_channels, l.kernel * l.kernel});
    for (auto& v : w.values()) v = static_cast<float>(init_rng.uniform(-bound, bound));
    m.weights.push_back(std::move(w));
    m.biases.emplace_back(std::vector<int>{l.out_channels}, 0.0f);
  }
  return m;
}

SaliencyMap forward(const ModelState& model, const Grid& input, ForwardCache* cache) {
  if (model.layers.empty()) throw std::invalid_argument("forward: model has no layers");
  if (input.dims() != 3 || input.extent(0) != model.layers.front().in_channels)
    throw std::invalid_argument("forward: input shape does not match the first layer");

  if (cache) {
    cache->input = input;
    cache->pre_act.clear();
    cache->post_act.clear();
  }
  Grid x = input;
  for (std::size_t i = 0; i < model.layers.size(); ++i) {
    Grid pre = conv2d(x, model.layers[i], model.weights[i], model.biases[i]);
    if (cache) cache->pre_act.push_back(pre);
    apply_activation(model.layers[i].activation, pre);
    if (cache) cache->post_act.push_back(pre);
    x = std::move(pre);
  }
  if (cache) cache->valid = true;
  return Grid({x.extent(1), x.extent(2)}, x.values());
}

std::pair<GradientVector, GradientVector> backward(const ModelState& model,
                                                   const ForwardCache& cache,
                                                   const Grid& output_grad) {
  if (!cache.valid || cache.pre_act.size() != model.layers.size())
    throw std::invalid_argument("backward: missing forward cache for this model");
  const int h = cache.input.extent(1), w = cache.input.extent(2);
  if (output_grad.dims() != 2 || output_grad.extent(0) != h || output_grad.extent(1) != w)
    throw std::invalid_argument("backward: output_grad shape does not match the prediction");

  const int n_layers = static_cast<int>(model.layers.size());
  std::vector<Grid> weight_grads(model.layers.size());
  std::vector<Grid> bias_grads(model.layers.size());

  Grid dout({1, h, w}, output_grad.values());
  for (int li = n_layers - 1; li >= 0; --li) {
    const LayerSpec& spec = model.layers[static_cast<std::size_t>(li)];
    const Grid& pre = cache.pre_act[static_cast<std::size_t>(li)];
    const Grid& post = cache.post_act[static_cast<std::size_t>(li)];
    const Grid& in = li == 0 ? cache.input : cache.post_act[static_cast<std::size_t>(li - 1)];
    const int k = spec.kernel, pad = k / 2;

    // dpre = dout * act'(pre)
    Grid dpre = dout;
    if (spec.activation == Activation::relu) {
      for (std::size_t i = 0; i < dpre.size(); ++i)
        if (pre[i] <= 0.0f) dpre[i] = 0.0f;
    } else {
      for (std::size_t i = 0; i < dpre.size(); ++i) dpre[i] *= post[i] * (1.0f - post[i]);
    }

    Grid& wg = weight_grads[static_cast<std::size_t>(li)];
    wg = Grid({spec.out_channels, spec.in_channels, k * k});
    Grid& bg = bias_grads[static_cast<std::size_t>(li)];
    bg = Grid({spec.out_channels});
    std::vector<double> din(static_cast<std::size_t>(spec.in_channels) * h * w, 0.0);

    for (int oc = 0; oc < spec.out_channels; ++oc) {
      const float* dpre_ch = dpre.data() + static_cast<std::size_t>(oc) * h * w;
      double bsum = 0.0;
      for (std::size_t i = 0; i < static_cast<std::size_t>(h) * w; ++i) bsum += dpre_ch[i];
      bg[static_cast<std::size_t>(oc)] = static_cast<float>(bsum);

      for (int ic = 0; ic < spec.in_channels; ++ic) {
        const float* in_ch = in.data() + static_cast<std::size_t>(ic) * h * w;
        double* din_ch = din.data() + static_cast<std::size_t>(ic) * h * w;
        const std::size_t w_base = (static_cast<std::size_t>(oc) * spec.in_channels + ic) *
                                   static_cast<std::size_t>(k) * k;
        const float* w_oc_ic = model.weights[static_cast<std::size_t>(li)].data() + w_base;
        for (int ky = 0; ky < k; ++ky) {
          for (int kx = 0; kx < k; ++kx) {
            const int dy = ky - pad, dx = kx - pad;
            // dW[oc][ic][ky][kx] = sum over valid (y,x) of dpre[y][x] * in[y+dy][x+dx]
            const int y_lo = std::max(0, -dy), y_hi = std::min(h, h - dy);
            const int x_lo = std::max(0, -dx), x_hi = std::min(w, w - dx);
            double acc = 0.0;
            for (int y = y_lo; y < y_hi; ++y) {
              const float* in_row = in_ch + static_cast<std::size_t>(y + dy) * w + dx;
              const float* d_row = dpre_ch + static_cast<std::size_t>(y) * w;
              for (int x = x_lo; x < x_hi; ++x) acc += static_cast<double>(d_row[x]) * in_row[x];
            }
            wg[w_base + static_cast<std::size_t>(ky) * k + kx] = static_cast<float>(acc);
            // din[y+dy][x+dx] += w * dpre[y][x] == shift of dpre by (-dy, -dx)
            accumulate_shifted(dpre_ch, din_ch, h, w, -dy, -dx, w_oc_ic[ky * k + kx]);
          }
        }
      }
    }
    Grid next({spec.in_channels, h, w});
    for (std::size_t i = 0; i < din.size(); ++i) next[i] = static_cast<float>(din[i]);
    dout = std::move(next);
  }

  GradientVector body, head;
  body.reserve(model.body_param_count());
  head.reserve(model.head_param_count());
  for (int li = 0; li < n_layers; ++li) {
    GradientVector& dst = li < model.head_boundary ? body : head;
    const auto& wg = weight_grads[static_cast<std::size_t>(li)].values();
    const auto& bg = bias_grads[static_cast<std::size_t>(li)].values();
    dst.insert(dst.end(), wg.begin(), wg.end());
    dst.insert(dst.end(), bg.begin(), bg.end());
  }
  return {std::move(body), std::move(head)};
}

std::vector<float> assemble_gradient(const ModelState& model, const GradientVector& body,
                                     const GradientVector& head) {
  if (body.size() != model.body_param_count() || head.size() != model.head_param_count())
    throw std::invalid_argument("assemble_gradient: slice lengths do not match the model split");
  std::vector<float> full;
  full.reserve(model.param_count());
  full.insert(full.end(), body.begin(), body.end());
  full.insert(full.end(), head.begin(), head.end());
  return full;
}

}  // namespace salref
