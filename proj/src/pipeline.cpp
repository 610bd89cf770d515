#include "salref/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>

#include "salref/adam.hpp"
#include "salref/loss.hpp"

namespace salref {

namespace {

uint64_t derive_seed(uint64_t base, std::string_view tag) {
  return splitmix64(base ^ fnv1a(tag.data(), tag.size()));
}

uint64_t params_digest(const ModelState& model) {
  const std::vector<float> flat = model.flatten_params();
  return fnv1a(flat.data(), flat.size() * sizeof(float));
}

double metric_value(const MetricTriple& m, const std::string& name) {
  if (name == "nss") return m.nss;
  if (name == "auc") return m.auc;
  if (name == "cc") return m.cc;
  throw std::invalid_argument("unknown selection metric '" + name + "'");
}

struct BatchGrad {
  double loss = 0.0;
  GradientVector body;
  GradientVector head;
};

// Gradient of the mean normalized-l1 loss over the batch.
BatchGrad batch_gradient(const ModelState& model, const Dataset& data,
                         const std::vector<int>& batch) {
  BatchGrad out;
  out.body.assign(model.body_param_count(), 0.0f);
  out.head.assign(model.head_param_count(), 0.0f);
  const float scale = 1.0f / static_cast<float>(batch.size());
  ForwardCache cache;
  for (int idx : batch) {
    const Sample& s = data.samples[static_cast<std::size_t>(idx)];
    const SaliencyMap pred = forward(model, s.features, &cache);
    LossResult res = normalized_l1(pred, s.gt_saliency);
    out.loss += res.loss;
    for (float& v : res.grad.values()) v *= scale;
    const auto [body, head] = backward(model, cache, res.grad);
    for (std::size_t i = 0; i < body.size(); ++i) out.body[i] += body[i];
    for (std::size_t i = 0; i < head.size(); ++i) out.head[i] += head[i];
  }
  out.loss /= static_cast<double>(batch.size());
  return out;
}

std::string batch_to_string(const std::vector<int>& batch) {
  std::ostringstream s;
  s << "[";
  for (std::size_t i = 0; i < batch.size(); ++i) s << (i ? " " : "") << batch[i];
  s << "]";
  return s.str();
}

void progress_line(const std::string& stage, int epoch, double loss, double sel,
                   double gate_rate) {
  std::fprintf(stderr, "%s %d %.6f %.4f %.3f\n", stage.c_str(), epoch, loss, sel, gate_rate);
}

}  // namespace

std::vector<std::vector<int>> epoch_batches(int dataset_size, int batch_size, Rng& rng) {
  if (dataset_size < 1) throw std::invalid_argument("epoch_batches: empty dataset");
  if (batch_size < 1) throw std::invalid_argument("epoch_batches: batch_size must be >= 1");
  const std::vector<int> order = rng.permutation(dataset_size);
  std::vector<std::vector<int>> batches;
  for (int start = 0; start < dataset_size; start += batch_size) {
    const int end = std::min(start + batch_size, dataset_size);
    batches.emplace_back(order.begin() + start, order.begin() + end);
  }
  return batches;
}

std::vector<int> sample_refs(const ReferenceSet& refs, int n_r, Rng& rng) {
  if (refs.indices.empty()) throw std::invalid_argument("sample_refs: empty reference set");
  if (n_r < 1) throw std::invalid_argument("sample_refs: n_r must be >= 1");
  std::vector<int> out(static_cast<std::size_t>(n_r));
  for (int i = 0; i < n_r; ++i)
    out[static_cast<std::size_t>(i)] =
        refs.indices[rng.below(refs.indices.size())];
  return out;
}

MetricTriple evaluate_model(const ModelState& model, const Dataset& data) {
  MetricTriple sum;
  for (const Sample& s : data.samples) {
    const SaliencyMap pred = forward(model, s.features);
    const MetricTriple m = evaluate_sample(pred, s.gt_saliency, s.fixations);
    sum.nss += m.nss;
    sum.auc += m.auc;
    sum.cc += m.cc;
  }
  const double count = static_cast<double>(data.samples.size());
  return {sum.nss / count, sum.auc / count, sum.cc / count};
}

std::vector<MetricTriple> evaluate_per_image(const ModelState& model, const Dataset& data) {
  std::vector<MetricTriple> out;
  out.reserve(data.samples.size());
  for (const Sample& s : data.samples) {
    const SaliencyMap pred = forward(model, s.features);
    out.push_back(evaluate_sample(pred, s.gt_saliency, s.fixations));
  }
  return out;
}

int select_best_epoch(const std::vector<MetricTriple>& per_epoch, const std::string& metric) {
  if (per_epoch.empty()) throw std::invalid_argument("select_best_epoch: no epochs");
  int best = 0;
  double best_value = metric_value(per_epoch[0], metric);
  for (int e = 1; e < static_cast<int>(per_epoch.size()); ++e) {
    const double v = metric_value(per_epoch[static_cast<std::size_t>(e)], metric);
    if (v > best_value) {
      best_value = v;
      best = e;
    }
  }
  return best;
}

StageResult train_stage(const ModelState& init, const Dataset& source, const ReferenceSet* refs,
                        const TrainConfig& cfg, int n_r, const Dataset& selection_set,
                        const std::string& stage_label, Rng batch_rng, Rng ref_rng,
                        bool verbose) {
  if (source.empty()) throw std::invalid_argument(stage_label + ": empty training set");
  if (refs && refs->indices.empty()) refs = nullptr;
  if (refs && n_r < 1) throw std::invalid_argument(stage_label + ": n_r must be >= 1 with refs");

  ModelState model = init;
  AdamState adam = make_adam_state(model.param_count());
  StageResult out;
  std::vector<std::vector<float>> epoch_params;
  int iteration = 0;
  int triggered = 0;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = lr_schedule(cfg.lr, epoch);
    double epoch_loss = 0.0;
    int epoch_iters = 0;
    int epoch_triggered = 0;
    for (const std::vector<int>& batch : epoch_batches(source.size(), cfg.batch_size, batch_rng)) {
      BatchGrad g = batch_gradient(model, source, batch);
      if (!std::isfinite(g.loss))
        throw std::runtime_error(stage_label + ": non-finite loss at iteration " +
                                 std::to_string(iteration) + ", batch " + batch_to_string(batch));
      epoch_loss += g.loss;
      ++epoch_iters;
      if (refs) {
        const std::vector<int> drawn = sample_refs(*refs, n_r, ref_rng);
        const BatchGrad rg = batch_gradient(model, *refs->data, drawn);
        const CorrectionOutcome oc = correct_gradient(g.head, rg.head, cfg.correction);
        out.corrections.push_back(
            {oc.gate_triggered, oc.cos_before, oc.cos_after, oc.inner_steps_taken});
        if (oc.gate_triggered) {
          ++triggered;
          ++epoch_triggered;
        }
        g.head = oc.corrected;
      }
      adam_step(model, assemble_gradient(model, g.body, g.head), adam, lr, cfg.weight_decay);
      ++iteration;
    }
    const MetricTriple sel = evaluate_model(model, selection_set);
    out.per_epoch.push_back(sel);
    out.param_digests.push_back(params_digest(model));
    epoch_params.push_back(model.flatten_params());
    if (verbose)
      progress_line(stage_label, epoch, epoch_loss / epoch_iters,
                    metric_value(sel, cfg.selection_metric),
                    refs ? static_cast<double>(epoch_triggered) / epoch_iters : 0.0);
  }

  out.best_epoch = select_best_epoch(out.per_epoch, cfg.selection_metric);
  out.final_state = model;
  out.checkpoint = std::move(model);
  out.checkpoint.load_params(epoch_params[static_cast<std::size_t>(out.best_epoch)]);
  out.gate_rate = refs ? static_cast<double>(triggered) / iteration : 0.0;
  return out;
}

StageResult finetune_stage(const ModelState& checkpoint, const ReferenceSet& refs,
                           const TrainConfig& cfg, const std::string& stage_label, Rng batch_rng,
                           bool verbose) {
  if (refs.indices.empty()) throw std::invalid_argument(stage_label + ": empty reference set");
  const Dataset ref_data = subset(*refs.data, refs.indices);
  TrainConfig ft_cfg = cfg;
  ft_cfg.batch_size = std::min(cfg.batch_size, ref_data.size());
  return train_stage(checkpoint, ref_data, nullptr, ft_cfg, 0, ref_data, stage_label,
                     std::move(batch_rng), Rng(0), verbose);
}

std::vector<std::vector<int>> make_folds(int count, int folds, Rng& rng) {
  if (folds < 1 || count < folds)
    throw std::invalid_argument("make_folds: need at least one sample per fold");
  const std::vector<int> order = rng.permutation(count);
  std::vector<std::vector<int>> out(static_cast<std::size_t>(folds));
  const int base = count / folds;
  const int extra = count % folds;  // first `extra` folds get one more
  int cursor = 0;
  for (int f = 0; f < folds; ++f) {
    const int size = base + (f < extra ? 1 : 0);
    out[static_cast<std::size_t>(f)].assign(order.begin() + cursor, order.begin() + cursor + size);
    cursor += size;
  }
  return out;
}

MetricTriple eub_protocol(const Dataset& source, const Dataset& target,
                          const ExperimentConfig& cfg, uint64_t run_seed, bool verbose) {
  if (target.size() < 3) throw std::invalid_argument("eub_protocol: need at least 3 target samples");
  Rng fold_rng(run_seed, "folds");
  const auto folds = make_folds(target.size(), 3, fold_rng);

  TrainConfig tc = cfg.train;
  MetricTriple sum;
  for (std::size_t held = 0; held < folds.size(); ++held) {
    ReferenceSet refs{&target, {}};
    for (std::size_t f = 0; f < folds.size(); ++f)
      if (f != held) refs.indices.insert(refs.indices.end(), folds[f].begin(), folds[f].end());
    const int n_r = (refs.size() + 1) / 2;

    Rng init_rng(run_seed, "init");
    const ModelState init =
        make_model(default_architecture(source.channels(), cfg.hidden_channels), cfg.head_layers,
                   init_rng);
    const std::string tag = "eub" + std::to_string(held);
    const StageResult trained =
        train_stage(init, source, &refs, tc, n_r, subset(target, refs.indices), tag + "/tr_ref",
                    Rng(run_seed, "batch"), Rng(run_seed, "refs"), verbose);
    const StageResult tuned = finetune_stage(trained.checkpoint, refs, tc, tag + "/ft_ref",
                                             Rng(run_seed, "ft_batch"), verbose);
    const MetricTriple m = evaluate_model(tuned.checkpoint, subset(target, folds[held]));
    sum.nss += m.nss;
    sum.auc += m.auc;
    sum.cc += m.cc;
  }
  return {sum.nss / 3.0, sum.auc / 3.0, sum.cc / 3.0};
}

std::vector<RunRecord> run_experiment(const ExperimentConfig& cfg, bool verbose,
                                      const CheckpointSink& sink) {
  const Dataset source = cfg.source_path.empty()
                             ? generate_dataset(cfg.source_spec, cfg.source_count,
                                                derive_seed(cfg.base_seed, "source_data"),
                                                DomainTag::source)
                             : load_dataset(cfg.source_path, DomainTag::source);
  const Dataset target = cfg.target_path.empty()
                             ? generate_dataset(cfg.target_spec, cfg.target_count,
                                                derive_seed(cfg.base_seed, "target_data"),
                                                DomainTag::target)
                             : load_dataset(cfg.target_path, DomainTag::target);
  if (source.channels() != target.channels())
    throw std::runtime_error("run_experiment: channel mismatch between datasets");
  if (cfg.eval_count > target.size())
    throw std::runtime_error("run_experiment: eval_count exceeds the target dataset");

  // First eval_count target samples are the fixed evaluation split; the rest
  // form the reference pool. The split must not depend on the run seed or the
  // per-seed records would not be paired comparisons.
  std::vector<int> eval_idx(static_cast<std::size_t>(cfg.eval_count));
  for (int i = 0; i < cfg.eval_count; ++i) eval_idx[static_cast<std::size_t>(i)] = i;
  const Dataset eval_set = subset(target, eval_idx);
  std::vector<int> pool_idx;
  for (int i = cfg.eval_count; i < target.size(); ++i) pool_idx.push_back(i);
  if (cfg.n > static_cast<int>(pool_idx.size()))
    throw std::runtime_error("run_experiment: n exceeds the target reference pool");

  const std::set<std::string> req(cfg.procedures.begin(), cfg.procedures.end());
  // With no references or an empty head the referenced procedures coincide
  // with their plain counterparts, so those rows carry the plain tags (and
  // duplicates collapse). With n = 0 there is nothing to fine-tune on either:
  // FT rows report the TR checkpoint and FT-w/o-TR rows are dropped.
  const bool refs_active = cfg.n > 0 && cfg.head_layers > 0;
  const bool tr_row = req.count("tr") || (!refs_active && req.count("tr_ref"));
  const bool ft_row = cfg.n > 0 && (req.count("ft") || (!refs_active && req.count("ft_ref")));
  const bool ft0_row = cfg.n == 0 && (req.count("ft") || req.count("ft_ref"));
  const bool trref_row = refs_active && req.count("tr_ref");
  const bool ftref_row = refs_active && req.count("ft_ref");
  const bool ftwo_row = cfg.n > 0 && req.count("ft_wo_tr");
  const bool want_eub = req.count("eub");
  const bool need_tr_stage = tr_row || ft_row || ft0_row;
  const bool need_trref_stage = trref_row || ftref_row;

  TrainConfig tc = cfg.train;
  const int n_r = cfg.resolved_n_r();

  std::vector<RunRecord> records;
  for (int run = 0; run < cfg.repeats; ++run) {
    const uint64_t seed = cfg.base_seed + static_cast<uint64_t>(run);

    Rng init_rng(seed, "init");
    const ModelState init = make_model(
        default_architecture(source.channels(), cfg.hidden_channels), cfg.head_layers, init_rng);

    // Source split: 10% validation for TR's epoch selection.
    Rng split_rng(seed, "src_split");
    const std::vector<int> order = split_rng.permutation(source.size());
    const int val_count = std::max(1, source.size() / 10);
    const Dataset src_val = subset(source, {order.begin(), order.begin() + val_count});
    const Dataset src_train = subset(source, {order.begin() + val_count, order.end()});

    ReferenceSet refs{&target, {}};
    if (cfg.n > 0) {
      Rng pick_rng(seed, "ref_pick");
      const std::vector<int> perm = pick_rng.permutation(static_cast<int>(pool_idx.size()));
      for (int k = 0; k < cfg.n; ++k)
        refs.indices.push_back(pool_idx[static_cast<std::size_t>(perm[static_cast<std::size_t>(k)])]);
    }
    const Dataset ref_data = cfg.n > 0 ? subset(target, refs.indices) : Dataset{};

    auto add = [&](const std::string& tag, const MetricTriple& m, double gate) {
      records.push_back({cfg.setting, tag, cfg.n, seed, m, gate});
    };

    StageResult tr, tr_ref;
    if (need_tr_stage)
      tr = train_stage(init, src_train, nullptr, tc, 0, src_val, "tr", Rng(seed, "batch"),
                       Rng(seed, "refs"), verbose);
    if (need_trref_stage)
      tr_ref = train_stage(init, src_train, &refs, tc, n_r, ref_data, "tr_ref",
                           Rng(seed, "batch"), Rng(seed, "refs"), verbose);

    auto emit = [&](const std::string& tag, const ModelState& model, double gate) {
      add(tag, evaluate_model(model, eval_set), gate);
      if (sink) sink(tag, model);
    };

    if (tr_row) emit("tr", tr.checkpoint, 0.0);
    if (trref_row) emit("tr_ref", tr_ref.checkpoint, tr_ref.gate_rate);
    if (ft0_row) emit("ft", tr.checkpoint, 0.0);
    if (ft_row) {
      const StageResult ft =
          finetune_stage(tr.checkpoint, refs, tc, "ft", Rng(seed, "ft_batch"), verbose);
      emit("ft", ft.checkpoint, 0.0);
    }
    if (ftref_row) {
      const StageResult ft_ref = finetune_stage(tr_ref.checkpoint, refs, tc, "ft_ref",
                                                Rng(seed, "ft_batch"), verbose);
      emit("ft_ref", ft_ref.checkpoint, tr_ref.gate_rate);
    }
    if (ftwo_row) {
      const StageResult raw =
          finetune_stage(init, refs, tc, "ft_wo_tr", Rng(seed, "ft_batch"), verbose);
      emit("ft_wo_tr", raw.checkpoint, 0.0);
    }
    if (want_eub)
      add("eub", eub_protocol(source, target, cfg, seed, verbose), 0.0);
  }
  return records;
}

}  // namespace salref
