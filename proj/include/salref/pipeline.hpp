#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "salref/config.hpp"
#include "salref/dataset.hpp"
#include "salref/metrics.hpp"
#include "salref/model.hpp"
#include "salref/reference.hpp"
#include "salref/rng.hpp"

namespace salref {

// Indices of the n reference samples inside a target dataset.
struct ReferenceSet {
  const Dataset* data = nullptr;
  std::vector<int> indices;

  int size() const { return static_cast<int>(indices.size()); }
};

// Per-iteration correction bookkeeping kept small; full gradients are not
// retained.
struct CorrectionSummary {
  bool gate_triggered = false;
  double cos_before = 0.0;
  double cos_after = 0.0;
  int inner_steps_taken = 0;
};

struct StageResult {
  ModelState checkpoint;               // parameters of the best epoch
  ModelState final_state;              // parameters after the last epoch
  std::vector<MetricTriple> per_epoch;  // selection-set metrics per epoch
  int best_epoch = 0;
  std::vector<CorrectionSummary> corrections;  // one per iteration when refs present
  double gate_rate = 0.0;                      // triggered fraction, 0 without refs
  std::vector<uint64_t> param_digests;         // fnv1a of params after each epoch
};

// One shuffled pass over 0..dataset_size-1, chunked into batches of
// batch_size; a short remainder forms the last batch.
std::vector<std::vector<int>> epoch_batches(int dataset_size, int batch_size, Rng& rng);

// n_r reference indices drawn with replacement from the pool.
std::vector<int> sample_refs(const ReferenceSet& refs, int n_r, Rng& rng);

MetricTriple evaluate_model(const ModelState& model, const Dataset& data);
std::vector<MetricTriple> evaluate_per_image(const ModelState& model, const Dataset& data);

// Argmax of the chosen metric; ties resolve to the earliest epoch.
int select_best_epoch(const std::vector<MetricTriple>& per_epoch, const std::string& metric);

// Source training, with the gradient correction when refs != nullptr (the
// correction touches head gradients only). Both RNG streams are taken by
// value so sibling stages can share identical sequences. A progress line
// `stage epoch loss sel_metric gate_rate` goes to stderr per epoch when
// verbose. Aborts on non-finite loss naming the iteration and batch.
StageResult train_stage(const ModelState& init, const Dataset& source, const ReferenceSet* refs,
                        const TrainConfig& cfg, int n_r, const Dataset& selection_set,
                        const std::string& stage_label, Rng batch_rng, Rng ref_rng, bool verbose);

// Standard fine-tuning on the reference samples only: full model, no
// correction, fresh optimizer state, batches of min(batch_size, n),
// selection on the references themselves.
StageResult finetune_stage(const ModelState& checkpoint, const ReferenceSet& refs,
                           const TrainConfig& cfg, const std::string& stage_label, Rng batch_rng,
                           bool verbose);

// 3-fold cross validation on the target set: each fold held out for
// evaluation while the other two serve as references for a full
// TR-Ref + fine-tune chain; fold scores averaged.
MetricTriple eub_protocol(const Dataset& source, const Dataset& target,
                          const ExperimentConfig& cfg, uint64_t run_seed, bool verbose);

// Near-equal fold sizes from a seeded shuffle (3 folds, sizes differ by <= 1).
std::vector<std::vector<int>> make_folds(int count, int folds, Rng& rng);

struct RunRecord {
  std::string setting;
  std::string procedure;
  int n = 0;
  uint64_t seed = 0;
  MetricTriple metrics;
  double gate_rate = 0.0;  // diagnostics for sweeps; not part of the CSV schema
};

// Called with (procedure tag, best checkpoint) per procedure and run when
// set; `train` uses it to persist checkpoints. EUB has no single model and
// is skipped.
using CheckpointSink = std::function<void(const std::string&, const ModelState&)>;

// R seeded repeats of the configured procedure chain. Datasets are fixed
// across repeats (derived from base_seed); per-run randomness (init,
// split, batches, reference draws) comes from seed = base_seed + run.
std::vector<RunRecord> run_experiment(const ExperimentConfig& cfg, bool verbose,
                                      const CheckpointSink& sink = {});

}  // namespace salref
