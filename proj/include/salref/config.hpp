#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "salref/datagen.hpp"
#include "salref/reference.hpp"

namespace salref {

struct TrainConfig {
  double lr = 5e-5;
  double weight_decay = 1e-4;
  int batch_size = 10;
  int epochs = 10;
  CorrectionConfig correction;         // epsilon = 0, lambda = 1e-3
  int n_r = 0;                         // reference draws per iteration; 0 = auto
  std::string selection_metric = "nss";  // nss | auc | cc
};

// Everything one experiment needs. Defaults describe the stock benchmark:
// natural_like source, webpage_like target, 3-layer conv model with a
// 1-layer head, 10 seeded repeats.
struct ExperimentConfig {
  std::string setting;  // label for the CSV; composed from kinds when empty
  int n = 10;           // reference count
  std::vector<std::string> procedures = {"tr", "tr_ref", "ft", "ft_ref", "ft_wo_tr"};
  int repeats = 10;
  uint64_t base_seed = 1;
  int head_layers = 1;
  int hidden_channels = 16;
  TrainConfig train;

  DomainSpec source_spec;
  DomainSpec target_spec;
  int source_count = 200;
  int target_count = 30;
  // The first eval_count target samples form the evaluation split; the rest
  // are the reference pool runs draw their n references from.
  int eval_count = 20;

  // SALD files override generation when set.
  std::string source_path;
  std::string target_path;
  std::string csv_path;  // empty = stdout

  ExperimentConfig();

  // Paper map n -> n_r {1->1, 5->3, 10->5}, i.e. ceil(n/2), unless the
  // config pinned n_r explicitly.
  int resolved_n_r() const { return train.n_r > 0 ? train.n_r : (n + 1) / 2; }
};

// `key = value` lines, # comments, empty file = defaults. Unknown keys,
// malformed values and bad combinations throw with the line number.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config_file(const std::string& path);

// Spec for `gen-data`; same syntax, but kind and count must be present.
struct GenSpec {
  DomainSpec domain;
  int count = 0;
  uint64_t seed = 1;
  DomainTag tag = DomainTag::source;
};

GenSpec parse_gen_spec(const std::string& text);
GenSpec load_gen_spec_file(const std::string& path);

}  // namespace salref
