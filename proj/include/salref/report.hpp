#pragma once

#include <string>
#include <vector>

#include "salref/config.hpp"
#include "salref/pipeline.hpp"
#include "salref/stats.hpp"

namespace salref {

// Fixed run CSV schema: header `setting,procedure,n,seed,nss,auc,cc`,
// metrics with 6 significant digits. Byte-stable for fixed inputs.
std::string records_to_csv(const std::vector<RunRecord>& records);
std::vector<RunRecord> parse_records_csv(const std::string& text);

// Per-image score CSV (`eval --per-image`): header `index,nss,auc,cc`.
std::string per_image_csv(const std::vector<MetricTriple>& scores);
std::vector<MetricTriple> parse_per_image_csv(const std::string& text);

struct AggregateRow {
  std::string setting;
  std::string procedure;
  int n = 0;
  int runs = 0;
  MeanStd nss, auc, cc;
  double mean_gate_rate = 0.0;
};

// Groups records by (setting, procedure, n) in first-appearance order.
// Sample (n-1) standard deviation; a singleton group has std 0.
std::vector<AggregateRow> aggregate(const std::vector<RunRecord>& records);

// Aligned text table of aggregate rows with mean±std cells.
std::string format_table(const std::vector<AggregateRow>& rows);

enum class SweepKind { n, epsilon, layers };

SweepKind parse_sweep_kind(const std::string& name);
std::vector<double> default_grid(SweepKind kind);

// Runs run_experiment once per grid value with the corresponding config
// field overridden; emits `kind,value,procedure,nss,auc,cc,gate_rate`
// with mean±std metric cells.
std::string ablation_sweep(SweepKind kind, const std::vector<double>& grid,
                           const ExperimentConfig& cfg, bool verbose);

}  // namespace salref
