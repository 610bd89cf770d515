#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "salref/bound.hpp"
#include "salref/checkpoint.hpp"
#include "salref/config.hpp"
#include "salref/datagen.hpp"
#include "salref/dataset.hpp"
#include "salref/pipeline.hpp"
#include "salref/report.hpp"
#include "salref/stats.hpp"

namespace {

using namespace salref;

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::fputs(text.c_str(), stdout);
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

struct SeedOverride {
  CLI::Option* opt = nullptr;
  uint64_t value = 0;

  bool set() const { return opt && opt->count() > 0; }
  void apply(ExperimentConfig& cfg) const {
    if (set()) cfg.base_seed = value;
  }
};

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> out;
  std::string cur;
  auto flush = [&] {
    if (cur.empty()) return;
    out.push_back(std::stod(cur));
    cur.clear();
  };
  for (char c : text) {
    if (c == ',') flush();
    else cur += c;
  }
  flush();
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"few-reference saliency transfer: training, evaluation and reporting"};
  app.require_subcommand(1);

  SeedOverride seed;
  seed.opt = app.add_option("--seed", seed.value,
                            "override the configured base seed / generation seed");

  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "per-epoch progress lines on stderr");

  // gen-data <spec> <out>
  auto* gen = app.add_subcommand("gen-data", "generate a synthetic SALD dataset");
  std::string gen_spec_path, gen_out;
  gen->add_option("spec", gen_spec_path, "domain spec file")->required();
  gen->add_option("out", gen_out, "output SALD path")->required();
  gen->callback([&] {
    GenSpec spec = load_gen_spec_file(gen_spec_path);
    if (seed.set()) spec.seed = seed.value;
    save_dataset(gen_out, generate_dataset(spec.domain, spec.count, spec.seed, spec.tag));
    std::fprintf(stdout, "wrote %d samples to %s\n", spec.count, gen_out.c_str());
  });

  // train <config> [--out dir]
  auto* train = app.add_subcommand("train", "run one seeded chain and save checkpoints");
  std::string train_cfg_path, train_out = ".";
  train->add_option("config", train_cfg_path, "experiment config")->required();
  train->add_option("--out", train_out, "checkpoint output directory");
  train->callback([&] {
    ExperimentConfig cfg = load_config_file(train_cfg_path);
    seed.apply(cfg);
    cfg.repeats = 1;
    const std::vector<RunRecord> records = run_experiment(
        cfg, true, [&](const std::string& tag, const ModelState& model) {
          const std::string path = train_out + "/" + tag + ".salc";
          save_checkpoint(path, model);
          std::fprintf(stderr, "saved %s\n", path.c_str());
        });
    std::fputs(format_table(aggregate(records)).c_str(), stdout);
  });

  // eval <checkpoint> <dataset> [--per-image]
  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint on a SALD dataset");
  std::string eval_ckpt, eval_data;
  bool per_image = false;
  eval->add_option("checkpoint", eval_ckpt, "SALC checkpoint")->required();
  eval->add_option("dataset", eval_data, "SALD dataset")->required();
  eval->add_flag("--per-image", per_image, "emit per-image scores as CSV");
  eval->callback([&] {
    const ModelState model = load_checkpoint(eval_ckpt);
    const Dataset data = load_dataset(eval_data, DomainTag::target);
    if (per_image) {
      std::fputs(per_image_csv(evaluate_per_image(model, data)).c_str(), stdout);
    } else {
      const MetricTriple m = evaluate_model(model, data);
      std::fprintf(stdout, "nss %.6g\nauc %.6g\ncc %.6g\n", m.nss, m.auc, m.cc);
    }
  });

  // experiment <config>
  auto* exp = app.add_subcommand("experiment", "run the full seeded experiment, emit run CSV");
  std::string exp_cfg_path;
  exp->add_option("config", exp_cfg_path, "experiment config")->required();
  exp->callback([&] {
    ExperimentConfig cfg = load_config_file(exp_cfg_path);
    seed.apply(cfg);
    const std::vector<RunRecord> records = run_experiment(cfg, verbose);
    write_text(cfg.csv_path, records_to_csv(records));
    if (!cfg.csv_path.empty()) std::fputs(format_table(aggregate(records)).c_str(), stdout);
  });

  // ablate <kind> <config> [--grid ...]
  auto* ablate = app.add_subcommand("ablate", "sweep n, epsilon or head layers");
  std::string ablate_kind, ablate_cfg_path, ablate_grid;
  ablate->add_option("kind", ablate_kind, "n | epsilon | layers")->required();
  ablate->add_option("config", ablate_cfg_path, "experiment config")->required();
  ablate->add_option("--grid", ablate_grid, "comma-separated grid values");
  ablate->callback([&] {
    ExperimentConfig cfg = load_config_file(ablate_cfg_path);
    seed.apply(cfg);
    const SweepKind kind = parse_sweep_kind(ablate_kind);
    const std::vector<double> grid =
        ablate_grid.empty() ? default_grid(kind) : parse_grid(ablate_grid);
    write_text(cfg.csv_path, ablation_sweep(kind, grid, cfg, verbose));
  });

  // bound m p H delta D
  auto* bound = app.add_subcommand("bound", "evaluate the generalization bound");
  BoundInputs bi;
  bound->add_option("m", bi.m, "map dimensionality")->required();
  bound->add_option("p", bi.p, "loss exponent")->required();
  bound->add_option("H", bi.hypothesis_count, "hypothesis count")->required();
  bound->add_option("delta", bi.delta, "confidence parameter")->required();
  bound->add_option("D", bi.dataset_size, "dataset size")->required();
  bound->callback([&] { std::fprintf(stdout, "%.6g\n", generalization_bound(bi)); });

  // report <csv...> [--compare a b] [--metric] [--iterations]
  auto* report = app.add_subcommand("report", "aggregate run CSVs or compare per-image scores");
  std::vector<std::string> report_csvs, compare_pair;
  std::string metric = "nss";
  int iterations = 10000;
  report->add_option("csv", report_csvs, "run CSV files");
  report->add_option("--compare", compare_pair, "two per-image CSVs for significance tests")
      ->expected(2);
  report->add_option("--metric", metric, "nss | auc | cc (for --compare)");
  report->add_option("--iterations", iterations, "permutation test iterations");
  report->callback([&] {
    if (!compare_pair.empty()) {
      auto pick = [&](const MetricTriple& m) {
        if (metric == "nss") return m.nss;
        if (metric == "auc") return m.auc;
        if (metric == "cc") return m.cc;
        throw std::runtime_error("unknown metric '" + metric + "'");
      };
      const auto sa = parse_per_image_csv(slurp(compare_pair[0]));
      const auto sb = parse_per_image_csv(slurp(compare_pair[1]));
      if (sa.size() != sb.size())
        throw std::runtime_error("--compare inputs must pair up image for image");
      std::vector<double> a, b;
      for (std::size_t i = 0; i < sa.size(); ++i) {
        a.push_back(pick(sa[i]));
        b.push_back(pick(sb[i]));
      }
      Rng rng(seed.set() ? seed.value : 1, "perm_test");
      std::fprintf(stdout, "paired_t_p %.6g\n", paired_t_test(a, b));
      std::fprintf(stdout, "permutation_p %.6g\n", permutation_test(a, b, iterations, rng));
      return;
    }
    if (report_csvs.empty()) throw CLI::ValidationError("report", "no CSV files given");
    std::vector<RunRecord> records;
    for (const std::string& path : report_csvs) {
      const auto part = parse_records_csv(slurp(path));
      records.insert(records.end(), part.begin(), part.end());
    }
    std::fputs(format_table(aggregate(records)).c_str(), stdout);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
