#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <vector>

#include "salref/adam.hpp"
#include "salref/checkpoint.hpp"
#include "salref/config.hpp"
#include "salref/datagen.hpp"
#include "salref/loss.hpp"
#include "salref/pipeline.hpp"
#include "salref/report.hpp"
#include "salref/rng.hpp"

using namespace salref;

namespace {

DomainSpec tiny_domain(DomainKind kind, uint64_t mixing_seed) {
  DomainSpec spec;
  spec.kind = kind;
  spec.height = 10;
  spec.width = 10;
  spec.channels = 2;
  spec.fixations_per_image = 5;
  spec.mixing_seed = mixing_seed;
  return spec;
}

Dataset tiny_dataset(int count, uint64_t seed, DomainKind kind = DomainKind::natural_like,
                     uint64_t mixing_seed = 1,
                     DomainTag tag = DomainTag::source) {
  return generate_dataset(tiny_domain(kind, mixing_seed), count, seed, tag);
}

ModelState tiny_model(uint64_t seed, int head_layers = 1) {
  Rng rng(seed, "init");
  return make_model(default_architecture(2, 4), head_layers, rng);
}

TrainConfig fast_train(int epochs) {
  TrainConfig cfg;
  cfg.epochs = epochs;
  return cfg;
}

}  // namespace

TEST_CASE("epoch_batches: shuffled pass arithmetic") {
  Rng rng(1, "batch");
  auto one = epoch_batches(10, 10, rng);
  REQUIRE(one.size() == 1);
  CHECK(one[0].size() == 10);

  auto batches = epoch_batches(25, 10, rng);
  REQUIRE(batches.size() == 3);
  CHECK(batches[0].size() == 10);
  CHECK(batches[1].size() == 10);
  CHECK(batches[2].size() == 5);
  std::set<int> seen;
  for (const auto& b : batches) seen.insert(b.begin(), b.end());
  CHECK(seen.size() == 25);
  CHECK(*seen.begin() == 0);
  CHECK(*seen.rbegin() == 24);

  Rng r1(9, "batch"), r2(9, "batch");
  CHECK(epoch_batches(25, 10, r1) == epoch_batches(25, 10, r2));
  CHECK_THROWS_AS(epoch_batches(0, 10, rng), std::invalid_argument);
}

TEST_CASE("sample_refs: with replacement from the pool") {
  Dataset t = tiny_dataset(6, 3);
  ReferenceSet refs{&t, {1, 4}};
  Rng r1(5, "refs"), r2(5, "refs");
  const std::vector<int> a = sample_refs(refs, 9, r1);
  CHECK(a == sample_refs(refs, 9, r2));
  REQUIRE(a.size() == 9);
  for (int idx : a) CHECK((idx == 1 || idx == 4));
  // nine draws from two indices must repeat
  CHECK(std::set<int>(a.begin(), a.end()).size() <= 2);
  CHECK_THROWS_AS(sample_refs(ReferenceSet{&t, {}}, 1, r1), std::invalid_argument);
}

TEST_CASE("reference count mapping n -> n_r") {
  for (auto [n, nr] : {std::pair{1, 1}, {5, 3}, {10, 5}}) {
    ExperimentConfig cfg;
    cfg.n = n;
    CHECK(cfg.resolved_n_r() == nr);
  }
  ExperimentConfig pinned;
  pinned.n = 10;
  pinned.train.n_r = 2;
  CHECK(pinned.resolved_n_r() == 2);
}

TEST_CASE("select_best_epoch: argmax with earliest-tie rule") {
  std::vector<MetricTriple> per = {{1.0, 0, 0}, {1.5, 0, 0}, {1.2, 0, 0}};
  CHECK(select_best_epoch(per, "nss") == 1);
  std::vector<MetricTriple> flat = {{0.7, 0, 0}, {0.7, 0, 0}, {0.7, 0, 0}};
  CHECK(select_best_epoch(flat, "nss") == 0);
  CHECK(select_best_epoch({{0.4, 0, 0}}, "nss") == 0);
  std::vector<MetricTriple> by_auc = {{0, 0.6, 0}, {0, 0.9, 0}};
  CHECK(select_best_epoch(by_auc, "auc") == 1);
  CHECK_THROWS_AS(select_best_epoch({}, "nss"), std::invalid_argument);
}

TEST_CASE("make_folds: near-equal sizes covering every index once") {
  Rng rng(7, "folds");
  auto f10 = make_folds(10, 3, rng);
  REQUIRE(f10.size() == 3);
  CHECK(f10[0].size() == 4);
  CHECK(f10[1].size() == 3);
  CHECK(f10[2].size() == 3);

  auto f3 = make_folds(3, 3, rng);
  for (const auto& f : f3) CHECK(f.size() == 1);

  auto f149 = make_folds(149, 3, rng);
  CHECK(f149[0].size() == 50);
  CHECK(f149[1].size() == 50);
  CHECK(f149[2].size() == 49);

  std::set<int> all;
  for (const auto& f : f149) all.insert(f.begin(), f.end());
  CHECK(all.size() == 149);
  CHECK_THROWS_AS(make_folds(2, 3, rng), std::invalid_argument);
}

TEST_CASE("train_stage: one-epoch run matches a double-precision replay") {
  // 2-parameter model: a single 1x1 sigmoid conv (weight + bias).
  ModelState m;
  m.layers = {{1, 1, 1, Activation::sigmoid}};
  m.weights = {Grid({1, 1, 1}, {0.4f})};
  m.biases = {Grid({1}, {-0.1f})};
  m.head_boundary = 0;

  Dataset data;
  data.domain_tag = DomainTag::source;
  Rng drng(21);
  for (int s = 0; s < 3; ++s) {
    Sample smp;
    smp.features = Grid({1, 2, 2});
    smp.gt_saliency = Grid({2, 2});
    smp.fixations = FixationMap(2, 2);
    for (std::size_t i = 0; i < 4; ++i) {
      smp.features[i] = static_cast<float>(drng.uniform(-1.0, 1.0));
      smp.gt_saliency[i] = static_cast<float>(drng.uniform(0.1, 1.0));
    }
    smp.fixations.at(s % 2, (s / 2) % 2) = 1;
    data.samples.push_back(std::move(smp));
  }

  TrainConfig cfg = fast_train(1);
  cfg.lr = 1e-3;
  cfg.weight_decay = 1e-4;
  StageResult res = train_stage(m, data, nullptr, cfg, 0, data, "replay",
                                Rng(33, "batch"), Rng(33, "refs"), false);

  // Replay: mean-loss gradient over the single batch of 3, then one Adam
  // step with decay folded into the gradient, all in double.
  double dw = 0.0, db = 0.0;
  for (const Sample& s : data.samples) {
    double pred[4], z[4];
    double pmax = 0.0, tmax = 0.0;
    for (int i = 0; i < 4; ++i) {
      z[i] = 0.4 * s.features[static_cast<std::size_t>(i)] - 0.1;
      pred[i] = 1.0 / (1.0 + std::exp(-z[i]));
      pmax = std::max(pmax, pred[i]);
      tmax = std::max(tmax, static_cast<double>(s.gt_saliency[static_cast<std::size_t>(i)]));
    }
    for (int i = 0; i < 4; ++i) {
      const double diff = pred[i] / pmax - s.gt_saliency[static_cast<std::size_t>(i)] / tmax;
      const double sign = diff > 0 ? 1.0 : (diff < 0 ? -1.0 : 0.0);
      const double dmap = sign / (4.0 * pmax) / 3.0;  // 1/batch scaling
      const double dz = dmap * pred[i] * (1.0 - pred[i]);
      dw += dz * s.features[static_cast<std::size_t>(i)];
      db += dz;
    }
  }
  auto adam_replay = [&](double p, double g) {
    const double ge = g + cfg.weight_decay * p;
    const double m1 = 0.1 * ge;              // (1 - beta1) * ge
    const double v1 = 0.001 * ge * ge;       // (1 - beta2) * ge^2
    const double mh = m1 / (1.0 - 0.9);
    const double vh = v1 / (1.0 - 0.999);
    return p - cfg.lr * mh / (std::sqrt(vh) + 1e-8);
  };
  CHECK(res.final_state.weights[0][0] ==
        doctest::Approx(adam_replay(0.4, dw)).epsilon(1e-5));
  CHECK(res.final_state.biases[0][0] ==
        doctest::Approx(adam_replay(-0.1, db)).epsilon(1e-5));
  CHECK(res.per_epoch.size() == 1);
  CHECK(res.best_epoch == 0);
  CHECK(res.corrections.empty());
  CHECK(res.gate_rate == 0.0);
}

TEST_CASE("train_stage: epsilon = -1 reproduces the plain trajectory bit-exactly") {
  Dataset src = tiny_dataset(20, 5);
  Dataset tgt = tiny_dataset(8, 6, DomainKind::webpage_like, 2, DomainTag::target);
  ModelState init = tiny_model(42);
  Dataset sel = subset(src, {0, 1});

  TrainConfig cfg = fast_train(3);
  StageResult plain = train_stage(init, src, nullptr, cfg, 0, sel, "plain",
                                  Rng(42, "batch"), Rng(42, "refs"), false);

  ReferenceSet refs{&tgt, {0, 1, 2, 3}};
  TrainConfig gated = cfg;
  gated.correction.epsilon = -1.0;
  StageResult reffed = train_stage(init, src, &refs, gated, 2, sel, "reffed",
                                   Rng(42, "batch"), Rng(42, "refs"), false);

  REQUIRE(plain.param_digests.size() == reffed.param_digests.size());
  CHECK(plain.param_digests == reffed.param_digests);
  CHECK(plain.final_state.flatten_params() == reffed.final_state.flatten_params());
  // bookkeeping still runs: one record per iteration, none triggered
  CHECK(reffed.corrections.size() == 3 * 2);  // 3 epochs, 2 batches of 10
  for (const CorrectionSummary& c : reffed.corrections) CHECK_FALSE(c.gate_triggered);
  CHECK(reffed.gate_rate == 0.0);
}

TEST_CASE("train_stage: an empty head degenerates the correction to a no-op") {
  Dataset src = tiny_dataset(12, 9);
  Dataset tgt = tiny_dataset(6, 10, DomainKind::webpage_like, 2, DomainTag::target);
  ModelState init = tiny_model(7, 0);  // head_boundary == layer count
  Dataset sel = subset(src, {0});
  TrainConfig cfg = fast_train(2);

  ReferenceSet refs{&tgt, {0, 1, 2}};
  StageResult with_refs = train_stage(init, src, &refs, cfg, 2, sel, "h0refs",
                                      Rng(5, "batch"), Rng(5, "refs"), false);
  StageResult plain = train_stage(init, src, nullptr, cfg, 0, sel, "h0plain",
                                  Rng(5, "batch"), Rng(5, "refs"), false);
  CHECK(with_refs.param_digests == plain.param_digests);
  for (const CorrectionSummary& c : with_refs.corrections) CHECK_FALSE(c.gate_triggered);
}

TEST_CASE("train_stage: correction log covers every iteration and gate rate is consistent") {
  Dataset src = tiny_dataset(20, 11);
  Dataset tgt = tiny_dataset(6, 12, DomainKind::webpage_like, 2, DomainTag::target);
  ModelState init = tiny_model(3);
  TrainConfig cfg = fast_train(2);
  cfg.correction.epsilon = 1.0;  // cos < 1 almost surely: trigger everywhere
  ReferenceSet refs{&tgt, {0, 1, 2}};
  StageResult res = train_stage(init, src, &refs, cfg, 2, subset(src, {0}), "always",
                                Rng(8, "batch"), Rng(8, "refs"), false);
  CHECK(res.corrections.size() == 2 * 2);
  int fired = 0;
  for (const CorrectionSummary& c : res.corrections) fired += c.gate_triggered;
  CHECK(res.gate_rate == doctest::Approx(static_cast<double>(fired) /
                                         static_cast<double>(res.corrections.size())));
  CHECK(fired == static_cast<int>(res.corrections.size()));
}

TEST_CASE("finetune_stage: trains on the references with batches of min(10, n)") {
  Dataset tgt = tiny_dataset(8, 13, DomainKind::webpage_like, 2, DomainTag::target);
  ModelState init = tiny_model(15);
  ReferenceSet refs{&tgt, {2, 3, 5}};
  TrainConfig cfg = fast_train(2);
  StageResult res = finetune_stage(init, refs, cfg, "ft", Rng(4, "ft_batch"), false);
  CHECK(res.per_epoch.size() == 2);
  CHECK(res.corrections.empty());
  CHECK(res.best_epoch >= 0);
  CHECK(res.final_state.flatten_params() != init.flatten_params());
}

TEST_CASE("checkpoint save/load/continue equals continue-without-save") {
  Dataset src = tiny_dataset(14, 17);
  Dataset tgt = tiny_dataset(6, 18, DomainKind::webpage_like, 2, DomainTag::target);
  ModelState init = tiny_model(29);
  TrainConfig cfg = fast_train(2);
  StageResult tr = train_stage(init, src, nullptr, cfg, 0, subset(src, {0, 1}), "tr",
                               Rng(2, "batch"), Rng(2, "refs"), false);

  ReferenceSet refs{&tgt, {0, 1, 4}};
  StageResult direct = finetune_stage(tr.checkpoint, refs, cfg, "ft", Rng(6, "ft_batch"), false);

  const char* path = "tmp_chain.salc";
  save_checkpoint(path, tr.checkpoint);
  ModelState loaded = load_checkpoint(path);
  StageResult replayed = finetune_stage(loaded, refs, cfg, "ft", Rng(6, "ft_batch"), false);
  std::remove(path);

  CHECK(direct.param_digests == replayed.param_digests);
  CHECK(direct.checkpoint.flatten_params() == replayed.checkpoint.flatten_params());
}

TEST_CASE("evaluate_model: does not mutate the model and averages per-image scores") {
  Dataset d = tiny_dataset(5, 19);
  ModelState m = tiny_model(31);
  const std::vector<float> before = m.flatten_params();
  const MetricTriple avg = evaluate_model(m, d);
  CHECK(m.flatten_params() == before);

  const std::vector<MetricTriple> per = evaluate_per_image(m, d);
  REQUIRE(per.size() == 5);
  double nss_sum = 0.0;
  for (const MetricTriple& t : per) nss_sum += t.nss;
  CHECK(avg.nss == doctest::Approx(nss_sum / 5.0).epsilon(1e-12));
}

TEST_CASE("eub_protocol: averages three held-out folds") {
  ExperimentConfig cfg = parse_config(
      "source_count = 12\ntarget_count = 9\neval_count = 3\nn = 3\n"
      "height = 10\nwidth = 10\nchannels = 2\nfixations_per_image = 5\n"
      "hidden_channels = 4\nepochs = 1\nrepeats = 1\n");
  Dataset src = generate_dataset(cfg.source_spec, 12, 100, DomainTag::source);
  Dataset tgt = generate_dataset(cfg.target_spec, 9, 101, DomainTag::target);
  const MetricTriple a = eub_protocol(src, tgt, cfg, 7, false);
  const MetricTriple b = eub_protocol(src, tgt, cfg, 7, false);
  CHECK(a.nss == b.nss);
  CHECK(a.auc == b.auc);
  CHECK(a.cc == b.cc);
  CHECK(std::isfinite(a.nss));
  CHECK(a.auc >= 0.0);
  CHECK(a.auc <= 1.0);
  Dataset two = tiny_dataset(2, 1);
  CHECK_THROWS_AS(eub_protocol(src, two, cfg, 7, false), std::invalid_argument);
}

TEST_CASE("run_experiment: deterministic records with derived seeds") {
  const std::string cfg_text =
      "source_count = 24\ntarget_count = 9\neval_count = 6\nn = 3\n"
      "height = 10\nwidth = 10\nchannels = 2\nfixations_per_image = 5\n"
      "hidden_channels = 4\nepochs = 2\nrepeats = 2\nbase_seed = 11\n"
      "procedures = tr,ft,ft_wo_tr\n";
  ExperimentConfig cfg = parse_config(cfg_text);
  const std::vector<RunRecord> a = run_experiment(cfg, false);
  const std::vector<RunRecord> b = run_experiment(cfg, false);
  CHECK(records_to_csv(a) == records_to_csv(b));
  REQUIRE(a.size() == 6);  // 3 procedures x 2 repeats
  std::set<uint64_t> seeds;
  for (const RunRecord& r : a) {
    seeds.insert(r.seed);
    CHECK(r.n == 3);
    CHECK(std::isfinite(r.metrics.nss));
  }
  CHECK(seeds == std::set<uint64_t>{11, 12});
}

TEST_CASE("run_experiment: n = 0 rows fall back to the plain procedure tags") {
  ExperimentConfig cfg = parse_config(
      "source_count = 12\ntarget_count = 6\neval_count = 6\nn = 0\n"
      "height = 10\nwidth = 10\nchannels = 2\nfixations_per_image = 5\n"
      "hidden_channels = 4\nepochs = 1\nrepeats = 1\n"
      "procedures = tr_ref,ft_ref\n");
  const std::vector<RunRecord> recs = run_experiment(cfg, false);
  REQUIRE(recs.size() == 2);
  CHECK(recs[0].procedure == "tr");
  CHECK(recs[1].procedure == "ft");
  // with nothing to fine-tune on, the FT row reports the TR checkpoint
  CHECK(recs[0].metrics.nss == recs[1].metrics.nss);
}

TEST_CASE("run_experiment: checkpoint sink sees one model per procedure and run") {
  ExperimentConfig cfg = parse_config(
      "source_count = 12\ntarget_count = 9\neval_count = 6\nn = 3\n"
      "height = 10\nwidth = 10\nchannels = 2\nfixations_per_image = 5\n"
      "hidden_channels = 4\nepochs = 1\nrepeats = 2\nprocedures = tr,ft\n");
  std::vector<std::string> tags;
  run_experiment(cfg, false, [&](const std::string& tag, const ModelState& m) {
    tags.push_back(tag);
    CHECK(m.param_count() > 0);
  });
  CHECK(tags == std::vector<std::string>{"tr", "ft", "tr", "ft"});
}
