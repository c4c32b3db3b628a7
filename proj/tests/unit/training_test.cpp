#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <sstream>

#include "support/toy.hpp"
#include "tuckert/checkpoint.hpp"
#include "tuckert/config.hpp"
#include "tuckert/errors.hpp"
#include "tuckert/expressivity.hpp"
#include "tuckert/grad_check.hpp"
#include "tuckert/trainer.hpp"

namespace tuckert {
namespace {

TrainConfig small_config() {
  TrainConfig c;
  c.dim = 8;
  c.batch_size = 32;
  c.epochs = 3;
  c.patience = 0;
  c.seed = 5;
  return c;
}

const QuadrupleDataset& toy_data() {
  static const QuadrupleDataset ds = [] {
    const auto s = toy::planted(12, 3, 16, 1);
    return build_dataset(s.train, s.valid, s.test);
  }();
  return ds;
}

TEST(Config, DefaultsAndJsonRoundTrip) {
  const TrainConfig d;
  EXPECT_EQ(d.kind, ModelKind::TuckERTNT);
  EXPECT_EQ(d.dim, 300u);
  EXPECT_EQ(d.batch_size, 1000u);
  EXPECT_DOUBLE_EQ(d.learning_rate, 0.2);
  EXPECT_DOUBLE_EQ(d.regularizer.lambda, 0.01);
  EXPECT_DOUBLE_EQ(d.regularizer.alpha, 0.002);

  TrainConfig c = small_config();
  c.train_path = "a/train.txt";
  c.binding = TimeBinding::Object;
  c.regularizer.kind = Regularizer::Frobenius;
  c.protocol = Protocol::Raw;
  const nlohmann::json j = c;
  const auto back = j.get<TrainConfig>();
  EXPECT_EQ(nlohmann::json(back), j);
  EXPECT_EQ(back.binding, TimeBinding::Object);
  EXPECT_EQ(back.train_path, c.train_path);
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
  EXPECT_THROW(nlohmann::json({{"dimension", 3}}).get<TrainConfig>(), ConfigError);
  EXPECT_THROW(nlohmann::json({{"dim", 0}}).get<TrainConfig>().validate(), ConfigError);
  EXPECT_THROW(nlohmann::json({{"model", "ComplEx"}}).get<TrainConfig>(), ConfigError);
  TrainConfig c;
  c.learning_rate = -1.0;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Config, ResolveDatasetDir) {
  const auto dir = toy::scratch_dir("resolve");
  std::filesystem::create_directories(dir / "mini");
  EXPECT_EQ(resolve_dataset_dir(dir / "mini"), dir / "mini");
  ::setenv(kDataDirEnv, dir.c_str(), 1);
  EXPECT_EQ(resolve_dataset_dir("mini"), dir / "mini");
  EXPECT_THROW(resolve_dataset_dir("absent"), DataError);
  ::unsetenv(kDataDirEnv);
}

TEST(Checkpoint, RoundTripIsBitwise) {
  Trainer trainer(small_config(), toy_data());
  trainer.run_epoch();
  const auto ckpt = trainer.checkpoint();
  const auto dir = toy::scratch_dir("ckpt");
  save_checkpoint(ckpt, dir);
  const auto back = load_checkpoint(dir);
  EXPECT_EQ(back.params, ckpt.params);
  EXPECT_EQ(back.optimizer, ckpt.optimizer);
  EXPECT_EQ(back.epoch, 1u);
  EXPECT_EQ(back.valid_mrr, ckpt.valid_mrr);
  EXPECT_EQ(nlohmann::json(back.config), nlohmann::json(ckpt.config));
  const auto again = toy::scratch_dir("ckpt2");
  save_checkpoint(back, again);
  EXPECT_EQ(toy::read_file(dir / "tensors.bin"), toy::read_file(again / "tensors.bin"));
  EXPECT_EQ(toy::read_file(dir / "manifest.json"), toy::read_file(again / "manifest.json"));
}

TEST(Checkpoint, DetectsTruncationAndMissingFiles) {
  Trainer trainer(small_config(), toy_data());
  const auto dir = toy::scratch_dir("ckpt_bad");
  save_checkpoint(trainer.checkpoint(), dir);
  const auto bytes = toy::read_file(dir / "tensors.bin");
  std::ofstream(dir / "tensors.bin", std::ios::binary | std::ios::trunc)
      .write(bytes.data(), static_cast<std::streamsize>(bytes.size() - 4));
  EXPECT_THROW(load_checkpoint(dir), DataError);
  EXPECT_THROW(load_checkpoint(dir / "nothing"), DataError);
}

TEST(Trainer, ResumeMatchesUninterruptedRun) {
  auto cfg = small_config();
  Trainer straight(cfg, toy_data());
  for (int i = 0; i < 3; ++i) straight.run_epoch();

  Trainer first(cfg, toy_data());
  first.run_epoch();
  first.run_epoch();
  const auto dir = toy::scratch_dir("resume");
  save_checkpoint(first.checkpoint(), dir);
  Trainer resumed(toy_data(), load_checkpoint(dir), first.best_params());
  resumed.run_epoch();
  EXPECT_EQ(resumed.epoch(), 3u);
  EXPECT_EQ(resumed.params(), straight.params());
  EXPECT_EQ(resumed.best_params(), straight.best_params());
  EXPECT_EQ(resumed.checkpoint().optimizer, straight.checkpoint().optimizer);
}

TEST(Trainer, DeterministicLogsAndCheckpoints) {
  auto cfg = small_config();
  cfg.epochs = 2;
  const auto a = toy::scratch_dir("det_a"), b = toy::scratch_dir("det_b");
  Trainer(cfg, toy_data()).train(a);
  Trainer(cfg, toy_data()).train(b);
  for (const char* f : {"metrics.jsonl", "report.json", "last/tensors.bin", "last/manifest.json",
                        "best/tensors.bin"}) {
    EXPECT_EQ(toy::read_file(a / f), toy::read_file(b / f)) << f;
  }
}

TEST(Trainer, TwoEntityToyWritesLogAndLoadableCheckpoint) {
  const auto ds = build_dataset(parse_tsv("A\tr\tB\t1\nB\tr\tA\t2\n"), parse_tsv("A\tr\tB\t2\n"),
                                parse_tsv("B\tr\tA\t1\n"));
  auto cfg = small_config();
  cfg.dim = 2;
  cfg.epochs = 2;
  const auto dir = toy::scratch_dir("two");
  std::ostringstream progress;
  const auto outcome = Trainer(cfg, ds).train(dir, &progress);
  EXPECT_EQ(outcome.epochs_run, 2u);
  std::istringstream log(toy::read_file(dir / "metrics.jsonl"));
  std::string line;
  std::size_t lines = 0;
  while (std::getline(log, line)) {
    const auto rec = nlohmann::json::parse(line);
    EXPECT_EQ(rec.at("epoch").get<std::size_t>(), ++lines);
    EXPECT_TRUE(std::isfinite(rec.at("total").get<double>()));
  }
  EXPECT_EQ(lines, 2u);
  const auto ckpt = load_checkpoint(dir / "last");
  EXPECT_EQ(ckpt.epoch, 2u);
  EXPECT_EQ(ckpt.params.shape.entities, 2u);
  EXPECT_EQ(outcome.test.query_count, 2u);
}

TEST(Trainer, EvaluateAfterTrainMatchesReport) {
  auto cfg = small_config();
  cfg.epochs = 2;
  const auto dir = toy::scratch_dir("report");
  const auto outcome = Trainer(cfg, toy_data()).train(dir);
  const auto best = load_checkpoint(dir / "best");
  const auto report =
      evaluate(best.params, toy_data().test, toy_data(), cfg.binding, Protocol::Filtered);
  EXPECT_EQ(report.mrr, outcome.test.mrr);
  const auto saved = nlohmann::json::parse(toy::read_file(dir / "report.json"));
  EXPECT_DOUBLE_EQ(saved.at("test").at("mrr").get<double>(), outcome.test.mrr);
  const auto raw = evaluate(best.params, toy_data().test, toy_data(), cfg.binding, Protocol::Raw);
  EXPECT_GE(report.mrr, raw.mrr);
}

TEST(Trainer, EarlyStoppingHonoursPatience) {
  auto cfg = small_config();
  cfg.learning_rate = 1e-9;  // validation MRR cannot move after the first epoch
  cfg.epochs = 20;
  cfg.patience = 2;
  Trainer trainer(cfg, toy_data());
  const auto outcome = trainer.train();
  EXPECT_TRUE(outcome.stopped_early);
  EXPECT_LT(outcome.epochs_run, 20u);
  EXPECT_EQ(outcome.epochs_run, outcome.best_epoch + cfg.patience);
}

TEST(Trainer, VocabularyMismatchIsNamed) {
  Trainer trainer(small_config(), toy_data());
  const auto dir = toy::scratch_dir("mismatch");
  save_checkpoint(trainer.checkpoint(), dir);
  const auto other = build_dataset(parse_tsv("A\tr\tB\t1\n"), parse_tsv("A\tr\tB\t1\n"),
                                   parse_tsv("A\tr\tB\t1\n"));
  try {
    Trainer(other, load_checkpoint(dir));
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("entity"), std::string::npos) << e.what();
  }
}

// Held-out facts lie inside planted time windows; a trained model should
// rank them far above chance (random filtered MRR is about 0.13 with 30 entities).
TEST(Trainer, LearnsPlantedTemporalFacts) {
  const auto s = toy::planted(30, 4, 24, 9);
  const auto ds = build_dataset(s.train, s.valid, s.test);
  TrainConfig cfg;
  cfg.dim = 16;
  cfg.batch_size = 64;
  cfg.epochs = 40;
  cfg.patience = 0;
  cfg.learning_rate = 0.1;
  cfg.seed = 3;
  Trainer trainer(cfg, ds);
  const auto outcome = trainer.train();
  EXPECT_GT(outcome.test.mrr, 0.9) << "valid " << outcome.best_valid_mrr;
}

TEST(GradCheck, PassesOnAllVariants) {
  const auto r = run_grad_check(GradCheckOptions{});
  EXPECT_TRUE(r.passed) << r.max_rel_error;
  EXPECT_EQ(r.cases.size(), 30u);
  EXPECT_LT(r.max_rel_error, 1e-5);
}

TEST(GradCheck, UnregularizedPasses) {
  GradCheckOptions o;
  o.alpha = 0.0;
  o.lambda = 0.0;
  o.regularizers = {Regularizer::None, Regularizer::LpWithCore};
  EXPECT_TRUE(run_grad_check(o).passed);
}

TEST(GradCheck, CorruptedGradientFails) {
  GradCheckOptions o;
  o.corrupt = true;
  o.kinds = {ModelKind::TuckERT};
  o.bindings = {TimeBinding::Predicate};
  o.regularizers = {Regularizer::None};
  const auto r = run_grad_check(o);
  EXPECT_FALSE(r.passed);
  EXPECT_GT(r.max_rel_error, 1e-3);
}

TEST(Expressivity, RandomAllAndNoneAssignments) {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const auto r = run_expressivity_check(TruthTable::random(3, 2, 3, seed));
    EXPECT_TRUE(r.passed);
    EXPECT_EQ(r.separated, r.facts);
    EXPECT_EQ(r.ranking.mrr, 1.0);
  }
  const auto all = run_expressivity_check(TruthTable::constant(3, 2, 3, true));
  EXPECT_TRUE(all.passed);
  EXPECT_EQ(all.true_facts, 54u);
  const auto none = run_expressivity_check(TruthTable::constant(3, 2, 3, false));
  EXPECT_TRUE(none.passed);
  EXPECT_EQ(none.true_facts, 0u);
  EXPECT_EQ(none.ranking.query_count, 0u);
}

TEST(Expressivity, ContractPicksOneEntry) {
  const auto truth = TruthTable::random(2, 1, 2, 4);
  const Order4Core m(truth);
  std::vector<double> es{0, 1}, er{1, 0}, eo{1, 0}, et{0, 1};
  EXPECT_EQ(m.contract(es, er, eo, et), truth(1, 0, 0, 1) ? 1.0 : -1.0);
  EXPECT_EQ(m(0, 1, 1, 1), m(1, 0, 0, 1));  // reciprocal slot mirrors the raw one
}

}  // namespace
}  // namespace tuckert
