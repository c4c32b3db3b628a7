#include "tuckert/trainer.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>

#include "tuckert/errors.hpp"

namespace tuckert {

nlohmann::json to_json(const RankingReport& r) {
  return {{"protocol", std::string(to_string(r.protocol))},
          {"queries", r.query_count},
          {"mrr", r.mrr},
          {"hits@1", r.hits1},
          {"hits@3", r.hits3},
          {"hits@10", r.hits10}};
}

nlohmann::json to_json(const EpochRecord& rec) {
  return {{"epoch", rec.epoch},
          {"data_loss", rec.loss.data_loss},
          {"time_reg", rec.loss.time_reg},
          {"emb_reg", rec.loss.emb_reg},
          {"total", rec.loss.total},
          {"valid", to_json(rec.valid)},
          {"improved", rec.improved}};
}

ModelShape model_shape(const TrainConfig& config, const QuadrupleDataset& dataset) {
  return ModelShape{dataset.num_entities(), dataset.num_relations(), dataset.num_timestamps(),
                    config.dim};
}

void check_vocab(const ModelShape& shape, const QuadrupleDataset& dataset) {
  auto check = [](const char* table, std::size_t model, std::size_t data) {
    if (model != data) {
      throw DataError(std::string("vocabulary mismatch in ") + table + " table: checkpoint has " +
                      std::to_string(model) + ", dataset has " + std::to_string(data));
    }
  };
  check("entity", shape.entities, dataset.num_entities());
  check("predicate", shape.relations, dataset.num_relations());
  check("timestamp", shape.timestamps, dataset.num_timestamps());
}

Trainer::Trainer(TrainConfig config, const QuadrupleDataset& dataset)
    : config_(std::move(config)),
      dataset_(dataset),
      last_valid_mrr_(std::numeric_limits<double>::quiet_NaN()) {
  config_.validate();
  params_ = init_params<float>(model_shape(config_, dataset_), config_.kind, config_.seed);
  best_params_ = params_;
  optimizer_ = AdagradState<float>::create(params_, AdagradOptions{config_.learning_rate});
  grads_ = Gradients::zeros_like(params_);
}

Trainer::Trainer(const QuadrupleDataset& dataset, Checkpoint resume,
                 std::optional<ModelParams<float>> best)
    : config_(std::move(resume.config)),
      dataset_(dataset),
      params_(std::move(resume.params)),
      optimizer_(std::move(resume.optimizer)),
      epoch_(resume.epoch),
      last_valid_mrr_(resume.valid_mrr),
      best_valid_mrr_(resume.best_valid_mrr),
      best_epoch_(resume.best_epoch),
      stale_epochs_(resume.stale_epochs) {
  config_.validate();
  check_vocab(params_.shape, dataset_);
  best_params_ = best ? std::move(*best) : params_;
  if (best_params_.shape != params_.shape || best_params_.kind != params_.kind) {
    throw DataError("best parameters do not match the resumed model");
  }
  grads_ = Gradients::zeros_like(params_);
}

EpochRecord Trainer::run_epoch() {
  const BatchSchedule schedule(dataset_.train, config_.batch_size, epoch_seed(config_.seed, epoch_));
  EpochRecord rec;
  const std::size_t batches = schedule.num_batches();
  for (std::size_t b = 0; b < batches; ++b) {
    const auto report = batch_objective(params_, schedule.batch(b), config_.binding,
                                        config_.regularizer, grads_, config_.threads);
    adagrad_step(params_, grads_, optimizer_);
    rec.loss.data_loss += report.data_loss;
    rec.loss.time_reg += report.time_reg;
    rec.loss.emb_reg += report.emb_reg;
    rec.loss.total += report.total;
  }
  const double inv = 1.0 / static_cast<double>(batches);
  rec.loss.data_loss *= inv;
  rec.loss.time_reg *= inv;
  rec.loss.emb_reg *= inv;
  rec.loss.total *= inv;

  ++epoch_;
  rec.epoch = epoch_;
  rec.valid = evaluate(params_, dataset_.valid, dataset_, config_.binding, config_.protocol,
                       config_.threads);
  last_valid_mrr_ = rec.valid.mrr;
  if (rec.valid.mrr > best_valid_mrr_) {
    best_valid_mrr_ = rec.valid.mrr;
    best_epoch_ = epoch_;
    best_params_ = params_;
    stale_epochs_ = 0;
    rec.improved = true;
  } else {
    ++stale_epochs_;
  }
  return rec;
}

bool Trainer::should_stop() const {
  return epoch_ >= config_.epochs || (config_.patience > 0 && stale_epochs_ >= config_.patience);
}

Checkpoint Trainer::checkpoint() const {
  Checkpoint c;
  c.config = config_;
  c.epoch = epoch_;
  c.valid_mrr = last_valid_mrr_;
  c.best_valid_mrr = best_valid_mrr_;
  c.best_epoch = best_epoch_;
  c.stale_epochs = stale_epochs_;
  c.params = params_;
  c.optimizer = optimizer_;
  return c;
}

TrainOutcome Trainer::train(const std::optional<std::filesystem::path>& out_dir,
                            std::ostream* progress) {
  std::ofstream metrics;
  if (out_dir) {
    std::filesystem::create_directories(*out_dir);
    metrics.open(*out_dir / "metrics.jsonl", epoch_ == 0 ? std::ios::trunc : std::ios::app);
    if (!metrics) throw DataError("cannot write " + (*out_dir / "metrics.jsonl").string());
  }

  TrainOutcome outcome;
  while (!should_stop()) {
    const auto started = std::chrono::steady_clock::now();
    const EpochRecord rec = run_epoch();
    ++outcome.epochs_run;
    if (out_dir) {
      metrics << to_json(rec).dump() << '\n' << std::flush;
      save_checkpoint(checkpoint(), *out_dir / "last");
      if (rec.improved) {
        Checkpoint best = checkpoint();
        save_checkpoint(best, *out_dir / "best");
      }
    }
    if (progress) {
      const std::chrono::duration<double> took = std::chrono::steady_clock::now() - started;
      *progress << "epoch " << rec.epoch << "  loss " << rec.loss.total << " (data "
                << rec.loss.data_loss << ")  valid mrr " << rec.valid.mrr << "  ["
                << took.count() << " s]\n";
    }
  }

  outcome.best_epoch = best_epoch_;
  outcome.best_valid_mrr = best_valid_mrr_;
  outcome.stopped_early = epoch_ < config_.epochs;
  outcome.test = evaluate(best_params_, dataset_.test, dataset_, config_.binding,
                          config_.protocol, config_.threads);
  if (out_dir) {
    nlohmann::json report{{"best_epoch", outcome.best_epoch},
                          {"best_valid_mrr", outcome.best_valid_mrr},
                          {"epochs", epoch_},
                          {"test", to_json(outcome.test)}};
    std::ofstream out(*out_dir / "report.json", std::ios::trunc);
    out << report.dump(2) << '\n';
  }
  return outcome;
}

}  // namespace tuckert
