#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>

#include "tuckert/checkpoint.hpp"
#include "tuckert/config.hpp"
#include "tuckert/data.hpp"
#include "tuckert/eval.hpp"

namespace tuckert {

struct EpochRecord {
  std::size_t epoch = 0;
  BatchLossReport loss;  ///< Means over the epoch's batches.
  RankingReport valid;
  bool improved = false;
};

nlohmann::json to_json(const EpochRecord& record);
nlohmann::json to_json(const RankingReport& report);

struct TrainOutcome {
  std::size_t epochs_run = 0;
  std::size_t best_epoch = 0;
  double best_valid_mrr = 0.0;
  bool stopped_early = false;
  RankingReport test;  ///< Evaluated with the best parameters.
};

/// Mini-batch Adagrad training with per-epoch validation and early stopping
/// on validation MRR (filtered, unless the config asks for raw).
class Trainer {
 public:
  Trainer(TrainConfig config, const QuadrupleDataset& dataset);
  /// Continues a run from `resume`; the dataset must match its vocabulary.
  /// `best` restores the best-so-far parameters; without it the resumed
  /// parameters stand in for them.
  Trainer(const QuadrupleDataset& dataset, Checkpoint resume,
          std::optional<ModelParams<float>> best = std::nullopt);

  /// Trains one epoch, evaluates on the validation split and updates the
  /// early-stopping bookkeeping.
  EpochRecord run_epoch();

  /// Runs until `config.epochs` epochs are done or patience runs out. When
  /// `out_dir` is given, writes `metrics.jsonl`, `last/`, `best/` and
  /// `report.json` there.
  TrainOutcome train(const std::optional<std::filesystem::path>& out_dir = std::nullopt,
                     std::ostream* progress = nullptr);

  bool should_stop() const;
  Checkpoint checkpoint() const;
  const ModelParams<float>& params() const noexcept { return params_; }
  const ModelParams<float>& best_params() const noexcept { return best_params_; }
  const TrainConfig& config() const noexcept { return config_; }
  std::size_t epoch() const noexcept { return epoch_; }

 private:
  TrainConfig config_;
  const QuadrupleDataset& dataset_;
  ModelParams<float> params_;
  ModelParams<float> best_params_;
  AdagradState<float> optimizer_;
  Gradients grads_;
  std::size_t epoch_ = 0;
  double last_valid_mrr_;
  double best_valid_mrr_ = -1.0;
  std::size_t best_epoch_ = 0;
  std::size_t stale_epochs_ = 0;
};

/// Shape of the model a config would build for a dataset.
ModelShape model_shape(const TrainConfig& config, const QuadrupleDataset& dataset);

/// Throws DataError naming the first vocabulary table whose size differs.
void check_vocab(const ModelShape& shape, const QuadrupleDataset& dataset);

}  // namespace tuckert
