#pragma once

#include <cstddef>
#include <filesystem>
#include <limits>

#include "tuckert/config.hpp"
#include "tuckert/model.hpp"
#include "tuckert/optimizer.hpp"

namespace tuckert {

inline constexpr int kCheckpointFormatVersion = 1;

/// Resumable training state. On disk: `manifest.json` plus `tensors.bin`,
/// the latter holding little-endian float32 arrays in manifest order.
struct Checkpoint {
  TrainConfig config;
  std::size_t epoch = 0;  ///< Epochs completed.
  double valid_mrr = std::numeric_limits<double>::quiet_NaN();
  double best_valid_mrr = -1.0;
  std::size_t best_epoch = 0;
  std::size_t stale_epochs = 0;  ///< Epochs since the last validation improvement.
  ModelParams<float> params;
  AdagradState<float> optimizer;
};

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& dir);
Checkpoint load_checkpoint(const std::filesystem::path& dir);

}  // namespace tuckert
