#pragma once

#include <cstdint>
#include <filesystem>
#include <nlohmann/json.hpp>

#include "tuckert/eval.hpp"
#include "tuckert/model.hpp"
#include "tuckert/objective.hpp"

namespace tuckert {

/// Every knob of a training run. Defaults are the standard ICEWS settings.
struct TrainConfig {
  std::filesystem::path train_path;
  std::filesystem::path valid_path;
  std::filesystem::path test_path;

  ModelKind kind = ModelKind::TuckERTNT;
  TimeBinding binding = TimeBinding::Predicate;
  std::size_t dim = 300;
  std::size_t batch_size = 1000;
  double learning_rate = 0.2;
  RegularizerChoice regularizer;  ///< lambda 0.01, alpha 0.002, p 4, q 2, k 1, l_p with core.
  std::size_t epochs = 50;
  std::size_t patience = 10;
  std::uint64_t seed = 0;
  Protocol protocol = Protocol::Filtered;
  int threads = 1;

  /// Throws ConfigError for out-of-range values.
  void validate() const;
};

void to_json(nlohmann::json& j, const TrainConfig& c);
/// Missing keys keep their defaults; unknown keys are rejected.
void from_json(const nlohmann::json& j, TrainConfig& c);

TrainConfig load_config(const std::filesystem::path& path);

/// Name of the environment variable consulted for a default data directory.
inline constexpr const char* kDataDirEnv = "TUCKERT_DATA_DIR";

/// `name` itself when it is an existing directory, otherwise
/// `$TUCKERT_DATA_DIR/name` when that exists; throws DataError otherwise.
std::filesystem::path resolve_dataset_dir(const std::filesystem::path& name);

}  // namespace tuckert
