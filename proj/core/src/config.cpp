#include "tuckert/config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>

#include "tuckert/errors.hpp"

namespace tuckert {

void TrainConfig::validate() const {
  auto require = [](bool ok, const char* msg) {
    if (!ok) throw ConfigError(msg);
  };
  require(dim >= 1, "dim must be >= 1");
  require(batch_size >= 1, "batch_size must be >= 1");
  require(std::isfinite(learning_rate) && learning_rate > 0.0, "learning_rate must be > 0");
  require(epochs >= 1, "epochs must be >= 1");
  require(threads >= 1, "threads must be >= 1");
  regularizer.validate();
}

void to_json(nlohmann::json& j, const TrainConfig& c) {
  j = nlohmann::json{
      {"train", c.train_path.string()},
      {"valid", c.valid_path.string()},
      {"test", c.test_path.string()},
      {"model", std::string(to_string(c.kind))},
      {"binding", std::string(to_string(c.binding))},
      {"dim", c.dim},
      {"batch_size", c.batch_size},
      {"learning_rate", c.learning_rate},
      {"regularizer", std::string(to_string(c.regularizer.kind))},
      {"alpha", c.regularizer.alpha},
      {"lambda", c.regularizer.lambda},
      {"p", c.regularizer.p},
      {"q", c.regularizer.q},
      {"k", c.regularizer.k},
      {"epochs", c.epochs},
      {"patience", c.patience},
      {"seed", c.seed},
      {"protocol", std::string(to_string(c.protocol))},
      {"threads", c.threads},
  };
}

void from_json(const nlohmann::json& j, TrainConfig& c) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  static const std::set<std::string> known{
      "train", "valid", "test",  "model", "binding", "dim",    "batch_size",
      "learning_rate", "regularizer", "alpha", "lambda", "p", "q", "k",
      "epochs", "patience", "seed", "protocol", "threads"};
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) throw ConfigError("unknown config key '" + key + "'");
  }
  try {
    auto path = [&](const char* key, std::filesystem::path& out) {
      if (j.contains(key)) out = j.at(key).get<std::string>();
    };
    path("train", c.train_path);
    path("valid", c.valid_path);
    path("test", c.test_path);
    if (j.contains("model")) c.kind = parse_model_kind(j.at("model").get<std::string>());
    if (j.contains("binding")) c.binding = parse_time_binding(j.at("binding").get<std::string>());
    if (j.contains("regularizer")) {
      c.regularizer.kind = parse_regularizer(j.at("regularizer").get<std::string>());
    }
    if (j.contains("protocol")) c.protocol = parse_protocol(j.at("protocol").get<std::string>());
    auto number = [&](const char* key, auto& out) {
      if (j.contains(key)) j.at(key).get_to(out);
    };
    number("dim", c.dim);
    number("batch_size", c.batch_size);
    number("learning_rate", c.learning_rate);
    number("alpha", c.regularizer.alpha);
    number("lambda", c.regularizer.lambda);
    number("p", c.regularizer.p);
    number("q", c.regularizer.q);
    number("k", c.regularizer.k);
    number("epochs", c.epochs);
    number("patience", c.patience);
    number("seed", c.seed);
    number("threads", c.threads);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  }
}

TrainConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  TrainConfig c = j.get<TrainConfig>();
  c.validate();
  return c;
}

std::filesystem::path resolve_dataset_dir(const std::filesystem::path& name) {
  if (std::filesystem::is_directory(name)) return name;
  if (const char* root = std::getenv(kDataDirEnv); root != nullptr && *root != '\0') {
    const auto candidate = std::filesystem::path(root) / name;
    if (std::filesystem::is_directory(candidate)) return candidate;
  }
  throw DataError("dataset directory '" + name.string() + "' not found (also looked under $" +
                  kDataDirEnv + ")");
}

}  // namespace tuckert
