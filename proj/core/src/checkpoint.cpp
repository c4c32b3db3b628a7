#include "tuckert/checkpoint.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "tuckert/errors.hpp"

namespace tuckert {
namespace {

struct ArrayRef {
  std::string name;
  std::vector<std::size_t> shape;
  std::span<float> values;
};

std::vector<ArrayRef> arrays_of(ModelParams<float>& params, ModelParams<float>& acc) {
  std::vector<ArrayRef> out;
  auto add_matrix = [&](const std::string& name, DenseMatrix<float>& m) {
    if (m.empty()) return;
    out.push_back({name, {m.rows(), m.cols()}, m.values()});
  };
  auto add_all = [&](const std::string& prefix, ModelParams<float>& p) {
    add_matrix(prefix + "entities", p.entities);
    add_matrix(prefix + "pred_temporal", p.pred_temporal);
    add_matrix(prefix + "pred_static", p.pred_static);
    add_matrix(prefix + "times", p.times);
    const auto& d = p.core.dims();
    out.push_back({prefix + "core", {d[0], d[1], d[2]}, p.core.values()});
  };
  add_all("", params);
  add_all("adagrad.", acc);
  return out;
}

void write_le(std::ofstream& out, std::span<const float> values) {
  std::vector<std::uint32_t> words(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::uint32_t w = std::bit_cast<std::uint32_t>(values[i]);
    if constexpr (std::endian::native == std::endian::big) {
      w = ((w & 0xFFu) << 24) | ((w & 0xFF00u) << 8) | ((w >> 8) & 0xFF00u) | (w >> 24);
    }
    words[i] = w;
  }
  out.write(reinterpret_cast<const char*>(words.data()),
            static_cast<std::streamsize>(words.size() * sizeof(std::uint32_t)));
}

void read_le(std::ifstream& in, std::span<float> values, const std::string& name) {
  std::vector<std::uint32_t> words(values.size());
  in.read(reinterpret_cast<char*>(words.data()),
          static_cast<std::streamsize>(words.size() * sizeof(std::uint32_t)));
  if (!in) throw DataError("checkpoint: truncated array '" + name + "'");
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::uint32_t w = words[i];
    if constexpr (std::endian::native == std::endian::big) {
      w = ((w & 0xFFu) << 24) | ((w & 0xFF00u) << 8) | ((w >> 8) & 0xFF00u) | (w >> 24);
    }
    values[i] = std::bit_cast<float>(w);
  }
}

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  // arrays_of needs mutable spans; the copy keeps the interface const.
  Checkpoint copy = ckpt;
  const auto arrays = arrays_of(copy.params, copy.optimizer.accumulators);

  nlohmann::json manifest;
  manifest["format_version"] = kCheckpointFormatVersion;
  manifest["config"] = ckpt.config;
  manifest["vocab"] = {{"entities", ckpt.params.shape.entities},
                       {"relations", ckpt.params.shape.relations},
                       {"timestamps", ckpt.params.shape.timestamps}};
  manifest["dim"] = ckpt.params.shape.dim;
  manifest["model"] = std::string(to_string(ckpt.params.kind));
  manifest["epoch"] = ckpt.epoch;
  manifest["valid_mrr"] = std::isnan(ckpt.valid_mrr) ? nlohmann::json(nullptr)
                                                     : nlohmann::json(ckpt.valid_mrr);
  manifest["best_valid_mrr"] = ckpt.best_valid_mrr;
  manifest["best_epoch"] = ckpt.best_epoch;
  manifest["stale_epochs"] = ckpt.stale_epochs;
  manifest["adagrad"] = {{"learning_rate", ckpt.optimizer.options.learning_rate},
                         {"epsilon", ckpt.optimizer.options.epsilon},
                         {"initial_accumulator", ckpt.optimizer.options.initial_accumulator}};
  manifest["dtype"] = "float32-le";
  auto& list = manifest["arrays"] = nlohmann::json::array();
  std::size_t offset = 0;
  for (const auto& a : arrays) {
    list.push_back({{"name", a.name}, {"shape", a.shape}, {"offset", offset}});
    offset += a.values.size();
  }

  {
    std::ofstream bin(dir / "tensors.bin", std::ios::binary | std::ios::trunc);
    if (!bin) throw DataError("cannot write " + (dir / "tensors.bin").string());
    for (const auto& a : arrays) write_le(bin, a.values);
    if (!bin) throw DataError("write failed for " + (dir / "tensors.bin").string());
  }
  std::ofstream out(dir / "manifest.json", std::ios::trunc);
  if (!out) throw DataError("cannot write " + (dir / "manifest.json").string());
  out << manifest.dump(2) << '\n';
}

Checkpoint load_checkpoint(const std::filesystem::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in) throw DataError("cannot open " + (dir / "manifest.json").string());
  nlohmann::json manifest;
  try {
    in >> manifest;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("checkpoint manifest: ") + e.what());
  }
  try {
    if (manifest.at("format_version").get<int>() != kCheckpointFormatVersion) {
      throw DataError("checkpoint: unsupported format version");
    }
    Checkpoint ckpt;
    ckpt.config = manifest.at("config").get<TrainConfig>();
    ModelShape shape;
    shape.entities = manifest.at("vocab").at("entities").get<std::size_t>();
    shape.relations = manifest.at("vocab").at("relations").get<std::size_t>();
    shape.timestamps = manifest.at("vocab").at("timestamps").get<std::size_t>();
    shape.dim = manifest.at("dim").get<std::size_t>();
    const ModelKind kind = parse_model_kind(manifest.at("model").get<std::string>());
    ckpt.epoch = manifest.at("epoch").get<std::size_t>();
    const auto& vm = manifest.at("valid_mrr");
    ckpt.valid_mrr = vm.is_null() ? std::numeric_limits<double>::quiet_NaN() : vm.get<double>();
    ckpt.best_valid_mrr = manifest.at("best_valid_mrr").get<double>();
    ckpt.best_epoch = manifest.at("best_epoch").get<std::size_t>();
    ckpt.stale_epochs = manifest.at("stale_epochs").get<std::size_t>();

    AdagradOptions opt;
    opt.learning_rate = manifest.at("adagrad").at("learning_rate").get<double>();
    opt.epsilon = manifest.at("adagrad").at("epsilon").get<double>();
    opt.initial_accumulator = manifest.at("adagrad").at("initial_accumulator").get<double>();

    ckpt.params = ModelParams<float>::zeros(shape, kind);
    ckpt.optimizer = AdagradState<float>::create(ckpt.params, opt);
    auto arrays = arrays_of(ckpt.params, ckpt.optimizer.accumulators);
    const auto& listed = manifest.at("arrays");
    if (listed.size() != arrays.size()) throw DataError("checkpoint: array count mismatch");

    std::ifstream bin(dir / "tensors.bin", std::ios::binary);
    if (!bin) throw DataError("cannot open " + (dir / "tensors.bin").string());
    for (std::size_t i = 0; i < arrays.size(); ++i) {
      const auto& entry = listed.at(i);
      if (entry.at("name").get<std::string>() != arrays[i].name ||
          entry.at("shape").get<std::vector<std::size_t>>() != arrays[i].shape) {
        throw DataError("checkpoint: unexpected array '" + entry.at("name").get<std::string>() +
                        "' at position " + std::to_string(i));
      }
      read_le(bin, arrays[i].values, arrays[i].name);
    }
    if (bin.peek() != std::char_traits<char>::eof()) {
      throw DataError("checkpoint: trailing bytes in tensors.bin");
    }
    return ckpt;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("checkpoint manifest: ") + e.what());
  }
}

}  // namespace tuckert
