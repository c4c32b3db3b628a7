#include "tuckert/model.hpp"

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "tuckert/errors.hpp"

namespace tuckert {

std::string_view to_string(ModelKind kind) {
  return kind == ModelKind::TuckERT ? "TuckERT" : "TuckERTNT";
}

std::string_view to_string(TimeBinding binding) {
  switch (binding) {
    case TimeBinding::Subject: return "subject";
    case TimeBinding::Predicate: return "predicate";
    case TimeBinding::Object: return "object";
  }
  return "predicate";
}

ModelKind parse_model_kind(std::string_view text) {
  if (text == "TuckERT" || text == "tuckert") return ModelKind::TuckERT;
  if (text == "TuckERTNT" || text == "tuckertnt") return ModelKind::TuckERTNT;
  throw ConfigError("unknown model kind '" + std::string(text) + "'");
}

TimeBinding parse_time_binding(std::string_view text) {
  if (text == "subject") return TimeBinding::Subject;
  if (text == "predicate") return TimeBinding::Predicate;
  if (text == "object") return TimeBinding::Object;
  throw ConfigError("unknown time binding '" + std::string(text) + "'");
}

std::uint64_t parameter_count(const ModelShape& shape, ModelKind kind) {
  const std::uint64_t d = shape.dim;
  const std::uint64_t pred_rows = (kind == ModelKind::TuckERTNT ? 4 : 2) * shape.relations;
  return d * (shape.entities + shape.timestamps + pred_rows) + d * d * d;
}

template <class Real>
std::uint64_t ModelParams<Real>::parameter_count() const {
  return entities.size() + pred_temporal.size() + pred_static.size() + times.size() +
         core.size();
}

template <class Real>
bool ModelParams<Real>::all_finite() const {
  return tuckert::all_finite(entities.values()) && tuckert::all_finite(pred_temporal.values()) &&
         tuckert::all_finite(pred_static.values()) && tuckert::all_finite(times.values()) &&
         tuckert::all_finite(core.values());
}

template <class Real>
ModelParams<Real> ModelParams<Real>::zeros(const ModelShape& shape, ModelKind kind) {
  if (shape.entities == 0 || shape.relations == 0 || shape.timestamps == 0) {
    throw ConfigError("model needs at least one entity, predicate and timestamp");
  }
  if (shape.dim == 0) throw ConfigError("embedding dimension must be >= 1");
  ModelParams p;
  p.kind = kind;
  p.shape = shape;
  const std::size_t d = shape.dim;
  p.entities = DenseMatrix<Real>(shape.entities, d);
  p.pred_temporal = DenseMatrix<Real>(2 * shape.relations, d);
  if (kind == ModelKind::TuckERTNT) p.pred_static = DenseMatrix<Real>(2 * shape.relations, d);
  p.times = DenseMatrix<Real>(shape.timestamps, d);
  p.core = Core3Tensor<Real>(d);
  return p;
}

template <class Real>
ModelParams<Real> init_params(const ModelShape& shape, ModelKind kind, std::uint64_t seed) {
  auto p = ModelParams<Real>::zeros(shape, kind);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> embedding(0.0, 0.05);
  std::normal_distribution<double> core(0.0, 1.0 / static_cast<double>(shape.dim));
  auto fill = [&](std::span<Real> values, auto& dist) {
    for (auto& x : values) x = static_cast<Real>(dist(rng));
  };
  fill(p.entities.values(), embedding);
  fill(p.pred_temporal.values(), embedding);
  fill(p.pred_static.values(), embedding);
  fill(p.times.values(), embedding);
  fill(p.core.values(), core);
  return p;
}

template <class To, class From>
ModelParams<To> convert_params(const ModelParams<From>& params) {
  auto out = ModelParams<To>::zeros(params.shape, params.kind);
  auto copy = [](std::span<const From> src, std::span<To> dst) {
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] = static_cast<To>(src[i]);
  };
  copy(params.entities.values(), out.entities.values());
  copy(params.pred_temporal.values(), out.pred_temporal.values());
  copy(params.pred_static.values(), out.pred_static.values());
  copy(params.times.values(), out.times.values());
  copy(params.core.values(), out.core.values());
  return out;
}

namespace {

template <class Real>
void check_query(const ModelParams<Real>& p, std::size_t s, std::size_t r, std::size_t t) {
  auto fail = [](const char* what, std::size_t idx, std::size_t bound) {
    throw IndexError(std::string(what) + " index " + std::to_string(idx) + " out of range [0, " +
                     std::to_string(bound) + ")");
  };
  if (s >= p.entities.rows()) fail("entity", s, p.entities.rows());
  if (r >= p.pred_temporal.rows()) fail("predicate", r, p.pred_temporal.rows());
  if (t >= p.times.rows()) fail("timestamp", t, p.times.rows());
}

template <class Real>
std::vector<Real> hadamard(std::span<const Real> x, std::span<const Real> y) {
  std::vector<Real> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] * y[i];
  return out;
}

}  // namespace

template <class Real>
double score(const ModelParams<Real>& p, std::size_t s, std::size_t r, std::size_t o,
             std::size_t t, TimeBinding binding) {
  check_query(p, s, r, t);
  if (o >= p.entities.rows()) {
    throw IndexError("entity index " + std::to_string(o) + " out of range");
  }
  const auto es = p.entities.row(s);
  const auto eo = p.entities.row(o);
  const auto er = p.pred_temporal.row(r);
  const auto et = p.times.row(t);

  double total = 0.0;
  switch (binding) {
    case TimeBinding::Predicate: {
      auto b = hadamard(er, et);
      if (p.has_static()) {
        const auto rs = p.pred_static.row(r);
        for (std::size_t i = 0; i < b.size(); ++i) b[i] += rs[i];
      }
      return trilinear_form<Real>(p.core, es, b, eo);
    }
    case TimeBinding::Subject:
      total = trilinear_form<Real>(p.core, hadamard(es, et), er, eo);
      break;
    case TimeBinding::Object:
      total = trilinear_form<Real>(p.core, es, er, hadamard(eo, et));
      break;
  }
  if (p.has_static()) total += trilinear_form<Real>(p.core, es, p.pred_static.row(r), eo);
  return total;
}

template <class Real>
DenseVector score_objects(const ModelParams<Real>& p, std::size_t s, std::size_t r, std::size_t t,
                          TimeBinding binding) {
  check_query(p, s, r, t);
  const auto es = p.entities.row(s);
  const auto er = p.pred_temporal.row(r);
  const auto et = p.times.row(t);

  DenseVector scores;
  switch (binding) {
    case TimeBinding::Predicate: {
      auto b = hadamard(er, et);
      if (p.has_static()) {
        const auto rs = p.pred_static.row(r);
        for (std::size_t i = 0; i < b.size(); ++i) b[i] += rs[i];
      }
      return score_all_candidates<Real>(p.core, es, b, p.entities);
    }
    case TimeBinding::Subject:
      scores = score_all_candidates<Real>(p.core, hadamard(es, et), er, p.entities);
      break;
    case TimeBinding::Object: {
      DenseMatrix<Real> bound(p.entities.rows(), p.entities.cols());
      for (std::size_t n = 0; n < bound.rows(); ++n) {
        const auto src = p.entities.row(n);
        auto dst = bound.row(n);
        for (std::size_t k = 0; k < dst.size(); ++k) dst[k] = src[k] * et[k];
      }
      scores = score_all_candidates<Real>(p.core, es, er, bound);
      break;
    }
  }
  if (p.has_static()) {
    const auto extra = score_all_candidates<Real>(p.core, es, p.pred_static.row(r), p.entities);
    for (std::size_t n = 0; n < scores.size(); ++n) scores[n] += extra[n];
  }
  return scores;
}

template struct ModelParams<float>;
template struct ModelParams<double>;
template ModelParams<float> init_params<float>(const ModelShape&, ModelKind, std::uint64_t);
template ModelParams<double> init_params<double>(const ModelShape&, ModelKind, std::uint64_t);
template ModelParams<float> convert_params<float, double>(const ModelParams<double>&);
template ModelParams<double> convert_params<double, float>(const ModelParams<float>&);
template ModelParams<float> convert_params<float, float>(const ModelParams<float>&);
template ModelParams<double> convert_params<double, double>(const ModelParams<double>&);
template double score<float>(const ModelParams<float>&, std::size_t, std::size_t, std::size_t,
                             std::size_t, TimeBinding);
template double score<double>(const ModelParams<double>&, std::size_t, std::size_t, std::size_t,
                              std::size_t, TimeBinding);
template DenseVector score_objects<float>(const ModelParams<float>&, std::size_t, std::size_t,
                                          std::size_t, TimeBinding);
template DenseVector score_objects<double>(const ModelParams<double>&, std::size_t, std::size_t,
                                           std::size_t, TimeBinding);

}  // namespace tuckert
