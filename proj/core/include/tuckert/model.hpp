#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "tuckert/tensor.hpp"

namespace tuckert {

enum class ModelKind { TuckERT, TuckERTNT };

/// Which factor absorbs the timestamp embedding through an elementwise product.
enum class TimeBinding { Subject, Predicate, Object };

std::string_view to_string(ModelKind kind);
std::string_view to_string(TimeBinding binding);
ModelKind parse_model_kind(std::string_view text);
TimeBinding parse_time_binding(std::string_view text);

/// Vocabulary sizes and the shared embedding width. `relations` counts raw
/// predicates; the predicate tables hold 2 * relations rows, the second half
/// being the reciprocal predicates.
struct ModelShape {
  std::size_t entities = 0;
  std::size_t relations = 0;
  std::size_t timestamps = 0;
  std::size_t dim = 0;

  friend bool operator==(const ModelShape&, const ModelShape&) = default;
};

/// d(|E| + |T| + 2|R|) + d^3 for TuckERT, d(|E| + |T| + 4|R|) + d^3 for TuckERTNT.
std::uint64_t parameter_count(const ModelShape& shape, ModelKind kind);

template <class Real>
struct ModelParams {
  ModelKind kind = ModelKind::TuckERT;
  ModelShape shape;
  DenseMatrix<Real> entities;
  DenseMatrix<Real> pred_temporal;
  DenseMatrix<Real> pred_static;  ///< Empty unless kind == TuckERTNT.
  DenseMatrix<Real> times;
  Core3Tensor<Real> core;

  bool has_static() const noexcept { return kind == ModelKind::TuckERTNT; }
  std::uint64_t parameter_count() const;
  bool all_finite() const;

  /// Zero-filled tables of the right shape.
  static ModelParams zeros(const ModelShape& shape, ModelKind kind);

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

/// Embeddings ~ N(0, 0.05), core ~ N(0, 1/d); deterministic in `seed`.
template <class Real>
ModelParams<Real> init_params(const ModelShape& shape, ModelKind kind, std::uint64_t seed);

template <class To, class From>
ModelParams<To> convert_params(const ModelParams<From>& params);

/// Score of the fact (s, r, o, t). `r` may address a reciprocal row.
template <class Real>
double score(const ModelParams<Real>& params, std::size_t s, std::size_t r, std::size_t o,
             std::size_t t, TimeBinding binding = TimeBinding::Predicate);

/// Scores of (s, r, o, t) for every entity o.
template <class Real>
DenseVector score_objects(const ModelParams<Real>& params, std::size_t s, std::size_t r,
                          std::size_t t, TimeBinding binding = TimeBinding::Predicate);

}  // namespace tuckert
