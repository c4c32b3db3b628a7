#pragma once

#include "tuckert/model.hpp"
#include "tuckert/objective.hpp"

namespace tuckert {

struct AdagradOptions {
  double learning_rate = 0.2;
  double epsilon = 1e-10;
  double initial_accumulator = 0.0;

  friend bool operator==(const AdagradOptions&, const AdagradOptions&) = default;
};

/// Squared-gradient accumulators, one per parameter tensor.
template <class Real>
struct AdagradState {
  AdagradOptions options;
  ModelParams<Real> accumulators;

  static AdagradState create(const ModelParams<Real>& params, AdagradOptions options = {});

  friend bool operator==(const AdagradState&, const AdagradState&) = default;
};

/// One Adagrad step: acc += g^2; theta -= lr * g / (sqrt(acc) + eps).
/// Embedding rows whose gradient is entirely zero are left untouched; the
/// core is updated densely. Throws NumericError naming the tensor when a
/// gradient is non-finite, before any parameter is modified.
template <class Real>
void adagrad_step(ModelParams<Real>& params, const Gradients& grads, AdagradState<Real>& state);

}  // namespace tuckert
