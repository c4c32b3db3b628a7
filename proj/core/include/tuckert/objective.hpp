#pragma once

#include <span>
#include <string_view>

#include "tuckert/data.hpp"
#include "tuckert/model.hpp"
#include "tuckert/tensor.hpp"

namespace tuckert {

enum class Regularizer { None, Frobenius, FrobeniusWithCore, Lp, LpWithCore };

std::string_view to_string(Regularizer reg);
Regularizer parse_regularizer(std::string_view text);

/// Regularizer selection plus every weight the objective uses.
struct RegularizerChoice {
  Regularizer kind = Regularizer::LpWithCore;
  double alpha = 0.002;   ///< Embedding regularizer weight.
  double lambda = 0.01;   ///< Time-smoothness weight.
  double p = 4.0;         ///< l_p norm order.
  double q = 2.0;         ///< Power applied to the l_p norm.
  double k = 1.0;         ///< Power applied to the Frobenius norm.

  /// Throws ConfigError unless alpha, lambda >= 0 and p, q, k >= 1.
  void validate() const;
  bool with_core() const noexcept {
    return kind == Regularizer::FrobeniusWithCore || kind == Regularizer::LpWithCore;
  }
};

struct BatchLossReport {
  double data_loss = 0.0;
  double time_reg = 0.0;
  double emb_reg = 0.0;
  double total = 0.0;
};

/// Dense 64-bit gradient buffers mirroring ModelParams.
struct Gradients {
  DenseMatrix<double> entities;
  DenseMatrix<double> pred_temporal;
  DenseMatrix<double> pred_static;
  DenseMatrix<double> times;
  Core3Tensor<double> core;

  template <class Real>
  static Gradients zeros_like(const ModelParams<Real>& params);
  void set_zero();
};

struct LossAndGrad {
  double loss = 0.0;
  DenseVector grad;
};

/// logsumexp(scores) - scores[true_index] and its gradient softmax - onehot.
LossAndGrad multiclass_loss(std::span<const double> scores, std::size_t true_index);

struct TimeSmoothness {
  double value = 0.0;
  DenseMatrix<double> grad;
};

/// lambda/(|T|-1) * sum_i ||T[i+1] - T[i]||_p^q over chronologically adjacent rows.
template <class Real>
TimeSmoothness time_smoothness(const DenseMatrix<Real>& times, double lambda, double p, double q);

/// ||x||_p^power and, when `grad` is non-empty, adds scale * d/dx into it.
/// The Frobenius norm of a vector is the p = 2 case.
double powered_norm(std::span<const double> x, double p, double power, std::span<double> grad = {},
                    double scale = 1.0);

/// Mean per-example embedding regularizer over `batch`, plus the core term
/// once per batch for the WithCore variants. Adds its gradient into `grads`
/// when non-null.
template <class Real>
double embedding_reg(const ModelParams<Real>& params, std::span<const Quadruple> batch,
                     const RegularizerChoice& choice, Gradients* grads = nullptr);

/// Full mini-batch objective: mean multiclass loss over all entities plus the
/// time-smoothness term plus the selected embedding regularizer. `grads` is
/// overwritten with the gradient of `total`.
template <class Real>
BatchLossReport batch_objective(const ModelParams<Real>& params, std::span<const Quadruple> batch,
                                TimeBinding binding, const RegularizerChoice& choice,
                                Gradients& grads, int threads = 1);

}  // namespace tuckert
