#include "tuckert/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tuckert/errors.hpp"

namespace tuckert {

template <class Real>
AdagradState<Real> AdagradState<Real>::create(const ModelParams<Real>& params,
                                              AdagradOptions options) {
  if (!(options.learning_rate > 0.0) || !(options.epsilon >= 0.0) ||
      !(options.initial_accumulator >= 0.0)) {
    throw ConfigError("adagrad: learning rate must be > 0, epsilon and accumulator >= 0");
  }
  AdagradState s;
  s.options = options;
  s.accumulators = ModelParams<Real>::zeros(params.shape, params.kind);
  const auto init = static_cast<Real>(options.initial_accumulator);
  for (auto* m : {&s.accumulators.entities, &s.accumulators.pred_temporal,
                  &s.accumulators.pred_static, &s.accumulators.times}) {
    std::fill(m->values().begin(), m->values().end(), init);
  }
  std::fill(s.accumulators.core.values().begin(), s.accumulators.core.values().end(), init);
  return s;
}

namespace {

void check_finite(std::span<const double> g, const char* name) {
  for (double x : g) {
    if (!std::isfinite(x)) throw NumericError(std::string("non-finite gradient in ") + name);
  }
}

template <class Real>
void check_shape(const DenseMatrix<Real>& param, const DenseMatrix<double>& grad,
                 const DenseMatrix<Real>& acc, const char* name) {
  if (param.rows() != grad.rows() || param.cols() != grad.cols() || param.rows() != acc.rows() ||
      param.cols() != acc.cols()) {
    throw ShapeError(std::string("adagrad: shape mismatch in ") + name);
  }
}

template <class Real>
void update(std::span<Real> theta, std::span<const double> g, std::span<Real> acc,
            const AdagradOptions& opt) {
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double gi = g[i];
    const double a = static_cast<double>(acc[i]) + gi * gi;
    acc[i] = static_cast<Real>(a);
    theta[i] = static_cast<Real>(static_cast<double>(theta[i]) -
                                 opt.learning_rate * gi / (std::sqrt(a) + opt.epsilon));
  }
}

template <class Real>
void update_rows(DenseMatrix<Real>& theta, const DenseMatrix<double>& g, DenseMatrix<Real>& acc,
                 const AdagradOptions& opt) {
  for (std::size_t r = 0; r < theta.rows(); ++r) {
    const auto grow = g.row(r);
    if (std::all_of(grow.begin(), grow.end(), [](double x) { return x == 0.0; })) continue;
    update(theta.row(r), grow, acc.row(r), opt);
  }
}

}  // namespace

template <class Real>
void adagrad_step(ModelParams<Real>& params, const Gradients& grads, AdagradState<Real>& state) {
  auto& acc = state.accumulators;
  check_shape(params.entities, grads.entities, acc.entities, "entities");
  check_shape(params.pred_temporal, grads.pred_temporal, acc.pred_temporal, "pred_temporal");
  check_shape(params.pred_static, grads.pred_static, acc.pred_static, "pred_static");
  check_shape(params.times, grads.times, acc.times, "times");
  if (params.core.dims() != grads.core.dims() || params.core.dims() != acc.core.dims()) {
    throw ShapeError("adagrad: shape mismatch in core");
  }
  check_finite(grads.entities.values(), "entities");
  check_finite(grads.pred_temporal.values(), "pred_temporal");
  check_finite(grads.pred_static.values(), "pred_static");
  check_finite(grads.times.values(), "times");
  check_finite(grads.core.values(), "core");

  const auto& opt = state.options;
  update_rows(params.entities, grads.entities, acc.entities, opt);
  update_rows(params.pred_temporal, grads.pred_temporal, acc.pred_temporal, opt);
  update_rows(params.pred_static, grads.pred_static, acc.pred_static, opt);
  update_rows(params.times, grads.times, acc.times, opt);
  update(params.core.values(), grads.core.values(), acc.core.values(), opt);

  if (!params.all_finite()) throw NumericError("adagrad: parameters became non-finite");
}

template struct AdagradState<float>;
template struct AdagradState<double>;
template void adagrad_step<float>(ModelParams<float>&, const Gradients&, AdagradState<float>&);
template void adagrad_step<double>(ModelParams<double>&, const Gradients&, AdagradState<double>&);

}  // namespace tuckert
