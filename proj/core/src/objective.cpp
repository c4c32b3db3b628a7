#include "tuckert/objective.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "tuckert/errors.hpp"

namespace tuckert {

std::string_view to_string(Regularizer reg) {
  switch (reg) {
    case Regularizer::None: return "none";
    case Regularizer::Frobenius: return "frobenius";
    case Regularizer::FrobeniusWithCore: return "frobenius_core";
    case Regularizer::Lp: return "lp";
    case Regularizer::LpWithCore: return "lp_core";
  }
  return "none";
}

Regularizer parse_regularizer(std::string_view text) {
  for (auto r : {Regularizer::None, Regularizer::Frobenius, Regularizer::FrobeniusWithCore,
                 Regularizer::Lp, Regularizer::LpWithCore}) {
    if (text == to_string(r)) return r;
  }
  throw ConfigError("unknown regularizer '" + std::string(text) +
                    "' (expected none, frobenius, frobenius_core, lp, lp_core)");
}

void RegularizerChoice::validate() const {
  auto require = [](bool ok, const char* msg) {
    if (!ok) throw ConfigError(msg);
  };
  require(std::isfinite(alpha) && alpha >= 0.0, "alpha must be finite and >= 0");
  require(std::isfinite(lambda) && lambda >= 0.0, "lambda must be finite and >= 0");
  require(std::isfinite(p) && p >= 1.0, "p must be >= 1");
  require(std::isfinite(q) && q >= 1.0, "q must be >= 1");
  require(std::isfinite(k) && k >= 1.0, "k must be >= 1");
}

template <class Real>
Gradients Gradients::zeros_like(const ModelParams<Real>& params) {
  Gradients g;
  g.entities = DenseMatrix<double>(params.entities.rows(), params.entities.cols());
  g.pred_temporal = DenseMatrix<double>(params.pred_temporal.rows(), params.pred_temporal.cols());
  g.pred_static = DenseMatrix<double>(params.pred_static.rows(), params.pred_static.cols());
  g.times = DenseMatrix<double>(params.times.rows(), params.times.cols());
  const auto& dims = params.core.dims();
  g.core = Core3Tensor<double>(dims[0], dims[1], dims[2]);
  return g;
}

void Gradients::set_zero() {
  for (auto* m : {&entities, &pred_temporal, &pred_static, &times}) {
    std::fill(m->values().begin(), m->values().end(), 0.0);
  }
  std::fill(core.values().begin(), core.values().end(), 0.0);
}

namespace {

void require_finite(std::span<const double> xs, const char* what) {
  for (double x : xs) {
    if (!std::isfinite(x)) throw NumericError(std::string(what) + ": non-finite input");
  }
}

// Writes softmax(scores) - onehot(true_index), scaled, into `grad`; returns the loss.
double softmax_xent(std::span<const double> scores, std::size_t true_index, double scale,
                    std::span<double> grad) {
  const double peak = *std::max_element(scores.begin(), scores.end());
  double sum = 0.0;
  for (double s : scores) sum += std::exp(s - peak);
  const double log_z = peak + std::log(sum);
  for (std::size_t i = 0; i < scores.size(); ++i) {
    grad[i] = scale * std::exp(scores[i] - log_z);
  }
  grad[true_index] -= scale;
  return std::max(0.0, log_z - scores[true_index]);
}

template <class Real>
std::vector<double> to_double(std::span<const Real> xs) {
  return std::vector<double>(xs.begin(), xs.end());
}

template <class Real>
const Core3Tensor<double>& core_as_double(const ModelParams<Real>& params,
                                          Core3Tensor<double>& scratch) {
  if constexpr (std::is_same_v<Real, double>) {
    return params.core;
  } else {
    const auto& dims = params.core.dims();
    scratch = Core3Tensor<double>(dims[0], dims[1], dims[2]);
    const auto src = params.core.values();
    std::copy(src.begin(), src.end(), scratch.values().begin());
    return scratch;
  }
}

template <class Real>
void check_batch(const ModelParams<Real>& p, std::span<const Quadruple> batch) {
  for (const auto& q : batch) {
    if (q.s >= p.entities.rows() || q.o >= p.entities.rows() || q.r >= p.pred_temporal.rows() ||
        q.t >= p.times.rows()) {
      throw IndexError("batch fact (" + std::to_string(q.s) + ", " + std::to_string(q.r) + ", " +
                       std::to_string(q.o) + ", " + std::to_string(q.t) + ") out of range");
    }
  }
}

}  // namespace

LossAndGrad multiclass_loss(std::span<const double> scores, std::size_t true_index) {
  if (scores.empty() || true_index >= scores.size()) {
    throw IndexError("multiclass_loss: true index " + std::to_string(true_index) +
                     " out of range for " + std::to_string(scores.size()) + " scores");
  }
  require_finite(scores, "multiclass_loss");
  LossAndGrad out;
  out.grad.assign(scores.size(), 0.0);
  out.loss = softmax_xent(scores, true_index, 1.0, out.grad);
  return out;
}

double powered_norm(std::span<const double> x, double p, double power, std::span<double> grad,
                    double scale) {
  double acc = 0.0;
  if (p == 2.0) {
    for (double v : x) acc += v * v;
  } else {
    for (double v : x) acc += std::pow(std::abs(v), p);
  }
  if (acc == 0.0) return 0.0;
  const double norm = p == 2.0 ? std::sqrt(acc) : std::pow(acc, 1.0 / p);
  const double value = std::pow(norm, power);
  if (!grad.empty()) {
    // d/dx_i ||x||_p^power = power * ||x||_p^(power - p) * |x_i|^(p-1) * sign(x_i)
    const double front = scale * power * std::pow(norm, power - p);
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double v = x[i];
      if (v == 0.0) continue;
      const double mag = p == 2.0 ? std::abs(v) : std::pow(std::abs(v), p - 1.0);
      grad[i] += front * (v > 0 ? mag : -mag);
    }
  }
  return value;
}

template <class Real>
TimeSmoothness time_smoothness(const DenseMatrix<Real>& times, double lambda, double p, double q) {
  TimeSmoothness out{0.0, DenseMatrix<double>(times.rows(), times.cols())};
  require_finite(to_double<Real>(times.values()), "time_smoothness");
  if (times.rows() < 2) return out;
  const double scale = lambda / static_cast<double>(times.rows() - 1);
  std::vector<double> diff(times.cols());
  std::vector<double> g(times.cols());
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < times.rows(); ++i) {
    const auto lo = times.row(i);
    const auto hi = times.row(i + 1);
    for (std::size_t c = 0; c < diff.size(); ++c) {
      diff[c] = static_cast<double>(hi[c]) - static_cast<double>(lo[c]);
    }
    std::fill(g.begin(), g.end(), 0.0);
    sum += powered_norm(diff, p, q, g, scale);
    auto g_lo = out.grad.row(i);
    auto g_hi = out.grad.row(i + 1);
    for (std::size_t c = 0; c < g.size(); ++c) {
      g_hi[c] += g[c];
      g_lo[c] -= g[c];
    }
  }
  out.value = scale * sum;
  return out;
}

template <class Real>
double embedding_reg(const ModelParams<Real>& params, std::span<const Quadruple> batch,
                     const RegularizerChoice& choice, Gradients* grads) {
  if (choice.kind == Regularizer::None || batch.empty()) return 0.0;
  check_batch(params, batch);

  const bool frob = choice.kind == Regularizer::Frobenius ||
                    choice.kind == Regularizer::FrobeniusWithCore;
  const double p = frob ? 2.0 : choice.p;
  const double power = frob ? choice.k : choice.q;
  const bool nt = params.has_static();
  // Weighted terms: 2 e_s, e_r^t * e_t, 2 e_o, [e_r], [core].
  const double denom = 3.0 - (nt ? 0.0 : 1.0) + (choice.with_core() ? 1.0 : 0.0);
  const double weight = choice.alpha / denom;
  const double per_example = weight / static_cast<double>(batch.size());
  const std::size_t d = params.shape.dim;

  std::vector<double> bound(d), gb(d), gs(d), go(d), gr(d);
  double sum = 0.0;
  for (const auto& q : batch) {
    const auto es = to_double<Real>(params.entities.row(q.s));
    const auto eo = to_double<Real>(params.entities.row(q.o));
    const auto rt = params.pred_temporal.row(q.r);
    const auto et = params.times.row(q.t);
    for (std::size_t i = 0; i < d; ++i) bound[i] = static_cast<double>(rt[i]) * et[i];

    const bool want = grads != nullptr;
    std::fill(gs.begin(), gs.end(), 0.0);
    std::fill(go.begin(), go.end(), 0.0);
    std::fill(gb.begin(), gb.end(), 0.0);
    std::fill(gr.begin(), gr.end(), 0.0);
    const std::span<double> none;
    double term = 2.0 * powered_norm(es, p, power, want ? std::span(gs) : none, 2.0 * per_example);
    term += powered_norm(bound, p, power, want ? std::span(gb) : none, per_example);
    term += 2.0 * powered_norm(eo, p, power, want ? std::span(go) : none, 2.0 * per_example);
    if (nt) {
      term += powered_norm(to_double<Real>(params.pred_static.row(q.r)), p, power,
                           want ? std::span(gr) : none, per_example);
    }
    sum += term;

    if (want) {
      auto ge_s = grads->entities.row(q.s);
      auto ge_o = grads->entities.row(q.o);
      auto g_rt = grads->pred_temporal.row(q.r);
      auto g_t = grads->times.row(q.t);
      for (std::size_t i = 0; i < d; ++i) {
        ge_s[i] += gs[i];
        ge_o[i] += go[i];
        g_rt[i] += gb[i] * et[i];
        g_t[i] += gb[i] * rt[i];
      }
      if (nt) {
        auto g_rs = grads->pred_static.row(q.r);
        for (std::size_t i = 0; i < d; ++i) g_rs[i] += gr[i];
      }
    }
  }
  double value = per_example * sum;
  if (choice.with_core()) {
    const auto core = to_double<Real>(params.core.values());
    value += weight * powered_norm(core, p, power,
                                   grads ? grads->core.values() : std::span<double>{}, weight);
  }
  return value;
}

template <class Real>
BatchLossReport batch_objective(const ModelParams<Real>& params, std::span<const Quadruple> batch,
                                TimeBinding binding, const RegularizerChoice& choice,
                                Gradients& grads, int threads) {
  if (batch.empty()) throw ConfigError("batch_objective: empty batch");
  choice.validate();
  check_batch(params, batch);

  if (grads.core.dims() != params.core.dims() ||
      grads.entities.rows() != params.entities.rows() ||
      grads.pred_static.rows() != params.pred_static.rows()) {
    grads = Gradients::zeros_like(params);
  } else {
    grads.set_zero();
  }

  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using Map = Eigen::Map<RowMajor>;

  const std::size_t n = batch.size();
  const std::size_t d = params.shape.dim;
  const std::size_t n_e = params.entities.rows();
  const bool nt = params.has_static();
  const bool two_terms = nt && binding != TimeBinding::Predicate;

  Core3Tensor<double> core_scratch;
  const Core3Tensor<double>& core = core_as_double(params, core_scratch);

  // Bound factors of the first (time-carrying) term and, for NT models with a
  // subject or object binding, the static term <W; e_s, e_r, .>.
  DenseMatrix<double> a1(n, d), b1(n, d), a2, b2;
  if (two_terms) {
    a2 = DenseMatrix<double>(n, d);
    b2 = DenseMatrix<double>(n, d);
  }
  for (std::size_t row = 0; row < n; ++row) {
    const auto& q = batch[row];
    const auto es = params.entities.row(q.s);
    const auto rt = params.pred_temporal.row(q.r);
    const auto et = params.times.row(q.t);
    for (std::size_t i = 0; i < d; ++i) {
      const double s = es[i], r = rt[i], t = et[i];
      switch (binding) {
        case TimeBinding::Predicate:
          a1(row, i) = s;
          b1(row, i) = r * t + (nt ? static_cast<double>(params.pred_static(q.r, i)) : 0.0);
          break;
        case TimeBinding::Subject:
          a1(row, i) = s * t;
          b1(row, i) = r;
          break;
        case TimeBinding::Object:
          a1(row, i) = s;
          b1(row, i) = r;
          break;
      }
      if (two_terms) {
        a2(row, i) = s;
        b2(row, i) = params.pred_static(q.r, i);
      }
    }
  }

  const DenseMatrix<double> u1 = project_pairs(core, a1, b1, threads);
  DenseMatrix<double> v = u1;
  if (binding == TimeBinding::Object) {
    for (std::size_t row = 0; row < n; ++row) {
      const auto et = params.times.row(batch[row].t);
      for (std::size_t k = 0; k < d; ++k) v(row, k) *= et[k];
    }
  }
  if (two_terms) {
    const DenseMatrix<double> u2 = project_pairs(core, a2, b2, threads);
    auto dst = v.values();
    const auto src = u2.values();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
  }

  RowMajor ent(static_cast<Eigen::Index>(n_e), static_cast<Eigen::Index>(d));
  {
    const auto src = params.entities.values();
    std::copy(src.begin(), src.end(), ent.data());
  }
  Map vmap(v.data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  RowMajor scores = vmap * ent.transpose();
  for (Eigen::Index i = 0; i < scores.size(); ++i) {
    if (!std::isfinite(scores.data()[i])) throw NumericError("batch_objective: non-finite score");
  }

  // Scores are overwritten in place by d(mean loss)/d(scores).
  const double inv_n = 1.0 / static_cast<double>(n);
  double data_sum = 0.0;
  std::vector<double> row_scores(n_e);
  for (std::size_t row = 0; row < n; ++row) {
    std::span<double> srow(scores.row(static_cast<Eigen::Index>(row)).data(), n_e);
    std::copy(srow.begin(), srow.end(), row_scores.begin());
    data_sum += softmax_xent(row_scores, batch[row].o, inv_n, srow);
  }
  const auto& dscores = scores;

  DenseMatrix<double> dv(n, d);
  Map dvmap(dv.data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  dvmap.noalias() = dscores * ent;
  Map gent(grads.entities.data(), static_cast<Eigen::Index>(n_e), static_cast<Eigen::Index>(d));
  gent.noalias() += dscores.transpose() * vmap;

  // Upstream of the first term's projection.
  DenseMatrix<double> du1 = dv;
  if (binding == TimeBinding::Object) {
    for (std::size_t row = 0; row < n; ++row) {
      const auto et = params.times.row(batch[row].t);
      auto gt = grads.times.row(batch[row].t);
      for (std::size_t k = 0; k < d; ++k) {
        gt[k] += dv(row, k) * u1(row, k);
        du1(row, k) *= et[k];
      }
    }
  }
  const auto g1 = project_pairs_backward(core, a1, b1, du1, grads.core, threads);
  PairProjectionGrads g2;
  if (two_terms) g2 = project_pairs_backward(core, a2, b2, dv, grads.core, threads);

  for (std::size_t row = 0; row < n; ++row) {
    const auto& q = batch[row];
    const auto es = params.entities.row(q.s);
    const auto rt = params.pred_temporal.row(q.r);
    const auto et = params.times.row(q.t);
    auto ge = grads.entities.row(q.s);
    auto grt = grads.pred_temporal.row(q.r);
    auto gt = grads.times.row(q.t);
    for (std::size_t i = 0; i < d; ++i) {
      const double ga = g1.a(row, i);
      const double gb = g1.b(row, i);
      switch (binding) {
        case TimeBinding::Predicate:
          ge[i] += ga;
          grt[i] += gb * et[i];
          gt[i] += gb * rt[i];
          if (nt) grads.pred_static(q.r, i) += gb;
          break;
        case TimeBinding::Subject:
          ge[i] += ga * et[i];
          gt[i] += ga * es[i];
          grt[i] += gb;
          break;
        case TimeBinding::Object:
          ge[i] += ga;
          grt[i] += gb;
          break;
      }
      if (two_terms) {
        ge[i] += g2.a(row, i);
        grads.pred_static(q.r, i) += g2.b(row, i);
      }
    }
  }

  BatchLossReport report;
  report.data_loss = data_sum * inv_n;

  if (choice.lambda != 0.0) {
    const auto smooth = time_smoothness(params.times, choice.lambda, choice.p, choice.q);
    report.time_reg = smooth.value;
    auto dst = grads.times.values();
    const auto src = smooth.grad.values();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
  }
  if (choice.kind != Regularizer::None && choice.alpha != 0.0) {
    report.emb_reg = embedding_reg(params, batch, choice, &grads);
  }
  report.total = report.data_loss + report.time_reg + report.emb_reg;
  if (!std::isfinite(report.total)) throw NumericError("batch_objective: non-finite loss");
  return report;
}

template Gradients Gradients::zeros_like<float>(const ModelParams<float>&);
template Gradients Gradients::zeros_like<double>(const ModelParams<double>&);
template TimeSmoothness time_smoothness<float>(const DenseMatrix<float>&, double, double, double);
template TimeSmoothness time_smoothness<double>(const DenseMatrix<double>&, double, double, double);
template double embedding_reg<float>(const ModelParams<float>&, std::span<const Quadruple>,
                                     const RegularizerChoice&, Gradients*);
template double embedding_reg<double>(const ModelParams<double>&, std::span<const Quadruple>,
                                      const RegularizerChoice&, Gradients*);
template BatchLossReport batch_objective<float>(const ModelParams<float>&,
                                                std::span<const Quadruple>, TimeBinding,
                                                const RegularizerChoice&, Gradients&, int);
template BatchLossReport batch_objective<double>(const ModelParams<double>&,
                                                 std::span<const Quadruple>, TimeBinding,
                                                 const RegularizerChoice&, Gradients&, int);

}  // namespace tuckert
