#include "tuckert/tensor.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>

#include "tuckert/errors.hpp"
#include "tuckert/parallel.hpp"

namespace tuckert {
namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMajor>;
using MutMap = Eigen::Map<RowMajor>;

void check_mode(const char* op, int mode, std::size_t expected, std::size_t got) {
  if (expected != got) {
    throw ShapeError(std::string(op) + ": mode-" + std::to_string(mode) + " length " +
                     std::to_string(got) + " does not match core extent " +
                     std::to_string(expected));
  }
}

// Rows of the pair-outer-product matrix processed per GEMM. Depends only on
// the core shape so the summation order never depends on the thread count.
std::size_t pair_chunk(std::size_t d1d2) {
  constexpr std::size_t kTargetEntries = std::size_t{1} << 18;
  return std::max<std::size_t>(1, kTargetEntries / std::max<std::size_t>(1, d1d2));
}

// P[n, i*d2 + j] = a[n, i] * b[n, j] for rows [begin, end).
void fill_pairs(const DenseMatrix<double>& a, const DenseMatrix<double>& b, std::size_t begin,
                std::size_t end, RowMajor& pairs) {
  const std::size_t d1 = a.cols();
  const std::size_t d2 = b.cols();
  pairs.resize(static_cast<Eigen::Index>(end - begin), static_cast<Eigen::Index>(d1 * d2));
  for (std::size_t n = begin; n < end; ++n) {
    double* out = pairs.row(static_cast<Eigen::Index>(n - begin)).data();
    for (std::size_t i = 0; i < d1; ++i) {
      const double ai = a(n, i);
      for (std::size_t j = 0; j < d2; ++j) out[i * d2 + j] = ai * b(n, j);
    }
  }
}

}  // namespace

template <class Real>
double trilinear_form(const Core3Tensor<Real>& w, std::span<const Real> a, std::span<const Real> b,
                      std::span<const Real> c) {
  const auto [d1, d2, d3] = w.dims();
  check_mode("trilinear_form", 1, d1, a.size());
  check_mode("trilinear_form", 2, d2, b.size());
  check_mode("trilinear_form", 3, d3, c.size());
  const Real* v = w.data();
  double total = 0.0;
  for (std::size_t i = 0; i < d1; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < d2; ++j) {
      const Real* fiber = v + (i * d2 + j) * d3;
      double inner = 0.0;
      for (std::size_t k = 0; k < d3; ++k) inner += static_cast<double>(fiber[k]) * c[k];
      row += static_cast<double>(b[j]) * inner;
    }
    total += static_cast<double>(a[i]) * row;
  }
  return total;
}

template <class Real>
DenseMatrix<double> contract_mode2(const Core3Tensor<Real>& w, std::span<const Real> b) {
  const auto [d1, d2, d3] = w.dims();
  check_mode("contract_mode2", 2, d2, b.size());
  DenseMatrix<double> out(d1, d3);
  const Real* v = w.data();
  for (std::size_t i = 0; i < d1; ++i) {
    double* dst = out.row(i).data();
    for (std::size_t j = 0; j < d2; ++j) {
      const double bj = b[j];
      const Real* fiber = v + (i * d2 + j) * d3;
      for (std::size_t k = 0; k < d3; ++k) dst[k] += static_cast<double>(fiber[k]) * bj;
    }
  }
  return out;
}

template <class Real>
DenseVector project_pair(const Core3Tensor<Real>& w, std::span<const Real> a,
                         std::span<const Real> b) {
  const auto [d1, d2, d3] = w.dims();
  check_mode("project_pair", 1, d1, a.size());
  const DenseMatrix<double> m = contract_mode2(w, b);
  DenseVector out(d3, 0.0);
  for (std::size_t i = 0; i < d1; ++i) {
    const double ai = a[i];
    const auto src = m.row(i);
    for (std::size_t k = 0; k < d3; ++k) out[k] += ai * src[k];
  }
  return out;
}

template <class Real>
DenseVector score_all_candidates(const Core3Tensor<Real>& w, std::span<const Real> a,
                                 std::span<const Real> b, const DenseMatrix<Real>& candidates) {
  check_mode("score_all_candidates", 3, w.dim(2), candidates.cols());
  const DenseVector v = project_pair(w, a, b);
  DenseVector scores(candidates.rows(), 0.0);
  for (std::size_t n = 0; n < candidates.rows(); ++n) {
    const auto c = candidates.row(n);
    double s = 0.0;
    for (std::size_t k = 0; k < v.size(); ++k) s += v[k] * static_cast<double>(c[k]);
    scores[n] = s;
  }
  return scores;
}

template <class Real>
TrilinearGrads trilinear_grads(const Core3Tensor<Real>& w, std::span<const Real> a,
                               std::span<const Real> b, std::span<const Real> c, double upstream) {
  const auto [d1, d2, d3] = w.dims();
  check_mode("trilinear_grads", 1, d1, a.size());
  check_mode("trilinear_grads", 2, d2, b.size());
  check_mode("trilinear_grads", 3, d3, c.size());
  TrilinearGrads g{Core3Tensor<double>(d1, d2, d3), DenseVector(d1, 0.0), DenseVector(d2, 0.0),
                   DenseVector(d3, 0.0)};
  const Real* v = w.data();
  for (std::size_t i = 0; i < d1; ++i) {
    const double ai = a[i];
    for (std::size_t j = 0; j < d2; ++j) {
      const double bj = b[j];
      const Real* fiber = v + (i * d2 + j) * d3;
      double* gfiber = g.core.data() + (i * d2 + j) * d3;
      double wc = 0.0;
      for (std::size_t k = 0; k < d3; ++k) {
        const double wk = fiber[k];
        const double ck = c[k];
        gfiber[k] = upstream * ai * bj * ck;
        wc += wk * ck;
        g.c[k] += upstream * wk * ai * bj;
      }
      g.a[i] += upstream * wc * bj;
      g.b[j] += upstream * wc * ai;
    }
  }
  return g;
}

DenseMatrix<double> project_pairs(const Core3Tensor<double>& w, const DenseMatrix<double>& a,
                                  const DenseMatrix<double>& b, int threads) {
  const auto [d1, d2, d3] = w.dims();
  check_mode("project_pairs", 1, d1, a.cols());
  check_mode("project_pairs", 2, d2, b.cols());
  if (a.rows() != b.rows()) throw ShapeError("project_pairs: factor row counts differ");
  const std::size_t rows = a.rows();
  DenseMatrix<double> out(rows, d3);
  if (rows == 0) return out;

  const ConstMap core(w.data(), static_cast<Eigen::Index>(d1 * d2), static_cast<Eigen::Index>(d3));
  const std::size_t chunk = pair_chunk(d1 * d2);
  const std::size_t chunks = (rows + chunk - 1) / chunk;
  parallel_for(chunks, threads, [&](std::size_t cb, std::size_t ce, int) {
    RowMajor pairs;
    for (std::size_t c = cb; c < ce; ++c) {
      const std::size_t begin = c * chunk;
      const std::size_t end = std::min(rows, begin + chunk);
      fill_pairs(a, b, begin, end, pairs);
      MutMap dst(out.row(begin).data(), static_cast<Eigen::Index>(end - begin),
                 static_cast<Eigen::Index>(d3));
      dst.noalias() = pairs * core;
    }
  });
  return out;
}

PairProjectionGrads project_pairs_backward(const Core3Tensor<double>& w,
                                           const DenseMatrix<double>& a,
                                           const DenseMatrix<double>& b,
                                           const DenseMatrix<double>& dv,
                                           Core3Tensor<double>& core_grad, int threads) {
  const auto [d1, d2, d3] = w.dims();
  check_mode("project_pairs_backward", 1, d1, a.cols());
  check_mode("project_pairs_backward", 2, d2, b.cols());
  check_mode("project_pairs_backward", 3, d3, dv.cols());
  if (a.rows() != b.rows() || a.rows() != dv.rows()) {
    throw ShapeError("project_pairs_backward: row counts differ");
  }
  if (core_grad.dims() != w.dims()) throw ShapeError("project_pairs_backward: core_grad shape");

  const std::size_t rows = a.rows();
  PairProjectionGrads g{DenseMatrix<double>(rows, d1), DenseMatrix<double>(rows, d2)};
  if (rows == 0) return g;

  const auto d12 = static_cast<Eigen::Index>(d1 * d2);
  const ConstMap core(w.data(), d12, static_cast<Eigen::Index>(d3));
  const std::size_t chunk = pair_chunk(d1 * d2);
  const std::size_t chunks = (rows + chunk - 1) / chunk;
  const int workers = effective_workers(chunks, threads);

  // Worker 0 accumulates straight into core_grad; the others into private
  // buffers that are folded in afterwards in worker order.
  std::vector<Core3Tensor<double>> partial(workers > 1 ? workers - 1 : 0,
                                           Core3Tensor<double>(d1, d2, d3));
  parallel_for(chunks, threads, [&](std::size_t cb, std::size_t ce, int worker) {
    Core3Tensor<double>& sink = worker == 0 ? core_grad : partial[worker - 1];
    MutMap gcore(sink.data(), d12, static_cast<Eigen::Index>(d3));
    RowMajor pairs;
    RowMajor dpairs;
    for (std::size_t c = cb; c < ce; ++c) {
      const std::size_t begin = c * chunk;
      const std::size_t end = std::min(rows, begin + chunk);
      const auto n = static_cast<Eigen::Index>(end - begin);
      fill_pairs(a, b, begin, end, pairs);
      const ConstMap upstream(dv.row(begin).data(), n, static_cast<Eigen::Index>(d3));
      gcore.noalias() += pairs.transpose() * upstream;
      dpairs.noalias() = upstream * core.transpose();
      for (std::size_t r = begin; r < end; ++r) {
        const double* dp = dpairs.row(static_cast<Eigen::Index>(r - begin)).data();
        for (std::size_t i = 0; i < d1; ++i) {
          const double ai = a(r, i);
          double acc = 0.0;
          for (std::size_t j = 0; j < d2; ++j) {
            const double x = dp[i * d2 + j];
            acc += x * b(r, j);
            g.b(r, j) += x * ai;
          }
          g.a(r, i) = acc;
        }
      }
    }
  });
  for (const auto& p : partial) {
    auto dst = core_grad.values();
    const auto src = p.values();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
  }
  return g;
}

template <class Real>
bool all_finite(std::span<const Real> values) {
  return std::all_of(values.begin(), values.end(), [](Real x) { return std::isfinite(x); });
}

#define TUCKERT_INSTANTIATE(Real)                                                                \
  template double trilinear_form<Real>(const Core3Tensor<Real>&, std::span<const Real>,          \
                                       std::span<const Real>, std::span<const Real>);            \
  template DenseMatrix<double> contract_mode2<Real>(const Core3Tensor<Real>&,                    \
                                                    std::span<const Real>);                      \
  template DenseVector project_pair<Real>(const Core3Tensor<Real>&, std::span<const Real>,       \
                                          std::span<const Real>);                                \
  template DenseVector score_all_candidates<Real>(const Core3Tensor<Real>&,                      \
                                                  std::span<const Real>, std::span<const Real>,  \
                                                  const DenseMatrix<Real>&);                     \
  template TrilinearGrads trilinear_grads<Real>(const Core3Tensor<Real>&, std::span<const Real>, \
                                                std::span<const Real>, std::span<const Real>,    \
                                                double);                                         \
  template bool all_finite<Real>(std::span<const Real>);

TUCKERT_INSTANTIATE(float)
TUCKERT_INSTANTIATE(double)

#undef TUCKERT_INSTANTIATE

}  // namespace tuckert
