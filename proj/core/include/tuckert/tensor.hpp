#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace tuckert {

/// Dense row-major matrix. Rows are contiguous, so a row is a span.
template <class Real>
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, Real fill = Real(0))
      : rows_(rows), cols_(cols), values_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }

  Real& operator()(std::size_t r, std::size_t c) { return values_[r * cols_ + c]; }
  Real operator()(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }

  std::span<Real> row(std::size_t r) { return {values_.data() + r * cols_, cols_}; }
  std::span<const Real> row(std::size_t r) const { return {values_.data() + r * cols_, cols_}; }

  std::span<Real> values() noexcept { return values_; }
  std::span<const Real> values() const noexcept { return values_; }
  Real* data() noexcept { return values_.data(); }
  const Real* data() const noexcept { return values_.data(); }

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Real> values_;
};

/// Dense order-3 tensor. Entry (i, j, k) lives at i*d2*d3 + j*d3 + k.
template <class Real>
class Core3Tensor {
 public:
  using Dims = std::array<std::size_t, 3>;

  Core3Tensor() = default;
  Core3Tensor(std::size_t d1, std::size_t d2, std::size_t d3, Real fill = Real(0))
      : dims_{d1, d2, d3}, values_(d1 * d2 * d3, fill) {}
  explicit Core3Tensor(std::size_t d, Real fill = Real(0)) : Core3Tensor(d, d, d, fill) {}

  const Dims& dims() const noexcept { return dims_; }
  std::size_t dim(std::size_t mode) const { return dims_.at(mode); }
  std::size_t size() const noexcept { return values_.size(); }

  std::size_t offset(std::size_t i, std::size_t j, std::size_t k) const noexcept {
    return (i * dims_[1] + j) * dims_[2] + k;
  }
  Real& operator()(std::size_t i, std::size_t j, std::size_t k) { return values_[offset(i, j, k)]; }
  Real operator()(std::size_t i, std::size_t j, std::size_t k) const {
    return values_[offset(i, j, k)];
  }

  std::span<Real> values() noexcept { return values_; }
  std::span<const Real> values() const noexcept { return values_; }
  Real* data() noexcept { return values_.data(); }
  const Real* data() const noexcept { return values_.data(); }

  friend bool operator==(const Core3Tensor&, const Core3Tensor&) = default;

 private:
  Dims dims_{0, 0, 0};
  std::vector<Real> values_;
};

using DenseVector = std::vector<double>;

/// <w; a, b, c> = sum_ijk w_ijk a_i b_j c_k, accumulated in double.
template <class Real>
double trilinear_form(const Core3Tensor<Real>& w, std::span<const Real> a, std::span<const Real> b,
                      std::span<const Real> c);

/// Mode-2 product w x_2 b, a d1 x d3 matrix.
template <class Real>
DenseMatrix<double> contract_mode2(const Core3Tensor<Real>& w, std::span<const Real> b);

/// a^T (w x_2 b): the d3-vector that every candidate is dotted against.
template <class Real>
DenseVector project_pair(const Core3Tensor<Real>& w, std::span<const Real> a,
                         std::span<const Real> b);

/// Entry n is trilinear_form(w, a, b, candidates.row(n)). The d^3 contraction
/// runs once, then each candidate costs one d3-length dot product.
template <class Real>
DenseVector score_all_candidates(const Core3Tensor<Real>& w, std::span<const Real> a,
                                 std::span<const Real> b, const DenseMatrix<Real>& candidates);

struct TrilinearGrads {
  Core3Tensor<double> core;
  DenseVector a;
  DenseVector b;
  DenseVector c;
};

/// Analytic gradients of upstream * <w; a, b, c> with respect to every input.
template <class Real>
TrilinearGrads trilinear_grads(const Core3Tensor<Real>& w, std::span<const Real> a,
                               std::span<const Real> b, std::span<const Real> c, double upstream);

/// Batched pair projection used by training: row n of the result is
/// project_pair(w, A.row(n), B.row(n)). Inputs are double because training
/// keeps 64-bit partial sums regardless of parameter storage.
DenseMatrix<double> project_pairs(const Core3Tensor<double>& w, const DenseMatrix<double>& a,
                                  const DenseMatrix<double>& b, int threads = 1);

struct PairProjectionGrads {
  DenseMatrix<double> a;
  DenseMatrix<double> b;
};

/// Backward pass of project_pairs given the upstream gradient `dv` (same shape
/// as its output). Adds the core gradient into `core_grad` and returns the
/// gradients with respect to the two factor matrices.
PairProjectionGrads project_pairs_backward(const Core3Tensor<double>& w,
                                           const DenseMatrix<double>& a,
                                           const DenseMatrix<double>& b,
                                           const DenseMatrix<double>& dv,
                                           Core3Tensor<double>& core_grad, int threads = 1);

template <class Real>
bool all_finite(std::span<const Real> values);

}  // namespace tuckert
