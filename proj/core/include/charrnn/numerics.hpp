// Copyright 2026 The charrnn Authors.
// SPDX-License-Identifier: Apache-2.0

// Dense row-major storage, activations, GEMM kernels, the seeded generator and
// weight initializers. Everything above this layer works on Vector/Matrix.

#pragma once

#include <algorithm>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace charrnn {

template <std::floating_point Real>
class Vector {
 public:
  Vector() = default;
  explicit Vector(std::size_t n, Real fill = Real(0)) : data_(n, fill) {}
  Vector(std::initializer_list<Real> values) : data_(values) {}
  explicit Vector(std::vector<Real> values) : data_(std::move(values)) {}

  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  Real& operator[](std::size_t i) { return data_[i]; }
  const Real& operator[](std::size_t i) const { return data_[i]; }

  Real* data() { return data_.data(); }
  const Real* data() const { return data_.data(); }
  std::span<Real> span() { return data_; }
  std::span<const Real> span() const { return data_; }

  auto begin() { return data_.begin(); }
  auto end() { return data_.end(); }
  auto begin() const { return data_.begin(); }
  auto end() const { return data_.end(); }

  void fill(Real value) { std::fill(data_.begin(), data_.end(), value); }

  bool operator==(const Vector&) const = default;

 private:
  std::vector<Real> data_;
};

template <std::floating_point Real>
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, Real fill = Real(0))
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::initializer_list<std::initializer_list<Real>> rows);

  static Matrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  Real& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const Real& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<Real> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const Real> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  Real* data() { return data_.data(); }
  const Real* data() const { return data_.data(); }
  std::span<Real> span() { return data_; }
  std::span<const Real> span() const { return data_; }

  void fill(Real value) { std::fill(data_.begin(), data_.end(), value); }
  Matrix transposed() const;

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Real> data_;
};

std::string shape_string(std::size_t rows, std::size_t cols);

/// xoshiro256** seeded through splitmix64. The draw sequence depends only on
/// the seed, never on the platform's standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 bits of resolution.
  double uniform01();
  double uniform(double lo, double hi);
  /// Unbiased integer in [0, n).
  std::uint64_t uniform_index(std::uint64_t n);
  /// Standard normal via Box-Muller; consumes two uniforms per call.
  double normal();
  /// Derives an independent generator; advances this one by one draw.
  Rng split();

 private:
  std::uint64_t seed_;
  std::uint64_t s_[4];
};

// Scalar activations.
double sigmoid(double x);
double tanh_act(double x);
double leaky_relu(double x, double leakiness);

template <std::floating_point Real>
Vector<Real> softmax(const Vector<Real>& v);

/// In-place softmax over one row; max-subtracted.
template <std::floating_point Real>
void softmax_inplace(std::span<Real> v);

template <std::floating_point Real>
Vector<Real> matvec(const Matrix<Real>& m, const Vector<Real>& v);

// GEMM kernels on row-major matrices. All accumulate into `c`; shape
// mismatches throw std::invalid_argument naming both operand shapes.

/// c(n x m) += a(n x k) * b(m x k)^T
template <std::floating_point Real>
void gemm_nt(const Matrix<Real>& a, const Matrix<Real>& b, Matrix<Real>& c);
/// c(n x m) += a(n x k) * b(k x m)
template <std::floating_point Real>
void gemm_nn(const Matrix<Real>& a, const Matrix<Real>& b, Matrix<Real>& c);
/// c(k x m) += a(n x k)^T * b(n x m)
template <std::floating_point Real>
void gemm_tn(const Matrix<Real>& a, const Matrix<Real>& b, Matrix<Real>& c);

/// Adds `bias` to every row of `m`.
template <std::floating_point Real>
void add_row_broadcast(Matrix<Real>& m, const Vector<Real>& bias);
/// out += column sums of m.
template <std::floating_point Real>
void accumulate_column_sums(const Matrix<Real>& m, Vector<Real>& out);

template <std::floating_point Real>
Matrix<Real> orthogonal_init(std::size_t rows, std::size_t cols, Rng& rng);
template <std::floating_point Real>
Matrix<Real> glorot_uniform_init(std::size_t rows, std::size_t cols, Rng& rng);

}  // namespace charrnn
