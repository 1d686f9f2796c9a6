// Copyright 2026 The charrnn Authors.
// SPDX-License-Identifier: Apache-2.0

#include "charrnn/numerics.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace charrnn {

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
  std::uint64_t z = (x += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

[[noreturn]] void shape_error(const char* op, std::size_t ar, std::size_t ac, std::size_t br,
                              std::size_t bc) {
  throw std::invalid_argument(std::string(op) + ": incompatible shapes " + shape_string(ar, ac) +
                              " and " + shape_string(br, bc));
}

}  // namespace

std::string shape_string(std::size_t rows, std::size_t cols) {
  return std::to_string(rows) + "x" + std::to_string(cols);
}

// ---------------------------------------------------------------------------
// Matrix

template <std::floating_point Real>
Matrix<Real>::Matrix(std::initializer_list<std::initializer_list<Real>> rows)
    : rows_(rows.size()), cols_(rows.size() ? rows.begin()->size() : 0) {
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw std::invalid_argument("Matrix: ragged initializer");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

template <std::floating_point Real>
Matrix<Real> Matrix<Real>::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = Real(1);
  return m;
}

template <std::floating_point Real>
Matrix<Real> Matrix<Real>::transposed() const {
  Matrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

// ---------------------------------------------------------------------------
// Rng

Rng::Rng(std::uint64_t seed) : seed_(seed) {
  std::uint64_t x = seed;
  for (auto& s : s_) s = splitmix64(x);
}

std::uint64_t Rng::next_u64() {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Rng::uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

std::uint64_t Rng::uniform_index(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("Rng::uniform_index: empty range");
  // Rejection sampling on the top of the range keeps the draw unbiased.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x;
  do {
    x = next_u64();
  } while (x >= limit);
  return x % n;
}

double Rng::normal() {
  double u1 = uniform01();
  while (u1 <= 0.0) u1 = uniform01();
  const double u2 = uniform01();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Rng Rng::split() { return Rng(next_u64()); }

// ---------------------------------------------------------------------------
// Activations

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double tanh_act(double x) { return std::tanh(x); }

double leaky_relu(double x, double leakiness) { return x >= 0.0 ? x : leakiness * x; }

template <std::floating_point Real>
void softmax_inplace(std::span<Real> v) {
  if (v.empty()) throw std::invalid_argument("softmax: empty input");
  Real max_v = v[0];
  for (Real x : v) max_v = std::max(max_v, x);
  Real sum = 0;
  for (Real& x : v) {
    x = std::exp(x - max_v);
    sum += x;
  }
  const Real inv = Real(1) / sum;
  for (Real& x : v) x *= inv;
}

template <std::floating_point Real>
Vector<Real> softmax(const Vector<Real>& v) {
  Vector<Real> out = v;
  softmax_inplace(out.span());
  return out;
}

template <std::floating_point Real>
Vector<Real> matvec(const Matrix<Real>& m, const Vector<Real>& v) {
  if (m.cols() != v.size()) shape_error("matvec", m.rows(), m.cols(), v.size(), 1);
  Vector<Real> out(m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const Real* row = m.data() + r * m.cols();
    const Real* x = v.data();
    Real sum = 0;
#pragma omp simd reduction(+ : sum)
    for (std::size_t c = 0; c < m.cols(); ++c) sum += row[c] * x[c];
    out[r] = sum;
  }
  return out;
}

// ---------------------------------------------------------------------------
// GEMM kernels

template <std::floating_point Real>
void gemm_nt(const Matrix<Real>& a, const Matrix<Real>& b, Matrix<Real>& c) {
  const std::size_t n = a.rows(), k = a.cols(), m = b.rows();
  if (b.cols() != k) shape_error("gemm_nt", a.rows(), a.cols(), b.rows(), b.cols());
  if (c.rows() != n || c.cols() != m) shape_error("gemm_nt output", c.rows(), c.cols(), n, m);
  const Real* A = a.data();
  const Real* B = b.data();
  Real* C = c.data();
  std::size_t i = 0;
  // Four output rows share each streamed row of b.
  for (; i + 4 <= n; i += 4) {
    const Real* a0 = A + (i + 0) * k;
    const Real* a1 = A + (i + 1) * k;
    const Real* a2 = A + (i + 2) * k;
    const Real* a3 = A + (i + 3) * k;
    for (std::size_t j = 0; j < m; ++j) {
      const Real* bj = B + j * k;
      Real s0 = 0, s1 = 0, s2 = 0, s3 = 0;
#pragma omp simd reduction(+ : s0, s1, s2, s3)
      for (std::size_t p = 0; p < k; ++p) {
        const Real bv = bj[p];
        s0 += a0[p] * bv;
        s1 += a1[p] * bv;
        s2 += a2[p] * bv;
        s3 += a3[p] * bv;
      }
      C[(i + 0) * m + j] += s0;
      C[(i + 1) * m + j] += s1;
      C[(i + 2) * m + j] += s2;
      C[(i + 3) * m + j] += s3;
    }
  }
  for (; i < n; ++i) {
    const Real* ai = A + i * k;
    for (std::size_t j = 0; j < m; ++j) {
      const Real* bj = B + j * k;
      Real s = 0;
#pragma omp simd reduction(+ : s)
      for (std::size_t p = 0; p < k; ++p) s += ai[p] * bj[p];
      C[i * m + j] += s;
    }
  }
}

template <std::floating_point Real>
void gemm_nn(const Matrix<Real>& a, const Matrix<Real>& b, Matrix<Real>& c) {
  const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
  if (b.rows() != k) shape_error("gemm_nn", a.rows(), a.cols(), b.rows(), b.cols());
  if (c.rows() != n || c.cols() != m) shape_error("gemm_nn output", c.rows(), c.cols(), n, m);
  const Real* A = a.data();
  const Real* B = b.data();
  Real* C = c.data();
  for (std::size_t i = 0; i < n; ++i) {
    Real* ci = C + i * m;
    const Real* ai = A + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const Real av = ai[p];
      if (av == Real(0)) continue;
      const Real* bp = B + p * m;
#pragma omp simd
      for (std::size_t j = 0; j < m; ++j) ci[j] += av * bp[j];
    }
  }
}

template <std::floating_point Real>
void gemm_tn(const Matrix<Real>& a, const Matrix<Real>& b, Matrix<Real>& c) {
  const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
  if (b.rows() != n) shape_error("gemm_tn", a.rows(), a.cols(), b.rows(), b.cols());
  if (c.rows() != k || c.cols() != m) shape_error("gemm_tn output", c.rows(), c.cols(), k, m);
  const Real* A = a.data();
  const Real* B = b.data();
  Real* C = c.data();
  for (std::size_t p = 0; p < k; ++p) {
    Real* cp = C + p * m;
    for (std::size_t i = 0; i < n; ++i) {
      const Real av = A[i * k + p];
      if (av == Real(0)) continue;
      const Real* bi = B + i * m;
#pragma omp simd
      for (std::size_t j = 0; j < m; ++j) cp[j] += av * bi[j];
    }
  }
}

template <std::floating_point Real>
void add_row_broadcast(Matrix<Real>& m, const Vector<Real>& bias) {
  if (bias.size() != m.cols()) shape_error("add_row_broadcast", m.rows(), m.cols(), 1, bias.size());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    Real* row = m.data() + r * m.cols();
    const Real* b = bias.data();
#pragma omp simd
    for (std::size_t c = 0; c < m.cols(); ++c) row[c] += b[c];
  }
}

template <std::floating_point Real>
void accumulate_column_sums(const Matrix<Real>& m, Vector<Real>& out) {
  if (out.size() != m.cols()) shape_error("accumulate_column_sums", m.rows(), m.cols(), 1, out.size());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const Real* row = m.data() + r * m.cols();
    Real* o = out.data();
#pragma omp simd
    for (std::size_t c = 0; c < m.cols(); ++c) o[c] += row[c];
  }
}

// ---------------------------------------------------------------------------
// Initializers

template <std::floating_point Real>
Matrix<Real> orthogonal_init(std::size_t rows, std::size_t cols, Rng& rng) {
  if (rows == 0 || cols == 0) throw std::invalid_argument("orthogonal_init: empty shape");
  // Householder QR of a tall Gaussian matrix (tall x narrow), in double.
  const std::size_t tall = std::max(rows, cols);
  const std::size_t narrow = std::min(rows, cols);
  std::vector<double> a(tall * narrow);
  for (double& x : a) x = rng.normal();
  auto at = [&](std::size_t r, std::size_t c) -> double& { return a[r * narrow + c]; };

  std::vector<std::vector<double>> reflectors(narrow);
  std::vector<double> diag_sign(narrow, 1.0);
  for (std::size_t j = 0; j < narrow; ++j) {
    std::vector<double>& v = reflectors[j];
    v.assign(tall - j, 0.0);
    double norm = 0.0;
    for (std::size_t r = j; r < tall; ++r) norm += at(r, j) * at(r, j);
    norm = std::sqrt(norm);
    const double alpha = at(j, j) >= 0.0 ? -norm : norm;
    // R(j,j) == alpha; its sign fixes the column orientation of Q.
    diag_sign[j] = alpha >= 0.0 ? 1.0 : -1.0;
    for (std::size_t r = j; r < tall; ++r) v[r - j] = at(r, j);
    v[0] -= alpha;
    double vnorm = 0.0;
    for (double x : v) vnorm += x * x;
    if (vnorm == 0.0) continue;
    for (std::size_t c = j; c < narrow; ++c) {
      double dot = 0.0;
      for (std::size_t r = j; r < tall; ++r) dot += v[r - j] * at(r, c);
      const double scale = 2.0 * dot / vnorm;
      for (std::size_t r = j; r < tall; ++r) at(r, c) -= scale * v[r - j];
    }
  }

  // Q = H_0 H_1 ... H_{narrow-1} applied to the first `narrow` unit columns.
  std::vector<double> q(tall * narrow, 0.0);
  for (std::size_t c = 0; c < narrow; ++c) q[c * narrow + c] = 1.0;
  for (std::size_t jj = narrow; jj-- > 0;) {
    const std::vector<double>& v = reflectors[jj];
    double vnorm = 0.0;
    for (double x : v) vnorm += x * x;
    if (vnorm == 0.0) continue;
    for (std::size_t c = 0; c < narrow; ++c) {
      double dot = 0.0;
      for (std::size_t r = jj; r < tall; ++r) dot += v[r - jj] * q[r * narrow + c];
      const double scale = 2.0 * dot / vnorm;
      for (std::size_t r = jj; r < tall; ++r) q[r * narrow + c] -= scale * v[r - jj];
    }
  }

  Matrix<Real> out(rows, cols);
  for (std::size_t r = 0; r < tall; ++r) {
    for (std::size_t c = 0; c < narrow; ++c) {
      const double value = q[r * narrow + c] * diag_sign[c];
      if (rows >= cols)
        out(r, c) = static_cast<Real>(value);
      else
        out(c, r) = static_cast<Real>(value);
    }
  }
  return out;
}

template <std::floating_point Real>
Matrix<Real> glorot_uniform_init(std::size_t rows, std::size_t cols, Rng& rng) {
  if (rows == 0 || cols == 0) throw std::invalid_argument("glorot_uniform_init: empty shape");
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Matrix<Real> out(rows, cols);
  for (Real& x : out.span()) x = static_cast<Real>(rng.uniform(-limit, limit));
  return out;
}

#define CHARRNN_INSTANTIATE(Real)                                                        \
  template class Matrix<Real>;                                                           \
  template Vector<Real> softmax(const Vector<Real>&);                                    \
  template void softmax_inplace(std::span<Real>);                                        \
  template Vector<Real> matvec(const Matrix<Real>&, const Vector<Real>&);                \
  template void gemm_nt(const Matrix<Real>&, const Matrix<Real>&, Matrix<Real>&);        \
  template void gemm_nn(const Matrix<Real>&, const Matrix<Real>&, Matrix<Real>&);        \
  template void gemm_tn(const Matrix<Real>&, const Matrix<Real>&, Matrix<Real>&);        \
  template void add_row_broadcast(Matrix<Real>&, const Vector<Real>&);                   \
  template void accumulate_column_sums(const Matrix<Real>&, Vector<Real>&);              \
  template Matrix<Real> orthogonal_init<Real>(std::size_t, std::size_t, Rng&);           \
  template Matrix<Real> glorot_uniform_init<Real>(std::size_t, std::size_t, Rng&);

CHARRNN_INSTANTIATE(float)
CHARRNN_INSTANTIATE(double)
// Extended precision backs the finite-difference oracle.
CHARRNN_INSTANTIATE(long double)

#undef CHARRNN_INSTANTIATE

}  // namespace charrnn
