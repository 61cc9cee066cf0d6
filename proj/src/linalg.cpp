// SPDX-License-Identifier: Apache-2.0
#include "sensvq/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sensvq/error.hpp"

namespace sensvq {

namespace {

std::string shape(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorCode::kDimensionMismatch,
                std::string(op) + ": " + shape(a) + " vs " + shape(b));
  }
}

void require_square(const Matrix& a, const char* what) {
  if (a.rows() != a.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, std::string(what) + " must be square, got " + shape(a));
  }
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw Error(ErrorCode::kDimensionMismatch, "data length " + std::to_string(data_.size()) +
                                                   " does not match " + std::to_string(rows_) + "x" +
                                                   std::to_string(cols_));
  }
  for (double x : data_) {
    if (!std::isfinite(x)) throw Error(ErrorCode::kNonFinite, "matrix entries must be finite");
  }
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw Error(ErrorCode::kDimensionMismatch, "ragged initializer");
    for (double x : r) {
      if (!std::isfinite(x)) throw Error(ErrorCode::kNonFinite, "matrix entries must be finite");
      data_.push_back(x);
    }
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix out(n, n);
  for (std::size_t i = 0; i < n; ++i) out(i, i) = 1.0;
  return out;
}

Matrix Matrix::transpose() const {
  Matrix out(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) out(j, i) = (*this)(i, j);
  return out;
}

Matrix Matrix::block(std::size_t row0, std::size_t col0, std::size_t rows, std::size_t cols) const {
  if (row0 + rows > rows_ || col0 + cols > cols_) {
    throw Error(ErrorCode::kDimensionMismatch, "block out of range of " + shape(*this));
  }
  Matrix out(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    std::copy_n(data_.begin() + static_cast<std::ptrdiff_t>((row0 + i) * cols_ + col0), cols, out.row(i).begin());
  return out;
}

void Matrix::set_block(std::size_t row0, std::size_t col0, const Matrix& src) {
  if (row0 + src.rows() > rows_ || col0 + src.cols() > cols_) {
    throw Error(ErrorCode::kDimensionMismatch, "set_block out of range of " + shape(*this));
  }
  for (std::size_t i = 0; i < src.rows(); ++i)
    std::copy(src.row(i).begin(), src.row(i).end(), row(row0 + i).begin() + static_cast<std::ptrdiff_t>(col0));
}

double Matrix::squared_norm() const {
  double s = 0.0;
  for (double x : data_) s += x * x;
  return s;
}

double Matrix::frobenius_norm() const { return std::sqrt(squared_norm()); }

Matrix operator+(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "add");
  Matrix out = a;
  auto o = out.data();
  auto bd = b.data();
  for (std::size_t k = 0; k < o.size(); ++k) o[k] += bd[k];
  return out;
}

Matrix operator-(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "subtract");
  Matrix out = a;
  auto o = out.data();
  auto bd = b.data();
  for (std::size_t k = 0; k < o.size(); ++k) o[k] -= bd[k];
  return out;
}

Matrix operator*(double s, const Matrix& a) {
  Matrix out = a;
  for (double& x : out.data()) x *= s;
  return out;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw Error(ErrorCode::kDimensionMismatch, "matmul: " + shape(a) + " * " + shape(b));
  }
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto orow = out.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      auto brow = b.row(k);
      for (std::size_t j = 0; j < b.cols(); ++j) orow[j] += aik * brow[j];
    }
  }
  return out;
}

LdlFactors LdlFactors::identity(std::size_t n) {
  return LdlFactors{Matrix(n, n), std::vector<double>(n, 1.0)};
}

Matrix LdlFactors::reconstruct() const {
  const std::size_t n = size();
  Matrix unit = lower;
  for (std::size_t i = 0; i < n; ++i) unit(i, i) = 1.0;
  Matrix scaled = unit;  // (L + I) diag(D)
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) scaled(i, j) *= diag[j];
  return matmul(scaled, unit.transpose());
}

LdlFactors ldl_decompose(const Matrix& h, double damping_scale) {
  require_square(h, "ldl_decompose input");
  if (!(damping_scale >= 0.0) || !std::isfinite(damping_scale)) {
    throw Error(ErrorCode::kInvalidArgument, "damping_scale must be a finite nonnegative number");
  }
  const std::size_t n = h.rows();

  double max_abs = 0.0;
  for (double x : h.data()) max_abs = std::max(max_abs, std::abs(x));
  const double sym_tol = 1e-8 * std::max(1.0, max_abs);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (std::abs(h(i, j) - h(j, i)) > sym_tol) {
        throw Error(ErrorCode::kNonSymmetric, "entry (" + std::to_string(i) + "," + std::to_string(j) +
                                                  ") differs from its transpose");
      }

  double mean_diag = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean_diag += h(i, i);
  if (n > 0) mean_diag /= static_cast<double>(n);
  const double lambda = damping_scale * mean_diag;

  double max_diag = 0.0;
  for (std::size_t i = 0; i < n; ++i) max_diag = std::max(max_diag, std::abs(h(i, i) + lambda));
  const double pivot_floor = 1e-12 * max_diag;

  LdlFactors f{Matrix(n, n), std::vector<double>(n, 0.0)};
  // Only the lower triangle of H is read.
  for (std::size_t j = 0; j < n; ++j) {
    double d = h(j, j) + lambda;
    for (std::size_t k = 0; k < j; ++k) d -= f.lower(j, k) * f.lower(j, k) * f.diag[k];
    if (!(d > pivot_floor) || d <= 1e-300) {
      throw Error(ErrorCode::kSingularAfterDamping,
                  "pivot " + std::to_string(j) + " is " + std::to_string(d) + " after damping");
    }
    f.diag[j] = d;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = h(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= f.lower(i, k) * f.lower(j, k) * f.diag[k];
      f.lower(i, j) = s / d;
    }
  }
  return f;
}

Matrix tri_solve_unit_upper(const LdlFactors& factor, const Matrix& b) {
  const std::size_t n = factor.size();
  if (b.rows() != n) {
    throw Error(ErrorCode::kDimensionMismatch,
                "factor size " + std::to_string(n) + " vs right-hand side " + shape(b));
  }
  Matrix x = b;
  // (L + I)^T is unit upper triangular: row i couples to rows k > i via L(k, i).
  for (std::size_t ii = n; ii-- > 0;) {
    auto xi = x.row(ii);
    for (std::size_t k = ii + 1; k < n; ++k) {
      const double lki = factor.lower(k, ii);
      if (lki == 0.0) continue;
      auto xk = x.row(k);
      for (std::size_t c = 0; c < x.cols(); ++c) xi[c] -= lki * xk[c];
    }
  }
  return x;
}

Matrix tri_solve_unit_lower_right(const Matrix& a, const LdlFactors& factor) {
  const std::size_t n = factor.size();
  if (a.cols() != n) {
    throw Error(ErrorCode::kDimensionMismatch,
                "factor size " + std::to_string(n) + " vs left-hand side " + shape(a));
  }
  Matrix x = a;
  // Column j of X(L + I) is X(:, j) + sum_{k > j} X(:, k) L(k, j).
  for (std::size_t r = 0; r < x.rows(); ++r) {
    auto xr = x.row(r);
    for (std::size_t jj = n; jj-- > 0;) {
      double s = xr[jj];
      for (std::size_t k = jj + 1; k < n; ++k) s -= xr[k] * factor.lower(k, jj);
      xr[jj] = s;
    }
  }
  return x;
}

double proxy_loss(const Matrix& e, const Matrix& h_out, const Matrix& h_in) {
  require_square(h_out, "H_O");
  require_square(h_in, "H_I");
  if (h_out.rows() != e.rows() || h_in.rows() != e.cols()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "proxy_loss: E " + shape(e) + ", H_O " + shape(h_out) + ", H_I " + shape(h_in));
  }
  // sum_{j,l} (E^T H_O E)(j, l) * H_I(j, l)
  const Matrix g = matmul(e.transpose(), matmul(h_out, e));
  double s = 0.0;
  for (std::size_t j = 0; j < g.rows(); ++j)
    for (std::size_t l = 0; l < g.cols(); ++l) s += g(j, l) * h_in(j, l);
  return s;
}

double kron_quadratic_oracle(const Matrix& e, const Matrix& h_out, const Matrix& h_in) {
  const std::size_t m = e.rows();
  const std::size_t n = e.cols();
  if (m * n > kKronOracleMaxDim) {
    throw Error(ErrorCode::kTooLarge, "m*n = " + std::to_string(m * n) + " exceeds " +
                                          std::to_string(kKronOracleMaxDim));
  }
  if (h_out.rows() != m || h_out.cols() != m || h_in.rows() != n || h_in.cols() != n) {
    throw Error(ErrorCode::kDimensionMismatch, "kron_quadratic_oracle: incompatible factors");
  }
  const std::size_t mn = m * n;
  Matrix kron(mn, mn);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < m; ++k)
        for (std::size_t l = 0; l < n; ++l) kron(i * n + j, k * n + l) = h_out(i, k) * h_in(j, l);

  const auto vec = e.data();  // row-major storage is the vec ordering
  double s = 0.0;
  for (std::size_t p = 0; p < mn; ++p) {
    double inner = 0.0;
    for (std::size_t q = 0; q < mn; ++q) inner += kron(p, q) * vec[q];
    s += vec[p] * inner;
  }
  return s;
}

Permutation::Permutation(std::vector<std::size_t> order) : order_(std::move(order)) {
  std::vector<bool> seen(order_.size(), false);
  for (std::size_t idx : order_) {
    if (idx >= order_.size() || seen[idx]) {
      throw Error(ErrorCode::kInvalidPermutation, "order is not a bijection on 0.." +
                                                      std::to_string(order_.size()));
    }
    seen[idx] = true;
  }
}

Permutation Permutation::identity(std::size_t n) {
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  return Permutation(std::move(order));
}

bool Permutation::is_identity() const {
  for (std::size_t i = 0; i < order_.size(); ++i)
    if (order_[i] != i) return false;
  return true;
}

Permutation Permutation::inverse() const {
  std::vector<std::size_t> inv(order_.size());
  for (std::size_t i = 0; i < order_.size(); ++i) inv[order_[i]] = i;
  return Permutation(std::move(inv));
}

Permutation Permutation::compose(const Permutation& other) const {
  if (other.size() != size()) throw Error(ErrorCode::kDimensionMismatch, "compose: size mismatch");
  std::vector<std::size_t> out(size());
  for (std::size_t i = 0; i < size(); ++i) out[i] = order_[other[i]];
  return Permutation(std::move(out));
}

Matrix apply_permutation(const Matrix& w, const Permutation& perm_out, const Permutation& perm_in) {
  if (perm_out.size() != w.rows() || perm_in.size() != w.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "permutation sizes do not match " + shape(w));
  }
  Matrix out(w.rows(), w.cols());
  for (std::size_t i = 0; i < w.rows(); ++i) {
    auto src = w.row(perm_out[i]);
    auto dst = out.row(i);
    for (std::size_t j = 0; j < w.cols(); ++j) dst[j] = src[perm_in[j]];
  }
  return out;
}

}  // namespace sensvq
