// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace sensvq {

/// Dense row-major matrix of doubles. Entries are finite on construction.
///
/// Zero-sized matrices are allowed so that empty slices and empty solves
/// compose without special cases.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }

  Matrix transpose() const;
  Matrix block(std::size_t row0, std::size_t col0, std::size_t rows, std::size_t cols) const;
  void set_block(std::size_t row0, std::size_t col0, const Matrix& src);

  double frobenius_norm() const;
  double squared_norm() const;

  // Bitwise equality of shape and entries.
  friend bool operator==(const Matrix& a, const Matrix& b) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix operator+(const Matrix& a, const Matrix& b);
Matrix operator-(const Matrix& a, const Matrix& b);
Matrix operator*(double s, const Matrix& a);
Matrix matmul(const Matrix& a, const Matrix& b);

/// Unit-lower LDL^T factors: H = (L + I) diag(D) (L + I)^T with L strictly lower.
struct LdlFactors {
  Matrix lower;
  std::vector<double> diag;

  std::size_t size() const noexcept { return diag.size(); }

  static LdlFactors identity(std::size_t n);
  /// (L + I) diag(D) (L + I)^T.
  Matrix reconstruct() const;
};

inline constexpr double kDefaultDampingScale = 1e-2;

/// Factor H + lambda*I where lambda = damping_scale * mean(diag(H)).
///
/// H must be symmetric within 1e-8 relative to its largest entry. A pivot at or
/// below 1e-12 times the largest damped diagonal entry raises
/// SingularAfterDamping instead of being clamped.
LdlFactors ldl_decompose(const Matrix& h, double damping_scale = kDefaultDampingScale);

/// Solve (L + I)^T X = B by back-substitution.
Matrix tri_solve_unit_upper(const LdlFactors& factor, const Matrix& b);

/// Solve X (L + I) = A from the right.
Matrix tri_solve_unit_lower_right(const Matrix& a, const LdlFactors& factor);

/// trace(E^T H_O E H_I), i.e. vec(E)^T (H_O kron H_I) vec(E) with row-major vec.
double proxy_loss(const Matrix& e, const Matrix& h_out, const Matrix& h_in);

inline constexpr std::size_t kKronOracleMaxDim = 4096;

/// Materializes H_O kron H_I (row-major vec ordering) and evaluates the
/// quadratic form directly. Reference path only; refuses m*n > 4096.
double kron_quadratic_oracle(const Matrix& e, const Matrix& h_out, const Matrix& h_in);

/// A bijection on {0, ..., size-1}.
class Permutation {
 public:
  Permutation() = default;
  explicit Permutation(std::vector<std::size_t> order);

  static Permutation identity(std::size_t n);

  std::size_t size() const noexcept { return order_.size(); }
  std::size_t operator[](std::size_t i) const { return order_[i]; }
  const std::vector<std::size_t>& order() const noexcept { return order_; }
  bool is_identity() const;

  Permutation inverse() const;
  /// (a.compose(b))[i] = a[b[i]].
  Permutation compose(const Permutation& other) const;

  friend bool operator==(const Permutation&, const Permutation&) = default;

 private:
  std::vector<std::size_t> order_;
};

/// result(i, j) = W(perm_out[i], perm_in[j]).
Matrix apply_permutation(const Matrix& w, const Permutation& perm_out, const Permutation& perm_in);

}  // namespace sensvq
