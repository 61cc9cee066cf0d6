// SPDX-License-Identifier: Apache-2.0
// Reference computations for tests. Everything here is written as plain loops
// and deliberately avoids calling the library routine it is used to check.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#include "sensvq/linalg.hpp"
#include "sensvq/rng.hpp"
#include "sensvq/sensitivity.hpp"

namespace sensvq::oracle {

inline Matrix multiply(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
      out(i, j) = s;
    }
  return out;
}

inline Matrix transpose(const Matrix& a) {
  Matrix out(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
  return out;
}

inline double frobenius(const Matrix& a) {
  double s = 0.0;
  for (double x : a.data()) s += x * x;
  return std::sqrt(s);
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

inline double relative_diff(const Matrix& got, const Matrix& want) {
  Matrix d(got.rows(), got.cols());
  for (std::size_t i = 0; i < got.size(); ++i) d.data()[i] = got.data()[i] - want.data()[i];
  return frobenius(d) / std::max(frobenius(want), std::numeric_limits<double>::min());
}

/// L + I for a strictly lower L.
inline Matrix unit_lower(const LdlFactors& f) {
  Matrix out = f.lower;
  for (std::size_t i = 0; i < f.size(); ++i) out(i, i) = 1.0;
  return out;
}

/// (L + I) diag(D) (L + I)^T by explicit loops.
inline Matrix ldl_multiply(const LdlFactors& f) {
  const Matrix u = unit_lower(f);
  const std::size_t n = f.size();
  Matrix out(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < n; ++k) s += u(i, k) * f.diag[k] * u(j, k);
      out(i, j) = s;
    }
  return out;
}

inline Matrix random_matrix(Rng& rng, std::size_t rows, std::size_t cols, double scale = 1.0) {
  Matrix m(rows, cols);
  for (double& x : m.data()) x = scale * rng.normal();
  return m;
}

/// G G^T / n + shift * I for Gaussian G.
inline Matrix random_spd(Rng& rng, std::size_t n, double shift = 0.1) {
  const Matrix g = random_matrix(rng, n, n);
  Matrix h = multiply(g, transpose(g));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) h(i, j) /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) h(i, i) += shift;
  // Exact symmetry; the product above is only symmetric up to rounding.
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j) h(j, i) = h(i, j);
  return h;
}

/// Index of the nearest row of `codewords` to `point`, first index on ties.
inline std::size_t nearest_codeword(const std::vector<double>& point, const Matrix& codewords) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < codewords.rows(); ++k) {
    double d = 0.0;
    for (std::size_t c = 0; c < point.size(); ++c) {
      const double t = point[c] - codewords(k, c);
      d += t * t;
    }
    if (d < best_d) {
      best_d = d;
      best = k;
    }
  }
  return best;
}

/// Minimizer of sum_t S_t / b_t over the lattice b_t in step * {1, 2, ...}
/// with sum_t b_t = budget, step = budget / steps. The objective is separable
/// and convex, so adding one step at a time to the coordinate with the
/// largest decrease reaches the lattice minimizer.
inline std::array<double, 4> grid_allocation(const std::array<double, 4>& s, double budget, int steps = 1000) {
  const double step = budget / steps;
  std::array<int, 4> units{1, 1, 1, 1};
  for (int left = steps - 4; left > 0; --left) {
    std::size_t pick = 0;
    double best_gain = -std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < 4; ++t) {
      const double b = units[t] * step;
      const double gain = s[t] / b - s[t] / (b + step);
      if (gain > best_gain) {
        best_gain = gain;
        pick = t;
      }
    }
    ++units[pick];
  }
  std::array<double, 4> out{};
  for (std::size_t t = 0; t < 4; ++t) out[t] = units[t] * step;
  return out;
}

/// Inverse of a unit lower-triangular matrix by forward substitution.
inline Matrix unit_lower_inverse(const Matrix& lower) {
  const std::size_t n = lower.rows();
  Matrix inv(n, n);
  for (std::size_t col = 0; col < n; ++col) {
    for (std::size_t i = 0; i < n; ++i) {
      double s = (i == col) ? 1.0 : 0.0;
      for (std::size_t k = 0; k < i; ++k) s -= lower(i, k) * inv(k, col);
      inv(i, col) = s;
    }
  }
  return inv;
}

/// Straight-line evaluation of
/// W + Lo^T E Li + Lo^T E + E Li - beta (Lo+I)^{-T} E (Li+I)^{-1}.
inline Matrix eta_reference(const Matrix& w, const Matrix& e, const Matrix& lo, const Matrix& li, double beta) {
  const std::size_t m = w.rows(), n = w.cols();
  Matrix uo = lo, ui = li;
  for (std::size_t i = 0; i < m; ++i) uo(i, i) = 1.0;
  for (std::size_t i = 0; i < n; ++i) ui(i, i) = 1.0;
  const Matrix a = multiply(multiply(transpose(unit_lower_inverse(uo)), e), unit_lower_inverse(ui));
  const Matrix t1 = multiply(multiply(transpose(lo), e), li);
  const Matrix t2 = multiply(transpose(lo), e);
  const Matrix t3 = multiply(e, li);
  Matrix out(m, n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j)
      out(i, j) = w(i, j) + t1(i, j) + t2(i, j) + t3(i, j) - beta * a(i, j);
  return out;
}

/// Per-channel energies by explicit loops over samples.
inline ChannelScores local_energy(const Matrix& x, const Matrix& w) {
  const std::size_t s_count = x.rows(), m = w.rows(), n = w.cols();
  ChannelScores out{std::vector<double>(n, 0.0), std::vector<double>(m, 0.0)};
  for (std::size_t i = 0; i < n; ++i) {
    double mean_sq = 0.0;
    for (std::size_t s = 0; s < s_count; ++s) mean_sq += x(s, i) * x(s, i);
    mean_sq /= static_cast<double>(s_count);
    double col = 0.0;
    for (std::size_t j = 0; j < m; ++j) col += w(j, i) * w(j, i);
    out.in[i] = mean_sq * col;
  }
  for (std::size_t j = 0; j < m; ++j) {
    double acc = 0.0;
    for (std::size_t s = 0; s < s_count; ++s) {
      double y = 0.0;
      for (std::size_t i = 0; i < n; ++i) y += w(j, i) * x(s, i);
      acc += y * y;
    }
    out.out[j] = acc / static_cast<double>(s_count);
  }
  return out;
}

/// sum over the block of out[i] * in[j], by a double loop.
inline double block_sum(const std::vector<double>& out, const std::vector<double>& in, std::size_t r0,
                        std::size_t r1, std::size_t c0, std::size_t c1) {
  double s = 0.0;
  for (std::size_t i = r0; i < r1; ++i)
    for (std::size_t j = c0; j < c1; ++j) s += out[i] * in[j];
  return s;
}

}  // namespace sensvq::oracle
