// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "sensvq/linalg.hpp"
#include "sensvq/sensitivity.hpp"

namespace sensvq {

struct SyntheticSpec {
  std::size_t rows = 64;          // m, output channels
  std::size_t cols = 64;          // n, input channels
  std::size_t samples = 160;      // S
  double heterogeneity = 8.0;     // second row population has std 1/heterogeneity
  double noise_std = 0.1;
  // 0 draws iid N(0, 1) activations; r > 0 draws x = B z / sqrt(r) + floor * u
  // with a fixed random n x r mixing matrix B, giving correlated channels.
  std::size_t activation_rank = 0;
  double activation_floor = 0.1;
  std::uint64_t seed = 0;
};

struct SyntheticInstance {
  Matrix weights;            // m x n
  CalibrationBatch batch;    // activations S x n, gradients S x (m x n)
  Matrix targets;            // S x m
  std::vector<bool> wide_row;  // true for rows drawn with std 1
};

/// Linear layer y = W x + noise with a two-population W. Half of the rows
/// (a seeded random subset) have std 1, the rest std 1/heterogeneity.
/// Gradient samples are those of l_s = 0.5 ||W x_s - y_s||^2 at W.
SyntheticInstance generate_synthetic(const SyntheticSpec& spec);

/// 0.5 ||W x - y||^2.
double regression_loss(const Matrix& w, std::span<const double> x, std::span<const double> y);

/// (W x - y) x^T.
Matrix regression_gradient(const Matrix& w, std::span<const double> x, std::span<const double> y);

}  // namespace sensvq
