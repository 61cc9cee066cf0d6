// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <vector>

#include "sensvq/linalg.hpp"

namespace sensvq {

/// Calibration data for one weight matrix W (m x n).
struct CalibrationBatch {
  Matrix activations;              // S x n, one input sample per row
  std::vector<Matrix> gradients;   // per-sample dL/dW, each m x n
};

/// Kronecker curvature factors, H ~ H_O kron H_I.
struct HessianFactors {
  Matrix h_out;  // m x m
  Matrix h_in;   // n x n
  std::size_t sample_count = 0;
};

struct SensitivityProfile {
  std::vector<double> global_in;   // diag(H_I)
  std::vector<double> global_out;  // diag(H_O)
  std::vector<double> local_in;
  std::vector<double> local_out;
  std::vector<double> fused_in;
  std::vector<double> fused_out;
};

inline constexpr double kDefaultNormEps = 1e-6;

/// H_I = mean(g^T g), H_O = mean(g g^T) over the gradient samples.
HessianFactors estimate_hessian_factors(const CalibrationBatch& batch);

struct ChannelScores {
  std::vector<double> in;
  std::vector<double> out;
};

ChannelScores global_sensitivity(const HessianFactors& factors);

/// Input channel i: mean(x_i^2) * ||W(:, i)||^2. Output channel j: mean((W(j, :) x)^2).
ChannelScores local_sensitivity(const Matrix& activations, const Matrix& w);

/// Affine map of [min, max] onto [eps, 1]; a constant vector maps to all ones.
std::vector<double> minmax_normalize(const std::vector<double>& values, double eps);

/// log(norm(global) * norm(local)) element-wise.
std::vector<double> combine_sensitivity(const std::vector<double>& global, const std::vector<double>& local,
                                        double eps = kDefaultNormEps);

/// Runs all of the above on one layer.
SensitivityProfile assess_channels(const HessianFactors& factors, const Matrix& activations, const Matrix& w,
                                   double eps = kDefaultNormEps);

}  // namespace sensvq
