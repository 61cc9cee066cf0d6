// SPDX-License-Identifier: Apache-2.0
#include "sensvq/sensitivity.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sensvq/error.hpp"

namespace sensvq {

HessianFactors estimate_hessian_factors(const CalibrationBatch& batch) {
  if (batch.gradients.empty()) throw Error(ErrorCode::kEmptyBatch, "no gradient samples");
  const std::size_t m = batch.gradients.front().rows();
  const std::size_t n = batch.gradients.front().cols();
  HessianFactors f{Matrix(m, m), Matrix(n, n), batch.gradients.size()};

  // Accumulate the lower triangles in sample order, then mirror, so both
  // factors are exactly symmetric.
  for (const Matrix& g : batch.gradients) {
    if (g.rows() != m || g.cols() != n) {
      throw Error(ErrorCode::kDimensionMismatch, "gradient samples must all be " + std::to_string(m) + "x" +
                                                     std::to_string(n));
    }
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b <= a; ++b) {
        double s = 0.0;
        for (std::size_t r = 0; r < m; ++r) s += g(r, a) * g(r, b);
        f.h_in(a, b) += s;
      }
    for (std::size_t a = 0; a < m; ++a)
      for (std::size_t b = 0; b <= a; ++b) {
        double s = 0.0;
        auto ra = g.row(a);
        auto rb = g.row(b);
        for (std::size_t c = 0; c < n; ++c) s += ra[c] * rb[c];
        f.h_out(a, b) += s;
      }
  }
  const double inv = 1.0 / static_cast<double>(batch.gradients.size());
  auto finish = [inv](Matrix& h) {
    for (std::size_t a = 0; a < h.rows(); ++a)
      for (std::size_t b = 0; b <= a; ++b) {
        h(a, b) *= inv;
        h(b, a) = h(a, b);
      }
  };
  finish(f.h_in);
  finish(f.h_out);
  return f;
}

ChannelScores global_sensitivity(const HessianFactors& factors) {
  ChannelScores s;
  for (std::size_t i = 0; i < factors.h_in.rows(); ++i) s.in.push_back(factors.h_in(i, i));
  for (std::size_t j = 0; j < factors.h_out.rows(); ++j) s.out.push_back(factors.h_out(j, j));
  return s;
}

ChannelScores local_sensitivity(const Matrix& activations, const Matrix& w) {
  if (activations.cols() != w.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "activations have " + std::to_string(activations.cols()) +
                                                   " channels, W has " + std::to_string(w.cols()) + " inputs");
  }
  const std::size_t samples = activations.rows();
  const std::size_t m = w.rows();
  const std::size_t n = w.cols();
  ChannelScores s{std::vector<double>(n, 0.0), std::vector<double>(m, 0.0)};
  if (samples == 0) return s;
  const double inv = 1.0 / static_cast<double>(samples);

  std::vector<double> x_energy(n, 0.0);
  for (std::size_t t = 0; t < samples; ++t) {
    auto x = activations.row(t);
    for (std::size_t i = 0; i < n; ++i) x_energy[i] += x[i] * x[i];
    for (std::size_t j = 0; j < m; ++j) {
      auto wr = w.row(j);
      double y = 0.0;
      for (std::size_t i = 0; i < n; ++i) y += wr[i] * x[i];
      s.out[j] += y * y;
    }
  }
  for (double& e : s.out) e *= inv;
  for (std::size_t i = 0; i < n; ++i) {
    double col = 0.0;
    for (std::size_t j = 0; j < m; ++j) col += w(j, i) * w(j, i);
    s.in[i] = x_energy[i] * inv * col;
  }
  return s;
}

std::vector<double> minmax_normalize(const std::vector<double>& values, double eps) {
  if (!(eps > 0.0) || !(eps < 1.0)) throw Error(ErrorCode::kInvalidArgument, "eps must lie in (0, 1)");
  if (values.empty()) return {};
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  std::vector<double> out(values.size(), 1.0);
  if (!(hi > lo)) return out;
  const double span = hi - lo;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double t = (values[i] - lo) / span;
    out[i] = std::clamp(eps + (1.0 - eps) * t, eps, 1.0);
  }
  return out;
}

std::vector<double> combine_sensitivity(const std::vector<double>& global, const std::vector<double>& local,
                                        double eps) {
  if (global.size() != local.size()) {
    throw Error(ErrorCode::kLengthMismatch, std::to_string(global.size()) + " vs " + std::to_string(local.size()));
  }
  const auto g = minmax_normalize(global, eps);
  const auto l = minmax_normalize(local, eps);
  std::vector<double> out(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) out[i] = std::log(g[i] * l[i]);
  return out;
}

SensitivityProfile assess_channels(const HessianFactors& factors, const Matrix& activations, const Matrix& w,
                                   double eps) {
  if (factors.h_out.rows() != w.rows() || factors.h_in.rows() != w.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "Hessian factors do not match W");
  }
  const ChannelScores global = global_sensitivity(factors);
  const ChannelScores local = local_sensitivity(activations, w);
  SensitivityProfile p;
  p.global_in = global.in;
  p.global_out = global.out;
  p.local_in = local.in;
  p.local_out = local.out;
  p.fused_in = combine_sensitivity(global.in, local.in, eps);
  p.fused_out = combine_sensitivity(global.out, local.out, eps);
  return p;
}

}  // namespace sensvq
