// SPDX-License-Identifier: Apache-2.0
#include "sensvq/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sensvq/error.hpp"
#include "sensvq/rng.hpp"

namespace sensvq {

namespace {

std::vector<double> residual(const Matrix& w, std::span<const double> x, std::span<const double> y) {
  if (x.size() != w.cols() || y.size() != w.rows()) {
    throw Error(ErrorCode::kDimensionMismatch, "x/y do not match W");
  }
  std::vector<double> r(w.rows());
  for (std::size_t j = 0; j < w.rows(); ++j) {
    auto wr = w.row(j);
    double s = 0.0;
    for (std::size_t i = 0; i < w.cols(); ++i) s += wr[i] * x[i];
    r[j] = s - y[j];
  }
  return r;
}

}  // namespace

double regression_loss(const Matrix& w, std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (double r : residual(w, x, y)) s += r * r;
  return 0.5 * s;
}

Matrix regression_gradient(const Matrix& w, std::span<const double> x, std::span<const double> y) {
  const auto r = residual(w, x, y);
  Matrix g(w.rows(), w.cols());
  for (std::size_t j = 0; j < w.rows(); ++j)
    for (std::size_t i = 0; i < w.cols(); ++i) g(j, i) = r[j] * x[i];
  return g;
}

SyntheticInstance generate_synthetic(const SyntheticSpec& spec) {
  if (spec.rows < 2 || spec.cols < 2) throw Error(ErrorCode::kInvalidArgument, "synthetic dims must be >= 2");
  if (spec.samples < 2) throw Error(ErrorCode::kInvalidArgument, "synthetic instance needs >= 2 samples");
  if (!(spec.heterogeneity > 0.0)) throw Error(ErrorCode::kInvalidArgument, "heterogeneity must be positive");
  if (!(spec.noise_std >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "noise_std must be nonnegative");

  const std::size_t m = spec.rows;
  const std::size_t n = spec.cols;
  SyntheticInstance inst;

  Rng pop_rng(derive_seed(spec.seed, 1));
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i = m - 1; i > 0; --i) std::swap(order[i], order[pop_rng.below(i + 1)]);
  inst.wide_row.assign(m, false);
  for (std::size_t k = 0; k < (m + 1) / 2; ++k) inst.wide_row[order[k]] = true;

  Rng w_rng(derive_seed(spec.seed, 2));
  inst.weights = Matrix(m, n);
  for (std::size_t j = 0; j < m; ++j) {
    const double sd = inst.wide_row[j] ? 1.0 : 1.0 / spec.heterogeneity;
    for (std::size_t i = 0; i < n; ++i) inst.weights(j, i) = sd * w_rng.normal();
  }

  const std::size_t rank = spec.activation_rank;
  Matrix mixing(n, rank);
  Rng mix_rng(derive_seed(spec.seed, 5));
  for (double& b : mixing.data()) b = mix_rng.normal() / std::sqrt(static_cast<double>(std::max<std::size_t>(rank, 1)));
  std::vector<double> latent(rank);

  Rng x_rng(derive_seed(spec.seed, 3));
  Rng noise_rng(derive_seed(spec.seed, 4));
  inst.batch.activations = Matrix(spec.samples, n);
  inst.targets = Matrix(spec.samples, m);
  inst.batch.gradients.reserve(spec.samples);
  for (std::size_t s = 0; s < spec.samples; ++s) {
    auto x = inst.batch.activations.row(s);
    if (rank == 0) {
      for (double& v : x) v = x_rng.normal();
    } else {
      for (double& z : latent) z = x_rng.normal();
      for (std::size_t i = 0; i < n; ++i) {
        auto b = mixing.row(i);
        double acc = 0.0;
        for (std::size_t k = 0; k < rank; ++k) acc += b[k] * latent[k];
        x[i] = acc + spec.activation_floor * x_rng.normal();
      }
    }
    auto y = inst.targets.row(s);
    for (std::size_t j = 0; j < m; ++j) {
      auto wr = inst.weights.row(j);
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) acc += wr[i] * x[i];
      y[j] = acc + spec.noise_std * noise_rng.normal();
    }
    inst.batch.gradients.push_back(regression_gradient(inst.weights, x, y));
  }
  return inst;
}

}  // namespace sensvq
