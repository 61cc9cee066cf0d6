// SPDX-License-Identifier: Apache-2.0
#include "sensvq/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <set>

#include "sensvq/error.hpp"
#include "sensvq/parallel.hpp"
#include "sensvq/rng.hpp"
#include "sensvq/vq.hpp"

namespace sensvq {

namespace {

constexpr std::uint64_t kSplitStream = 11;

std::vector<double> gather(const std::vector<double>& v, const Permutation& p) {
  std::vector<double> out(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) out[i] = v[p[i]];
  return out;
}

bool uses_compensation(Arm arm) { return arm == Arm::kFull || arm == Arm::kGaecOnly; }

}  // namespace

std::string arm_name(Arm arm) {
  switch (arm) {
    case Arm::kFull: return "full";
    case Arm::kSsmqOnly: return "ssmq-only";
    case Arm::kGaecOnly: return "gaec-only";
    case Arm::kUniformVq: return "uvq";
    case Arm::kRtn: return "rtn";
  }
  return "unknown";
}

Arm parse_arm(const std::string& name) {
  for (Arm a : kAllArms)
    if (arm_name(a) == name) return a;
  throw Error(ErrorCode::kInvalidArgument, "unknown arm '" + name + "'");
}

Metrics evaluate(const Matrix& w, const Matrix& w_hat, const Matrix& heldout, const HessianFactors& factors) {
  if (w.rows() != w_hat.rows() || w.cols() != w_hat.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "W and W_hat differ in shape");
  }
  if (heldout.cols() != w.cols()) throw Error(ErrorCode::kDimensionMismatch, "held-out activations vs W");
  const Matrix e = w - w_hat;
  Metrics m;
  m.weight_mse = e.squared_norm() / static_cast<double>(e.size());
  m.proxy = proxy_loss(e, factors.h_out, factors.h_in);
  if (heldout.rows() > 0) {
    double total = 0.0;
    for (std::size_t s = 0; s < heldout.rows(); ++s) {
      auto x = heldout.row(s);
      for (std::size_t j = 0; j < e.rows(); ++j) {
        auto er = e.row(j);
        double y = 0.0;
        for (std::size_t i = 0; i < e.cols(); ++i) y += er[i] * x[i];
        total += y * y;
      }
    }
    m.output_mse = total / static_cast<double>(heldout.rows()) / static_cast<double>(e.rows());
  }
  return m;
}

CalibrationSplit split_calibration(const CalibrationBatch& batch, double holdout_fraction, std::uint64_t seed) {
  const std::size_t samples = batch.activations.rows();
  if (samples != batch.gradients.size()) {
    throw Error(ErrorCode::kDimensionMismatch, std::to_string(samples) + " activation samples vs " +
                                                   std::to_string(batch.gradients.size()) + " gradient samples");
  }
  if (samples < 2) throw Error(ErrorCode::kEmptyBatch, "need at least 2 samples to hold one out");
  std::vector<std::size_t> order(samples);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(derive_seed(seed, kSplitStream));
  for (std::size_t i = samples - 1; i > 0; --i) std::swap(order[i], order[rng.below(i + 1)]);

  const auto held = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::llround(holdout_fraction * static_cast<double>(samples))), 1, samples - 1);
  const std::size_t calib = samples - held;
  CalibrationSplit split;
  split.calibration_indices.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(calib));
  split.heldout_indices.assign(order.begin() + static_cast<std::ptrdiff_t>(calib), order.end());
  std::sort(split.calibration_indices.begin(), split.calibration_indices.end());
  std::sort(split.heldout_indices.begin(), split.heldout_indices.end());

  const std::size_t n = batch.activations.cols();
  split.calibration.activations = Matrix(calib, n);
  for (std::size_t k = 0; k < calib; ++k) {
    const std::size_t s = split.calibration_indices[k];
    std::copy(batch.activations.row(s).begin(), batch.activations.row(s).end(),
              split.calibration.activations.row(k).begin());
    split.calibration.gradients.push_back(batch.gradients[s]);
  }
  split.heldout = Matrix(held, n);
  for (std::size_t k = 0; k < held; ++k) {
    const std::size_t s = split.heldout_indices[k];
    std::copy(batch.activations.row(s).begin(), batch.activations.row(s).end(), split.heldout.row(k).begin());
  }
  return split;
}

Matrix run_baseline_rtn(const Matrix& w, int bits) {
  if (bits < 1 || bits > 8) throw Error(ErrorCode::kInvalidArgument, "RTN bits must be in [1, 8]");
  const double top = static_cast<double>((1 << bits) - 1);
  Matrix out(w.rows(), w.cols());
  for (std::size_t j = 0; j < w.rows(); ++j) {
    auto src = w.row(j);
    auto dst = out.row(j);
    if (src.empty()) continue;
    const auto [lo_it, hi_it] = std::minmax_element(src.begin(), src.end());
    const double lo = *lo_it;
    const double scale = (*hi_it - lo) / top;
    for (std::size_t i = 0; i < src.size(); ++i) {
      if (scale == 0.0) {
        dst[i] = lo;
        continue;
      }
      // std::round rounds halves away from zero.
      const double q = std::clamp(std::round((src[i] - lo) / scale), 0.0, top);
      dst[i] = lo + q * scale;
    }
  }
  return out;
}

Matrix run_baseline_uniform_vq(const Matrix& w, double bits, std::size_t vector_len, int iters, std::uint64_t seed) {
  const long long index_bits = std::llround(bits * static_cast<double>(vector_len));
  if (index_bits < 0 || index_bits > 30) throw Error(ErrorCode::kInvalidArgument, "codebook index width out of range");
  const BlockView view = reshape_blocks(w, vector_len);
  const Codebook book = kmeans_fit(view, std::size_t{1} << index_bits, iters, codebook_seed(seed, 0));
  return vq_reconstruct(vq_assign(view, book), book, w.rows(), w.cols());
}

LdlFactors curvature_factors(const Matrix& h, double damping_scale) {
  double trace = 0.0;
  for (std::size_t i = 0; i < h.rows(); ++i) trace += h(i, i);
  if (!(trace > 0.0)) return LdlFactors::identity(h.rows());
  return ldl_decompose(h, damping_scale);
}

BlockPlan plan_layer(const Matrix& w, const HessianFactors& factors, const Matrix& activations,
                     const QuantConfig& config, bool sensitivity_driven) {
  const std::size_t m = w.rows();
  const std::size_t n = w.cols();
  if (m < 2 || n < 2) throw Error(ErrorCode::kCutOutOfRange, "block plans need at least 2 rows and 2 columns");
  const SensitivityProfile profile = assess_channels(factors, activations, w, config.eps_norm);

  BlockPlan plan;
  if (sensitivity_driven) {
    const ChannelOrder order = reorder_channels(profile);
    plan.perm_in = order.in;
    plan.perm_out = order.out;
  } else {
    plan.perm_in = Permutation::identity(n);
    plan.perm_out = Permutation::identity(m);
  }
  const auto out_sorted = gather(profile.fused_out, plan.perm_out);
  const auto in_sorted = gather(profile.fused_in, plan.perm_in);
  if (sensitivity_driven) {
    const CutPoints cuts = choose_cut_points(out_sorted, in_sorted, config.cut_strategy);
    plan.cut_out = cuts.out;
    plan.cut_in = cuts.in;
  } else {
    plan.cut_out = std::clamp<std::size_t>(m / 2, 1, m - 1);
    plan.cut_in = std::clamp<std::size_t>(n / 2, 1, n - 1);
  }
  plan.sensitivities = elementwise_block_sensitivities(out_sorted, in_sorted, plan.cut_out, plan.cut_in);
  plan.bit_budget = config.bit_budget;
  if (sensitivity_driven) {
    plan.continuous_bits = allocate_bits(plan.sensitivities, config.bit_budget);
  } else {
    plan.continuous_bits.fill(config.bit_budget / static_cast<double>(kNumBlocks));
  }

  const DiscreteBits disc = discretize_bits(plan.continuous_bits, config.vector_len, config.k_max);
  plan.requested_sizes = disc.codebook_sizes;
  const auto regions = BlockQuantizer::quadrant_regions(m, n, plan.cut_out, plan.cut_in);
  std::array<std::size_t, kNumBlocks> elements{};
  for (std::size_t t = 0; t < kNumBlocks; ++t) {
    elements[t] = regions[t].rows * regions[t].cols;
    const std::size_t vectors = (elements[t] + config.vector_len - 1) / config.vector_len;
    // k-means cannot place more codewords than there are vectors.
    plan.codebook_sizes[t] = std::min(disc.codebook_sizes[t], floor_power_of_two(vectors));
    int index_bits = 0;
    while ((std::size_t{1} << index_bits) < plan.codebook_sizes[t]) ++index_bits;
    plan.achieved_bits[t] = static_cast<double>(index_bits) / static_cast<double>(config.vector_len);
  }
  plan.average_bits = weighted_average_bits(plan.achieved_bits, elements);
  return plan;
}

PreparedLayer prepare_layer(const Matrix& w, const CalibrationBatch& batch, const QuantConfig& config) {
  config.validate();
  if (batch.activations.cols() != w.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "activations have " + std::to_string(batch.activations.cols()) +
                                                   " channels, W has " + std::to_string(w.cols()) + " inputs");
  }
  for (const Matrix& g : batch.gradients) {
    if (g.rows() != w.rows() || g.cols() != w.cols()) {
      throw Error(ErrorCode::kDimensionMismatch, "gradient samples must match W's shape");
    }
  }
  PreparedLayer layer{w, split_calibration(batch, config.holdout_fraction, config.seed), {}};
  layer.factors = estimate_hessian_factors(layer.split.calibration);
  return layer;
}

LayerResult run_arm(const PreparedLayer& layer, const QuantConfig& config, Arm arm) {
  const Matrix& w = layer.weights;
  LayerResult r;
  r.arm = arm;

  if (arm == Arm::kRtn) {
    const int bits = static_cast<int>(std::clamp<long long>(std::llround(config.target_avg_bits), 1, 8));
    r.w_hat = run_baseline_rtn(w, bits);
    r.reordered_w_hat = r.w_hat;
  } else if (arm == Arm::kUniformVq) {
    const BlockView view = reshape_blocks(w, config.vector_len);
    const long long index_bits = std::llround(config.target_avg_bits * static_cast<double>(config.vector_len));
    const Codebook book = kmeans_fit(view, std::size_t{1} << index_bits, config.kmeans_iters,
                                     codebook_seed(config.seed, 0));
    r.w_hat = vq_reconstruct(vq_assign(view, book), book, w.rows(), w.cols());
    r.reordered_w_hat = r.w_hat;
    r.codebooks = {book};
  } else {
    BlockPlan plan = plan_layer(w, layer.factors, layer.split.calibration.activations, config, arm != Arm::kGaecOnly);
    const Matrix w_sorted = apply_permutation(w, plan.perm_out, plan.perm_in);
    const auto regions = BlockQuantizer::quadrant_regions(w.rows(), w.cols(), plan.cut_out, plan.cut_in);
    const std::vector<std::size_t> sizes(plan.codebook_sizes.begin(), plan.codebook_sizes.end());
    const BlockQuantizer quantizer =
        train_block_quantizer(w_sorted, regions, sizes, config.vector_len, config.kmeans_iters, config.seed);

    // Curvature follows the channels into the sorted coordinate system.
    const LdlFactors ldl_out = curvature_factors(
        apply_permutation(layer.factors.h_out, plan.perm_out, plan.perm_out), config.damping_scale);
    const LdlFactors ldl_in =
        curvature_factors(apply_permutation(layer.factors.h_in, plan.perm_in, plan.perm_in), config.damping_scale);

    if (uses_compensation(arm)) {
      GaecOptions opts;
      opts.beta = config.beta;
      opts.max_iters = config.gaec_max_iters;
      opts.retrain_codebooks = config.retrain_codebooks;
      opts.kmeans_iters = config.kmeans_iters;
      opts.seed = config.seed;
      GaecResult g = gaec_run(w_sorted, quantizer, ldl_out, ldl_in, opts);
      r.reordered_w_hat = std::move(g.w_hat);
      r.codebooks = g.quantizer.codebooks();
      r.loss_trace = std::move(g.loss_trace);
      r.best_iteration = g.best_iteration;
      r.gaec_iterations = g.iterations;
      r.gaec_converged = g.converged;
    } else {
      r.reordered_w_hat = quantizer.project(w_sorted);
      r.codebooks = quantizer.codebooks();
      r.loss_trace = {factored_proxy_loss(w_sorted - r.reordered_w_hat, ldl_out, ldl_in)};
    }
    r.w_hat = apply_permutation(r.reordered_w_hat, plan.perm_out.inverse(), plan.perm_in.inverse());
    r.plan = std::move(plan);
  }
  r.metrics = evaluate(w, r.w_hat, layer.split.heldout, layer.factors);
  return r;
}

QuantRun run_mgvq(const Matrix& w, const CalibrationBatch& batch, const QuantConfig& config, Arm arm,
                  bool with_baselines) {
  const auto start = std::chrono::steady_clock::now();
  const PreparedLayer layer = prepare_layer(w, batch, config);
  QuantRun run;
  run.result = run_arm(layer, config, arm);
  run.arms[arm_name(arm)] = ArmOutcome{run.result.metrics, {}};
  if (with_baselines) {
    for (Arm other : kAllArms) {
      if (other == arm) continue;
      try {
        run.arms[arm_name(other)] = ArmOutcome{run_arm(layer, config, other).metrics, {}};
      } catch (const Error& e) {
        run.arms[arm_name(other)] = ArmOutcome{std::nullopt, e.what()};
      }
    }
  }
  run.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return run;
}

std::map<std::string, QuantRun> quantize_layers(const std::vector<NamedLayer>& layers, const QuantConfig& config,
                                                Arm arm, bool with_baselines) {
  std::set<std::string> names;
  for (const NamedLayer& layer : layers) {
    if (!names.insert(layer.name).second) {
      throw Error(ErrorCode::kInvalidArgument, "duplicate layer name '" + layer.name + "'");
    }
  }
  std::vector<QuantRun> runs(layers.size());
  parallel_for(layers.size(), config.workers, [&](std::size_t i) {
    runs[i] = run_mgvq(layers[i].weights, layers[i].batch, config, arm, with_baselines);
  });
  std::map<std::string, QuantRun> out;
  for (std::size_t i = 0; i < layers.size(); ++i) out.emplace(layers[i].name, std::move(runs[i]));
  return out;
}

}  // namespace sensvq
