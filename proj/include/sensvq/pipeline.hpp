// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "sensvq/config.hpp"
#include "sensvq/gaec.hpp"
#include "sensvq/linalg.hpp"
#include "sensvq/sensitivity.hpp"
#include "sensvq/structure.hpp"

namespace sensvq {

/// Which quantizer produces the output of a run.
enum class Arm {
  kFull,       // sensitivity-driven blocks + error compensation
  kSsmqOnly,   // sensitivity-driven blocks, plain projection
  kGaecOnly,   // identity order, midpoint cuts, equal bits, error compensation
  kUniformVq,  // one k-means codebook over the whole matrix
  kRtn,        // per-row asymmetric round-to-nearest
};

std::string arm_name(Arm arm);
Arm parse_arm(const std::string& name);
inline constexpr Arm kAllArms[] = {Arm::kFull, Arm::kSsmqOnly, Arm::kGaecOnly, Arm::kUniformVq, Arm::kRtn};

struct Metrics {
  double weight_mse = 0.0;  // ||W - W_hat||_F^2 / (m n)
  double proxy = 0.0;       // trace(E^T H_O E H_I) with the undamped factors
  double output_mse = 0.0;  // mean_s ||(W - W_hat) x_s||^2 / m over held-out samples
};

/// Metrics of W_hat against W; `heldout` holds one activation sample per row.
Metrics evaluate(const Matrix& w, const Matrix& w_hat, const Matrix& heldout, const HessianFactors& factors);

struct CalibrationSplit {
  CalibrationBatch calibration;
  Matrix heldout;  // activations only
  std::vector<std::size_t> calibration_indices;
  std::vector<std::size_t> heldout_indices;
};

/// Seeded shuffle of sample indices; the last round(S * holdout_fraction)
/// (at least 1, at most S - 1) samples are held out.
CalibrationSplit split_calibration(const CalibrationBatch& batch, double holdout_fraction, std::uint64_t seed);

/// Per-row asymmetric min/max uniform quantization with 2^bits levels.
Matrix run_baseline_rtn(const Matrix& w, int bits);

/// One codebook of 2^round(bits * v) codewords over all blocks of W.
Matrix run_baseline_uniform_vq(const Matrix& w, double bits, std::size_t vector_len, int iters, std::uint64_t seed);

/// Dampens and factors H; an all-zero H (no gradient signal) factors as identity.
LdlFactors curvature_factors(const Matrix& h, double damping_scale);

/// Reorder, cut, and allocate bits for one layer. With `sensitivity_driven`
/// false the plan uses identity orders, midpoint cuts and equal bits.
BlockPlan plan_layer(const Matrix& w, const HessianFactors& factors, const Matrix& activations,
                     const QuantConfig& config, bool sensitivity_driven);

struct LayerResult {
  Arm arm = Arm::kFull;
  Matrix w_hat;                        // original channel order
  std::optional<BlockPlan> plan;       // block-structured arms only
  Matrix reordered_w_hat;              // W_hat in the plan's channel order
  std::vector<Codebook> codebooks;     // VQ arms only
  std::vector<double> loss_trace;      // factored (damped) proxy loss per iterate
  std::size_t best_iteration = 0;
  int gaec_iterations = 0;
  bool gaec_converged = false;
  Metrics metrics;
};

/// Calibration statistics shared by every arm of one layer.
struct PreparedLayer {
  Matrix weights;
  CalibrationSplit split;
  HessianFactors factors;  // from the calibration split
};

PreparedLayer prepare_layer(const Matrix& w, const CalibrationBatch& batch, const QuantConfig& config);

LayerResult run_arm(const PreparedLayer& layer, const QuantConfig& config, Arm arm);

struct ArmOutcome {
  std::optional<Metrics> metrics;
  std::string error;  // set when the arm could not run (e.g. InvalidK)
};

struct QuantRun {
  LayerResult result;                        // the selected arm
  std::map<std::string, ArmOutcome> arms;    // metrics of every arm, keyed by name
  double seconds = 0.0;
};

/// Runs the selected arm and, when `with_baselines`, every other arm for comparison.
QuantRun run_mgvq(const Matrix& w, const CalibrationBatch& batch, const QuantConfig& config,
                  Arm arm = Arm::kFull, bool with_baselines = true);

struct NamedLayer {
  std::string name;
  Matrix weights;
  CalibrationBatch batch;
};

/// Independent layers on config.workers threads, keyed by layer name.
std::map<std::string, QuantRun> quantize_layers(const std::vector<NamedLayer>& layers, const QuantConfig& config,
                                                Arm arm = Arm::kFull, bool with_baselines = true);

}  // namespace sensvq
