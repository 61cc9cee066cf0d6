// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "sensvq/config.hpp"
#include "sensvq/gaec.hpp"
#include "sensvq/npy.hpp"
#include "sensvq/pipeline.hpp"
#include "sensvq/report.hpp"
#include "sensvq/rng.hpp"
#include "sensvq/synthetic.hpp"
#include "testing.hpp"

namespace sensvq {
namespace {

SyntheticInstance small_instance(std::uint64_t seed, std::size_t m = 16, std::size_t n = 16,
                                 std::size_t samples = 40) {
  SyntheticSpec spec;
  spec.rows = m;
  spec.cols = n;
  spec.samples = samples;
  spec.seed = seed;
  return generate_synthetic(spec);
}

QuantConfig small_config() {
  QuantConfig c;
  c.vector_len = 2;
  c.kmeans_iters = 20;
  return c;
}

// trace(E^T H_O E H_I) as a quadruple sum.
double proxy_by_loops(const Matrix& e, const Matrix& h_out, const Matrix& h_in) {
  double total = 0.0;
  for (std::size_t a = 0; a < e.rows(); ++a)
    for (std::size_t b = 0; b < e.cols(); ++b)
      for (std::size_t c = 0; c < e.rows(); ++c)
        for (std::size_t d = 0; d < e.cols(); ++d) total += e(a, b) * h_out(a, c) * e(c, d) * h_in(d, b);
  return total;
}

// ---- config ----

TEST(QuantConfig, DefaultsAreValid) {
  const QuantConfig c;
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.vector_len, 4u);
  EXPECT_EQ(c.kmeans_iters, 100);
  EXPECT_EQ(c.target_avg_bits, 2.0);
  EXPECT_EQ(c.bit_budget, 8.0);
  EXPECT_EQ(c.beta, 0.1);
  EXPECT_EQ(c.gaec_max_iters, 10);
  EXPECT_EQ(c.damping_scale, 1e-2);
  EXPECT_EQ(c.eps_norm, 1e-6);
  EXPECT_EQ(c.k_max, 4096u);
  EXPECT_EQ(c.cut_strategy.kind, CutStrategy::Kind::kBalanced);
}

TEST(QuantConfig, EmptyObjectGivesDefaults) {
  EXPECT_EQ(QuantConfig::from_json(nlohmann::json::object()).to_json(), QuantConfig().to_json());
}

TEST(QuantConfig, JsonRoundTrip) {
  QuantConfig c;
  c.vector_len = 8;
  c.target_avg_bits = 3.0;
  c.bit_budget = 12.0;
  c.beta = 0.5;
  c.cut_strategy = CutStrategy::fixed(0.25);
  c.seed = 42;
  c.workers = 3;
  EXPECT_EQ(QuantConfig::from_json(c.to_json()).to_json(), c.to_json());
}

TEST(QuantConfig, UnknownKeyRejected) {
  EXPECT_ERROR_CODE(QuantConfig::from_json({{"vector_length", 4}}), ErrorCode::kInvalidConfig);
  EXPECT_ERROR_CODE(QuantConfig::from_json(nlohmann::json::array()), ErrorCode::kInvalidConfig);
}

TEST(QuantConfig, BitBudgetConsistency) {
  EXPECT_EQ(QuantConfig::from_json({{"target_avg_bits", 3.0}}).bit_budget, 12.0);
  EXPECT_EQ(QuantConfig::from_json({{"bit_budget", 6.0}}).target_avg_bits, 1.5);
  EXPECT_NO_THROW(QuantConfig::from_json({{"bit_budget", 6.0}, {"target_avg_bits", 1.5}}));
  EXPECT_ERROR_CODE(QuantConfig::from_json({{"bit_budget", 6.0}, {"target_avg_bits", 2.0}}),
                    ErrorCode::kInvalidConfig);
}

TEST(QuantConfig, OutOfRangeFieldsRejected) {
  const std::vector<nlohmann::json> bad{
      {{"vector_len", 0}},        {{"beta", 1.5}},          {{"beta", -0.1}},           {{"gaec_max_iters", 0}},
      {{"K_max", 100}},           {{"K_max", 1}},           {{"eps_norm", 0.0}},        {{"damping_scale", -1.0}},
      {{"holdout_fraction", 1.0}}, {{"workers", 0}},         {{"kmeans_init", "random"}}, {{"target_avg_bits", 0.0}},
      {{"cut_strategy", "fixed:2"}}, {{"vector_len", "4"}},   {{"seed", -1}},             {{"kmeans_iters", 1.5}}};
  for (const auto& j : bad) EXPECT_ERROR_CODE(QuantConfig::from_json(j), ErrorCode::kInvalidConfig);
}

TEST(QuantConfig, KmaxAndCutKeys) {
  const QuantConfig c = QuantConfig::from_json({{"K_max", 256}, {"cut_strategy", "fixed:0.5"}});
  EXPECT_EQ(c.k_max, 256u);
  EXPECT_EQ(c.cut_strategy.kind, CutStrategy::Kind::kFixed);
  EXPECT_EQ(c.cut_strategy.fraction, 0.5);
}

TEST(QuantConfig, LoadErrors) {
  EXPECT_ERROR_CODE(QuantConfig::load("/nonexistent/config.json"), ErrorCode::kIoError);
  const auto path = std::filesystem::temp_directory_path() / "sensvq_bad_config.json";
  std::ofstream(path) << "{ not json";
  EXPECT_ERROR_CODE(QuantConfig::load(path.string()), ErrorCode::kInvalidConfig);
  std::filesystem::remove(path);
}

TEST(Arms, NamesRoundTrip) {
  for (Arm a : kAllArms) EXPECT_EQ(parse_arm(arm_name(a)), a);
  EXPECT_ERROR_CODE(parse_arm("gptq"), ErrorCode::kInvalidArgument);
}

// ---- synthetic ----

TEST(Synthetic, ShapesAndPopulations) {
  SyntheticSpec spec;
  spec.rows = 40;
  spec.cols = 30;
  spec.samples = 12;
  spec.heterogeneity = 8.0;
  const SyntheticInstance inst = generate_synthetic(spec);
  EXPECT_EQ(inst.weights.rows(), 40u);
  EXPECT_EQ(inst.weights.cols(), 30u);
  EXPECT_EQ(inst.batch.activations.rows(), 12u);
  EXPECT_EQ(inst.batch.activations.cols(), 30u);
  ASSERT_EQ(inst.batch.gradients.size(), 12u);
  EXPECT_EQ(inst.targets.rows(), 12u);
  EXPECT_EQ(std::count(inst.wide_row.begin(), inst.wide_row.end(), true), 20);

  double wide = 0.0, narrow = 0.0;
  for (std::size_t j = 0; j < 40; ++j) {
    double s = 0.0;
    for (double x : inst.weights.row(j)) s += x * x;
    (inst.wide_row[j] ? wide : narrow) += s;
  }
  // Variance ratio 64 between populations; 600 draws each keeps this far from the bound.
  EXPECT_GT(wide / narrow, 20.0);
}

TEST(Synthetic, Deterministic) {
  const SyntheticInstance a = small_instance(5), b = small_instance(5), c = small_instance(6);
  EXPECT_EQ(a.weights, b.weights);
  EXPECT_EQ(a.batch.activations, b.batch.activations);
  EXPECT_EQ(a.batch.gradients, b.batch.gradients);
  EXPECT_NE(a.weights, c.weights);
}

TEST(Synthetic, NoiselessGradientsVanish) {
  SyntheticSpec spec;
  spec.rows = 8;
  spec.cols = 6;
  spec.samples = 5;
  spec.noise_std = 0.0;
  const SyntheticInstance inst = generate_synthetic(spec);
  for (const Matrix& g : inst.batch.gradients) EXPECT_LT(g.squared_norm(), 1e-24);
}

TEST(Synthetic, GradientMatchesFiniteDifference) {
  const SyntheticInstance inst = small_instance(3, 5, 4, 3);
  const auto x = inst.batch.activations.row(1);
  const auto y = inst.targets.row(1);
  const Matrix g = regression_gradient(inst.weights, x, y);
  EXPECT_EQ(g, inst.batch.gradients[1]);
  const double h = 1e-6;
  for (std::size_t j = 0; j < 5; ++j) {
    for (std::size_t i = 0; i < 4; ++i) {
      Matrix up = inst.weights, down = inst.weights;
      up(j, i) += h;
      down(j, i) -= h;
      const double fd = (regression_loss(up, x, y) - regression_loss(down, x, y)) / (2 * h);
      EXPECT_NEAR(fd, g(j, i), 1e-6 * std::max(1.0, std::abs(g(j, i))));
    }
  }
}

TEST(Synthetic, CorrelatedActivationsAreDeterministic) {
  SyntheticSpec spec;
  spec.rows = 8;
  spec.cols = 8;
  spec.samples = 10;
  spec.activation_rank = 2;
  EXPECT_EQ(generate_synthetic(spec).batch.activations, generate_synthetic(spec).batch.activations);
}

// ---- baselines ----

TEST(Rtn, ExactOnGridValues) {
  EXPECT_EQ(run_baseline_rtn(Matrix{{0, 1}}, 1), (Matrix{{0, 1}}));
  EXPECT_EQ(run_baseline_rtn(Matrix{{0, 1, 2, 3}}, 2), (Matrix{{0, 1, 2, 3}}));
  EXPECT_EQ(run_baseline_rtn(Matrix{{5, 5, 5}}, 3), (Matrix{{5, 5, 5}}));
}

TEST(Rtn, RoundsPerRow) {
  // Row 0 grid {0, 1}: 0.4 -> 0, 0.5 rounds away from zero -> 1.
  EXPECT_EQ(run_baseline_rtn(Matrix{{0, 0.4, 0.5, 1}, {-2, -2, 2, 2}}, 1), (Matrix{{0, 0, 1, 1}, {-2, -2, 2, 2}}));
}

TEST(Rtn, BitsOutOfRange) {
  EXPECT_ERROR_CODE(run_baseline_rtn(Matrix{{0, 1}}, 0), ErrorCode::kInvalidArgument);
  EXPECT_ERROR_CODE(run_baseline_rtn(Matrix{{0, 1}}, 9), ErrorCode::kInvalidArgument);
}

TEST(UniformVq, ExactWithTwoDistinctVectors) {
  const Matrix w{{1, 2, -1, 0}, {1, 2, 1, 2}, {-1, 0, -1, 0}};
  EXPECT_EQ(run_baseline_uniform_vq(w, 0.5, 2, 10, 0), w);
}

TEST(UniformVq, TooManyCodewords) {
  EXPECT_ERROR_CODE(run_baseline_uniform_vq(Matrix(2, 4), 2.0, 2, 10, 0), ErrorCode::kInvalidK);
}

TEST(UniformVq, EqualsSingleBlockUncompensatedPath) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng(seed);
    const Matrix w = oracle::random_matrix(rng, 12, 16);
    const Matrix uvq = run_baseline_uniform_vq(w, 1.5, 2, 15, seed);

    const BlockQuantizer q =
        train_block_quantizer(w, {Region{0, 0, 12, 16}}, {std::size_t{8}}, 2, 15, seed);
    GaecOptions opts;
    opts.beta = 0.0;
    opts.seed = seed;
    const GaecResult g = gaec_run(w, q, LdlFactors::identity(12), LdlFactors::identity(16), opts);
    EXPECT_EQ(g.w_hat, uvq) << "seed " << seed;
  }
}

// ---- evaluation and split ----

TEST(Evaluate, PerfectReconstruction) {
  const SyntheticInstance inst = small_instance(1, 6, 5, 8);
  const HessianFactors f = estimate_hessian_factors(inst.batch);
  const Metrics m = evaluate(inst.weights, inst.weights, inst.batch.activations, f);
  EXPECT_EQ(m.weight_mse, 0.0);
  EXPECT_EQ(m.proxy, 0.0);
  EXPECT_EQ(m.output_mse, 0.0);
}

TEST(Evaluate, IdentityFactorsGiveSquaredError) {
  const Matrix w{{1, 2}, {3, 4}};
  const Matrix w_hat{{1, 1}, {3, 2}};
  const HessianFactors f{Matrix::identity(2), Matrix::identity(2), 1};
  const Metrics m = evaluate(w, w_hat, Matrix{{1, 0}, {1, 1}}, f);
  EXPECT_EQ(m.proxy, 5.0);
  EXPECT_EQ(m.weight_mse, 1.25);
  // E x for x=(1,0): (0,0); x=(1,1): (1,2) -> (0 + 5) / 2 samples / 2 rows.
  EXPECT_EQ(m.output_mse, 1.25);
}

TEST(Evaluate, ProxyMatchesQuadrupleSum) {
  Rng rng(9);
  const Matrix w = oracle::random_matrix(rng, 5, 4), w_hat = oracle::random_matrix(rng, 5, 4);
  const HessianFactors f{oracle::random_spd(rng, 5), oracle::random_spd(rng, 4), 1};
  const double want = proxy_by_loops(w - w_hat, f.h_out, f.h_in);
  EXPECT_NEAR(evaluate(w, w_hat, Matrix(1, 4), f).proxy, want, 1e-12 * std::abs(want));
}

TEST(Evaluate, ShapeMismatch) {
  const HessianFactors f{Matrix::identity(2), Matrix::identity(2), 1};
  EXPECT_ERROR_CODE(evaluate(Matrix(2, 2), Matrix(2, 3), Matrix(1, 2), f), ErrorCode::kDimensionMismatch);
  EXPECT_ERROR_CODE(evaluate(Matrix(2, 2), Matrix(2, 2), Matrix(1, 3), f), ErrorCode::kDimensionMismatch);
}

TEST(SplitCalibration, PartitionsSamples) {
  const SyntheticInstance inst = small_instance(2, 4, 3, 10);
  const CalibrationSplit s = split_calibration(inst.batch, 0.2, 7);
  EXPECT_EQ(s.calibration_indices.size(), 8u);
  EXPECT_EQ(s.heldout_indices.size(), 2u);
  std::set<std::size_t> all(s.calibration_indices.begin(), s.calibration_indices.end());
  all.insert(s.heldout_indices.begin(), s.heldout_indices.end());
  EXPECT_EQ(all.size(), 10u);
  for (std::size_t k = 0; k < 8; ++k) {
    const std::size_t src = s.calibration_indices[k];
    EXPECT_EQ(s.calibration.gradients[k], inst.batch.gradients[src]);
    EXPECT_TRUE(std::equal(s.calibration.activations.row(k).begin(), s.calibration.activations.row(k).end(),
                           inst.batch.activations.row(src).begin()));
  }
  const std::size_t h0 = s.heldout_indices[0];
  EXPECT_TRUE(std::equal(s.heldout.row(0).begin(), s.heldout.row(0).end(), inst.batch.activations.row(h0).begin()));
  EXPECT_EQ(split_calibration(inst.batch, 0.2, 7).heldout_indices, s.heldout_indices);
}

TEST(SplitCalibration, KeepsAtLeastOneOnEachSide) {
  const SyntheticInstance inst = small_instance(2, 4, 3, 3);
  EXPECT_EQ(split_calibration(inst.batch, 0.01, 0).heldout_indices.size(), 1u);
  EXPECT_EQ(split_calibration(inst.batch, 0.99, 0).calibration_indices.size(), 1u);
  const CalibrationBatch one{Matrix(1, 3), {Matrix(4, 3)}};
  EXPECT_ERROR_CODE(split_calibration(one, 0.2, 0), ErrorCode::kEmptyBatch);
  CalibrationBatch bad = inst.batch;
  bad.gradients.pop_back();
  EXPECT_ERROR_CODE(split_calibration(bad, 0.2, 0), ErrorCode::kDimensionMismatch);
}

TEST(CurvatureFactors, ZeroTraceIsIdentity) {
  const LdlFactors f = curvature_factors(Matrix(3, 3), 1e-2);
  EXPECT_EQ(f.lower, LdlFactors::identity(3).lower);
  EXPECT_EQ(f.diag, LdlFactors::identity(3).diag);
}

// ---- end to end ----

TEST(EndToEnd, RepresentableWeightsAreLossless) {
  // Each row is constant at one of two values, so every quadrant holds at most
  // two distinct vectors per row pattern and fits its codebook.
  SyntheticInstance inst = small_instance(4);
  for (std::size_t j = 0; j < inst.weights.rows(); ++j)
    for (double& x : inst.weights.row(j)) x = (j % 3 == 0) ? 0.75 : -0.25;
  const QuantRun run = run_mgvq(inst.weights, inst.batch, small_config(), Arm::kFull, false);
  EXPECT_EQ(run.result.w_hat, inst.weights);
  EXPECT_EQ(run.result.metrics.proxy, 0.0);
}

TEST(EndToEnd, ReorderedOutputIsRepresentable) {
  const SyntheticInstance inst = small_instance(11);
  const QuantConfig config = small_config();
  const QuantRun run = run_mgvq(inst.weights, inst.batch, config, Arm::kFull, false);
  ASSERT_TRUE(run.result.plan.has_value());
  const BlockPlan& plan = *run.result.plan;
  const auto regions = BlockQuantizer::quadrant_regions(16, 16, plan.cut_out, plan.cut_in);
  const BlockQuantizer q(16, 16, regions, run.result.codebooks);
  // Projecting a representable matrix is the identity.
  EXPECT_EQ(q.project(run.result.reordered_w_hat), run.result.reordered_w_hat);
  for (std::size_t t = 0; t < kNumBlocks; ++t) EXPECT_EQ(run.result.codebooks[t].size(), plan.codebook_sizes[t]);
}

TEST(EndToEnd, RestoresChannelOrder) {
  const SyntheticInstance inst = small_instance(12);
  const QuantRun run = run_mgvq(inst.weights, inst.batch, small_config(), Arm::kFull, false);
  const BlockPlan& plan = *run.result.plan;
  for (std::size_t j = 0; j < 16; ++j)
    for (std::size_t i = 0; i < 16; ++i)
      EXPECT_EQ(run.result.reordered_w_hat(j, i), run.result.w_hat(plan.perm_out[j], plan.perm_in[i]));
}

TEST(EndToEnd, PlanIsConsistent) {
  const SyntheticInstance inst = small_instance(13);
  const QuantRun run = run_mgvq(inst.weights, inst.batch, small_config(), Arm::kFull, false);
  const BlockPlan& plan = *run.result.plan;
  double total = 0.0;
  for (double b : plan.continuous_bits) total += b;
  EXPECT_NEAR(total, 8.0, 1e-9);
  for (std::size_t t = 0; t < kNumBlocks; ++t) EXPECT_LE(plan.codebook_sizes[t], plan.requested_sizes[t]);
  EXPECT_GE(run.result.loss_trace.size(), 1u);
  for (double l : run.result.loss_trace) EXPECT_GE(l, run.result.loss_trace[run.result.best_iteration]);
}

TEST(EndToEnd, GaecOnlyUsesNeutralPlan) {
  const SyntheticInstance inst = small_instance(14);
  const QuantRun run = run_mgvq(inst.weights, inst.batch, small_config(), Arm::kGaecOnly, false);
  const BlockPlan& plan = *run.result.plan;
  EXPECT_TRUE(plan.perm_in.is_identity());
  EXPECT_TRUE(plan.perm_out.is_identity());
  EXPECT_EQ(plan.cut_in, 8u);
  EXPECT_EQ(plan.cut_out, 8u);
  for (double b : plan.continuous_bits) EXPECT_EQ(b, 2.0);
  EXPECT_EQ(run.result.w_hat, run.result.reordered_w_hat);
}

TEST(EndToEnd, NoCurvatureAndZeroBetaMatchesPlainProjection) {
  SyntheticInstance inst = small_instance(15);
  for (Matrix& g : inst.batch.gradients) g = Matrix(16, 16);
  QuantConfig config = small_config();
  config.beta = 0.0;
  const QuantRun full = run_mgvq(inst.weights, inst.batch, config, Arm::kFull, false);
  const QuantRun plain = run_mgvq(inst.weights, inst.batch, config, Arm::kSsmqOnly, false);
  EXPECT_EQ(full.result.w_hat, plain.result.w_hat);
  EXPECT_TRUE(full.result.gaec_converged);
}

TEST(EndToEnd, Deterministic) {
  const SyntheticInstance inst = small_instance(16);
  const QuantConfig config = small_config();
  const QuantRun a = run_mgvq(inst.weights, inst.batch, config);
  const QuantRun b = run_mgvq(inst.weights, inst.batch, config);
  EXPECT_EQ(a.result.w_hat, b.result.w_hat);
  EXPECT_EQ(canonical_json(quant_report(config, {{"l", a}})), canonical_json(quant_report(config, {{"l", b}})));
}

TEST(EndToEnd, BaselinesReportedOrExplained) {
  const SyntheticInstance inst = small_instance(17);
  QuantConfig config = small_config();
  config.vector_len = 4;
  config.target_avg_bits = 4.0;
  config.bit_budget = 16.0;
  const QuantRun run = run_mgvq(inst.weights, inst.batch, config);
  ASSERT_EQ(run.arms.size(), 5u);
  // uvq wants 2^16 codewords from 64 vectors.
  EXPECT_FALSE(run.arms.at("uvq").metrics.has_value());
  EXPECT_NE(run.arms.at("uvq").error.find("InvalidK"), std::string::npos);
  EXPECT_TRUE(run.arms.at("rtn").metrics.has_value());
  EXPECT_TRUE(run.arms.at("ssmq-only").metrics.has_value());
}

TEST(QuantizeLayers, WorkersDoNotChangeResults) {
  std::vector<NamedLayer> layers;
  for (std::uint64_t s = 0; s < 3; ++s) {
    SyntheticInstance inst = small_instance(20 + s);
    layers.push_back({"layer" + std::to_string(s), inst.weights, inst.batch});
  }
  QuantConfig config = small_config();
  const auto serial = quantize_layers(layers, config, Arm::kFull, false);
  config.workers = 3;
  const auto threaded = quantize_layers(layers, config, Arm::kFull, false);
  ASSERT_EQ(serial.size(), 3u);
  for (const auto& [name, run] : serial) EXPECT_EQ(run.result.w_hat, threaded.at(name).result.w_hat) << name;
}

TEST(QuantizeLayers, DuplicateNamesRejected) {
  const SyntheticInstance inst = small_instance(1);
  const std::vector<NamedLayer> layers{{"a", inst.weights, inst.batch}, {"a", inst.weights, inst.batch}};
  EXPECT_ERROR_CODE(quantize_layers(layers, small_config()), ErrorCode::kInvalidArgument);
}

// ---- report ----

TEST(Report, CanonicalJsonSortsKeysAndPrintsFullPrecision) {
  const nlohmann::json j{{"b", 1.0}, {"a", 0.1}, {"c", {{"z", nullptr}, {"y", nlohmann::json::array()}}}};
  EXPECT_EQ(canonical_json(j),
            "{\n  \"a\": 0.10000000000000001,\n  \"b\": 1,\n  \"c\": {\n    \"y\": [],\n    \"z\": null\n  }\n}\n");
  EXPECT_EQ(nlohmann::json::parse(canonical_json(j))["a"].get<double>(), 0.1);
}

TEST(Report, TimingsOnlyWhenRequested) {
  const SyntheticInstance inst = small_instance(18);
  QuantConfig config = small_config();
  const QuantRun run = run_mgvq(inst.weights, inst.batch, config, Arm::kFull, false);
  EXPECT_FALSE(quant_report(config, {{"l", run}}).contains("timings_seconds"));
  config.record_timings = true;
  EXPECT_TRUE(quant_report(config, {{"l", run}}).contains("timings_seconds"));
}

TEST(Report, WriteOutputs) {
  const auto dir = std::filesystem::temp_directory_path() / "sensvq_report_test";
  std::filesystem::remove_all(dir);
  const SyntheticInstance inst = small_instance(19);
  const QuantConfig config = small_config();
  const QuantRun run = run_mgvq(inst.weights, inst.batch, config);
  write_outputs(dir, config, "layer", run);

  EXPECT_EQ(npy::load_matrix(dir / "w_hat.npy"), run.result.w_hat);
  const auto books = npy::read(dir / "codebooks.npy");
  ASSERT_EQ(books.shape.size(), 3u);
  EXPECT_EQ(books.shape[0], 4u);
  EXPECT_EQ(books.shape[2], 2u);

  std::ifstream plan_in(dir / "plan.json");
  const nlohmann::json plan = nlohmann::json::parse(plan_in);
  EXPECT_EQ(plan["cut_in"].get<std::size_t>(), run.result.plan->cut_in);
  EXPECT_EQ(plan["perm_out"].get<std::vector<std::size_t>>(), run.result.plan->perm_out.order());

  std::ifstream report_in(dir / "report.json");
  std::stringstream text;
  text << report_in.rdbuf();
  EXPECT_EQ(text.str(), canonical_json(quant_report(config, {{"layer", run}})));
  const nlohmann::json report = nlohmann::json::parse(text.str());
  EXPECT_EQ(report["layers"]["layer"]["arm"], "full");
  EXPECT_EQ(report["layers"]["layer"]["arms"].size(), 5u);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace sensvq
