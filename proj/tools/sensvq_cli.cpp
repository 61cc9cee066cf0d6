// SPDX-License-Identifier: Apache-2.0
//
// sensvq command-line driver.
//
//   sensvq quantize --weights W.npy --activations X.npy --gradients G.npy [--config c.json] --out DIR
//   sensvq synth --m 64 --n 64 --samples 160 --heterogeneity 8 --seed 0 --out DIR
//   sensvq bench --suite ablation --seeds 100 --out DIR
//
// Exit status: 0 success, 2 invalid input, 1 internal error.

#include <filesystem>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "sensvq/bench.hpp"
#include "sensvq/config.hpp"
#include "sensvq/error.hpp"
#include "sensvq/npy.hpp"
#include "sensvq/pipeline.hpp"
#include "sensvq/report.hpp"
#include "sensvq/synthetic.hpp"

namespace fs = std::filesystem;
using namespace sensvq;

namespace {

struct QuantizeArgs {
  std::string weights;
  std::string activations;
  std::string gradients;
  std::string config;
  std::string out;
  std::string baseline = "full";
  bool no_compare = false;
};

struct SynthArgs {
  SyntheticSpec spec;
  std::string out;
};

struct BenchArgs {
  std::string suite = "ablation";
  std::size_t seeds = 100;
  std::uint64_t first_seed = 0;
  std::size_t workers = 1;
  std::string config;
  std::string out;
  std::optional<std::size_t> samples;
  std::optional<std::size_t> activation_rank;
  std::optional<double> heterogeneity;
  std::optional<double> activation_floor;
};

int run_quantize(const QuantizeArgs& a) {
  QuantConfig config = a.config.empty() ? QuantConfig{} : QuantConfig::load(a.config);
  const Matrix w = npy::load_matrix(a.weights);
  CalibrationBatch batch{npy::load_matrix(a.activations), npy::load_stack(a.gradients)};
  const Arm arm = parse_arm(a.baseline);
  const QuantRun run = run_mgvq(w, batch, config, arm, !a.no_compare);
  write_outputs(a.out, config, fs::path(a.weights).stem().string(), run);

  const Metrics& m = run.result.metrics;
  std::cout << arm_name(arm) << ": weight_mse=" << m.weight_mse << " proxy=" << m.proxy
            << " output_mse=" << m.output_mse << "\n";
  if (run.result.plan) std::cout << "average bits " << run.result.plan->average_bits << "\n";
  std::cout << "wrote " << a.out << "\n";
  return 0;
}

int run_synth(const SynthArgs& a) {
  const SyntheticInstance inst = generate_synthetic(a.spec);
  fs::create_directories(a.out);
  npy::save_matrix(fs::path(a.out) / "weights.npy", inst.weights);
  npy::save_matrix(fs::path(a.out) / "activations.npy", inst.batch.activations);
  npy::save_stack(fs::path(a.out) / "gradients.npy", inst.batch.gradients);
  npy::save_matrix(fs::path(a.out) / "targets.npy", inst.targets);
  std::cout << "wrote " << a.spec.rows << "x" << a.spec.cols << " instance with " << a.spec.samples
            << " samples to " << a.out << "\n";
  return 0;
}

int run_bench(const BenchArgs& a) {
  if (a.suite != "ablation") throw Error(ErrorCode::kInvalidArgument, "unknown suite '" + a.suite + "'");
  AblationProtocol protocol = AblationProtocol::standard();
  if (!a.config.empty()) protocol.config = QuantConfig::load(a.config);
  if (a.samples) protocol.instance.samples = *a.samples;
  if (a.activation_rank) protocol.instance.activation_rank = *a.activation_rank;
  if (a.heterogeneity) protocol.instance.heterogeneity = *a.heterogeneity;
  if (a.activation_floor) protocol.instance.activation_floor = *a.activation_floor;
  const AblationResult result = run_ablation(protocol, a.first_seed, a.seeds, a.workers);

  nlohmann::json j = result.to_json();
  j["protocol"] = {{"rows", protocol.instance.rows},
                   {"cols", protocol.instance.cols},
                   {"samples", protocol.instance.samples},
                   {"heterogeneity", protocol.instance.heterogeneity},
                   {"noise_std", protocol.instance.noise_std},
                   {"activation_rank", protocol.instance.activation_rank},
                   {"activation_floor", protocol.instance.activation_floor},
                   {"config", protocol.config.to_json()}};
  fs::create_directories(a.out);
  write_text(fs::path(a.out) / "bench.json", canonical_json(j));

  for (const auto& [arm, values] : result.output_mse) {
    std::cout << arm << ": median output_mse " << result.median(arm) << "\n";
  }
  if (result.output_mse.contains("full") && result.output_mse.contains("uvq")) {
    std::cout << "full beats uvq on " << result.wins("full", "uvq") << "/" << result.seeds.size() << " seeds\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sensitivity-structured vector quantization with gradient-aware error compensation"};
  app.require_subcommand(1);

  QuantizeArgs qa;
  auto* quantize = app.add_subcommand("quantize", "Quantize one weight matrix");
  quantize->add_option("--weights", qa.weights, "Weight matrix (m x n .npy)")->required()->check(CLI::ExistingFile);
  quantize->add_option("--activations", qa.activations, "Activations (S x n .npy)")->required()->check(CLI::ExistingFile);
  quantize->add_option("--gradients", qa.gradients, "Per-sample gradients (S x m x n .npy)")
      ->required()
      ->check(CLI::ExistingFile);
  quantize->add_option("--config", qa.config, "QuantConfig JSON")->check(CLI::ExistingFile);
  quantize->add_option("--out", qa.out, "Output directory")->required();
  quantize->add_option("--baseline", qa.baseline, "Arm whose output is written")
      ->check(CLI::IsMember({"full", "rtn", "uvq", "ssmq-only", "gaec-only"}));
  quantize->add_flag("--no-compare", qa.no_compare, "Skip the comparison arms in the report");

  SynthArgs sa;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic calibration instance");
  synth->add_option("--m", sa.spec.rows, "Output channels")->check(CLI::Range(2, 1 << 16));
  synth->add_option("--n", sa.spec.cols, "Input channels")->check(CLI::Range(2, 1 << 16));
  synth->add_option("--samples", sa.spec.samples, "Calibration samples")->check(CLI::Range(2, 1 << 20));
  synth->add_option("--heterogeneity", sa.spec.heterogeneity, "Std ratio between the row populations")
      ->check(CLI::PositiveNumber);
  synth->add_option("--noise", sa.spec.noise_std, "Target noise std")->check(CLI::NonNegativeNumber);
  synth->add_option("--activation-rank", sa.spec.activation_rank, "Rank of the activation mixing (0 = iid)");
  synth->add_option("--activation-floor", sa.spec.activation_floor, "Isotropic activation floor when rank > 0")
      ->check(CLI::NonNegativeNumber);
  synth->add_option("--seed", sa.spec.seed, "Seed");
  synth->add_option("--out", sa.out, "Output directory")->required();

  BenchArgs ba;
  auto* bench = app.add_subcommand("bench", "Run the seed-sweep ablation protocol");
  bench->add_option("--suite", ba.suite, "Suite name")->check(CLI::IsMember({"ablation"}));
  bench->add_option("--seeds", ba.seeds, "Number of seeds")->check(CLI::Range(1, 100000));
  bench->add_option("--first-seed", ba.first_seed, "First seed");
  bench->add_option("--workers", ba.workers, "Worker threads")->check(CLI::Range(1, 1024));
  bench->add_option("--config", ba.config, "Override the protocol's QuantConfig")->check(CLI::ExistingFile);
  bench->add_option("--samples", ba.samples, "Override samples per instance")->check(CLI::Range(2, 1 << 20));
  bench->add_option("--activation-rank", ba.activation_rank, "Override the activation mixing rank");
  bench->add_option("--activation-floor", ba.activation_floor, "Override the activation noise floor")
      ->check(CLI::NonNegativeNumber);
  bench->add_option("--heterogeneity", ba.heterogeneity, "Override the row-population std ratio")
      ->check(CLI::PositiveNumber);
  bench->add_option("--out", ba.out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*quantize) return run_quantize(qa);
    if (*synth) return run_synth(sa);
    if (*bench) return run_bench(ba);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
