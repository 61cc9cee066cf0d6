// SPDX-License-Identifier: Apache-2.0
#include "sensvq/bench.hpp"

#include <algorithm>

#include "sensvq/error.hpp"
#include "sensvq/parallel.hpp"

namespace sensvq {

AblationProtocol AblationProtocol::standard() {
  AblationProtocol p;
  p.instance.rows = 64;
  p.instance.cols = 64;
  // Correlated inputs: with isotropic activations the estimated curvature is
  // mostly sampling noise and compensation has nothing to exploit.
  p.instance.samples = 640;
  p.instance.heterogeneity = 8.0;
  p.instance.noise_std = 0.1;
  p.instance.activation_rank = 16;
  p.instance.activation_floor = 0.7;
  p.config.target_avg_bits = 2.0;
  p.config.bit_budget = 8.0;
  p.config.vector_len = 2;
  return p;
}

double AblationResult::median(const std::string& arm) const {
  auto v = output_mse.at(arm);
  if (v.empty()) throw Error(ErrorCode::kInvalidArgument, "no samples for arm " + arm);
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

std::size_t AblationResult::wins(const std::string& a, const std::string& b) const {
  const auto& va = output_mse.at(a);
  const auto& vb = output_mse.at(b);
  std::size_t count = 0;
  for (std::size_t i = 0; i < va.size(); ++i)
    if (va[i] < vb[i]) ++count;
  return count;
}

nlohmann::json AblationResult::to_json() const {
  nlohmann::json j;
  j["seeds"] = seeds;
  nlohmann::json per_arm = nlohmann::json::object();
  for (const auto& [arm, values] : output_mse) {
    per_arm[arm] = {{"output_mse", values}, {"median_output_mse", median(arm)}};
  }
  j["arms"] = per_arm;
  if (output_mse.contains("full") && output_mse.contains("uvq")) j["full_beats_uvq_seeds"] = wins("full", "uvq");
  if (output_mse.contains("full") && output_mse.contains("ssmq-only"))
    j["full_beats_ssmq_only_seeds"] = wins("full", "ssmq-only");
  if (output_mse.contains("ssmq-only") && output_mse.contains("uvq"))
    j["ssmq_only_beats_uvq_seeds"] = wins("ssmq-only", "uvq");
  return j;
}

AblationResult run_ablation(const AblationProtocol& protocol, std::uint64_t first_seed, std::size_t seed_count,
                            std::size_t workers) {
  AblationResult result;
  for (std::size_t k = 0; k < seed_count; ++k) result.seeds.push_back(first_seed + k);
  std::vector<std::map<std::string, double>> per_seed(seed_count);

  parallel_for(seed_count, workers, [&](std::size_t k) {
    SyntheticSpec spec = protocol.instance;
    spec.seed = result.seeds[k];
    QuantConfig config = protocol.config;
    config.seed = result.seeds[k];
    const SyntheticInstance inst = generate_synthetic(spec);
    const PreparedLayer layer = prepare_layer(inst.weights, inst.batch, config);
    for (Arm arm : protocol.arms) per_seed[k][arm_name(arm)] = run_arm(layer, config, arm).metrics.output_mse;
  });

  for (Arm arm : protocol.arms) {
    auto& column = result.output_mse[arm_name(arm)];
    for (const auto& row : per_seed) column.push_back(row.at(arm_name(arm)));
  }
  return result;
}

}  // namespace sensvq
