// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "sensvq/config.hpp"
#include "sensvq/pipeline.hpp"
#include "sensvq/synthetic.hpp"

namespace sensvq {

/// Seed-sweep protocol for the ablation comparison: one synthetic instance
/// per seed, every arm run on it with the same config and seed.
struct AblationProtocol {
  SyntheticSpec instance;  // seed field is overwritten per run
  QuantConfig config;      // seed field is overwritten per run
  std::vector<Arm> arms{Arm::kFull, Arm::kSsmqOnly, Arm::kGaecOnly, Arm::kUniformVq, Arm::kRtn};

  /// 64x64 two-population layer, 640 samples with rank-16 inputs, average 2 bits.
  static AblationProtocol standard();
};

struct AblationResult {
  std::vector<std::uint64_t> seeds;
  // arm name -> held-out output MSE per seed (same order as seeds)
  std::map<std::string, std::vector<double>> output_mse;

  double median(const std::string& arm) const;
  /// Seeds on which arm `a` has strictly lower output MSE than arm `b`.
  std::size_t wins(const std::string& a, const std::string& b) const;
  nlohmann::json to_json() const;
};

AblationResult run_ablation(const AblationProtocol& protocol, std::uint64_t first_seed, std::size_t seed_count,
                            std::size_t workers);

}  // namespace sensvq
