// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include "json.hpp"
#include "sensvq/structure.hpp"

namespace sensvq {

struct QuantConfig {
  std::size_t vector_len = 4;
  int kmeans_iters = 100;
  std::string kmeans_init = "kmeans++";
  double target_avg_bits = 2.0;
  double bit_budget = 8.0;  // always 4 * target_avg_bits
  double beta = 0.1;
  int gaec_max_iters = 10;
  double damping_scale = 1e-2;
  double eps_norm = 1e-6;
  std::size_t k_max = 4096;
  CutStrategy cut_strategy = CutStrategy::balanced();
  std::uint64_t seed = 0;
  double holdout_fraction = 0.2;
  bool retrain_codebooks = false;
  std::size_t workers = 1;
  bool record_timings = false;

  /// Throws InvalidConfig on any out-of-range field.
  void validate() const;

  /// Every key optional; unknown keys are rejected. bit_budget may be given
  /// instead of (or consistently with) target_avg_bits.
  static QuantConfig from_json(const nlohmann::json& j);
  static QuantConfig load(const std::string& path);
  nlohmann::json to_json() const;
};

}  // namespace sensvq
