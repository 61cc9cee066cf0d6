// SPDX-License-Identifier: Apache-2.0
#include "sensvq/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "sensvq/error.hpp"

namespace sensvq {

namespace {

template <typename T>
T get_field(const nlohmann::json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, std::string("field '") + key + "': " + e.what());
  }
}

std::size_t get_count(const nlohmann::json& j, const char* key) {
  const auto& v = j.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    throw Error(ErrorCode::kInvalidConfig, std::string("field '") + key + "' must be a nonnegative integer");
  }
  return v.get<std::size_t>();
}

int get_int(const nlohmann::json& j, const char* key) {
  const auto& v = j.at(key);
  if (!v.is_number_integer()) throw Error(ErrorCode::kInvalidConfig, std::string("field '") + key + "' must be an integer");
  return v.get<int>();
}

void check(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::kInvalidConfig, what);
}

}  // namespace

void QuantConfig::validate() const {
  check(vector_len >= 1 && vector_len <= 64, "vector_len must be in [1, 64]");
  check(kmeans_iters >= 0, "kmeans_iters must be >= 0");
  check(kmeans_init == "kmeans++", "kmeans_init must be \"kmeans++\"");
  check(std::isfinite(target_avg_bits) && target_avg_bits > 0.0 && target_avg_bits <= 16.0,
        "target_avg_bits must be in (0, 16]");
  check(std::abs(bit_budget - 4.0 * target_avg_bits) <= 1e-9, "bit_budget must equal 4 * target_avg_bits");
  check(std::isfinite(beta) && beta >= 0.0 && beta <= 1.0, "beta must be in [0, 1]");
  check(gaec_max_iters >= 1, "gaec_max_iters must be >= 1");
  check(std::isfinite(damping_scale) && damping_scale >= 0.0, "damping_scale must be >= 0");
  check(eps_norm > 0.0 && eps_norm < 1.0, "eps_norm must be in (0, 1)");
  check(k_max >= 2 && (k_max & (k_max - 1)) == 0 && k_max <= (std::size_t{1} << 24),
        "K_max must be a power of two in [2, 2^24]");
  check(holdout_fraction > 0.0 && holdout_fraction < 1.0, "holdout_fraction must be in (0, 1)");
  check(workers >= 1, "workers must be >= 1");
}

QuantConfig QuantConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorCode::kInvalidConfig, "config must be a JSON object");
  static const std::set<std::string> known = {
      "vector_len", "kmeans_iters",   "kmeans_init", "target_avg_bits",   "bit_budget",        "beta",
      "gaec_max_iters", "damping_scale", "eps_norm", "K_max",            "cut_strategy",      "seed",
      "holdout_fraction", "retrain_codebooks", "workers", "record_timings"};
  for (const auto& item : j.items()) {
    if (!known.contains(item.key())) throw Error(ErrorCode::kInvalidConfig, "unknown key '" + item.key() + "'");
  }

  QuantConfig c;
  if (j.contains("vector_len")) c.vector_len = get_count(j, "vector_len");
  if (j.contains("kmeans_iters")) c.kmeans_iters = get_int(j, "kmeans_iters");
  if (j.contains("kmeans_init")) c.kmeans_init = get_field<std::string>(j, "kmeans_init");
  if (j.contains("target_avg_bits")) c.target_avg_bits = get_field<double>(j, "target_avg_bits");
  if (j.contains("bit_budget")) {
    c.bit_budget = get_field<double>(j, "bit_budget");
    if (!j.contains("target_avg_bits")) c.target_avg_bits = c.bit_budget / 4.0;
  } else {
    c.bit_budget = 4.0 * c.target_avg_bits;
  }
  if (j.contains("beta")) c.beta = get_field<double>(j, "beta");
  if (j.contains("gaec_max_iters")) c.gaec_max_iters = get_int(j, "gaec_max_iters");
  if (j.contains("damping_scale")) c.damping_scale = get_field<double>(j, "damping_scale");
  if (j.contains("eps_norm")) c.eps_norm = get_field<double>(j, "eps_norm");
  if (j.contains("K_max")) c.k_max = get_count(j, "K_max");
  if (j.contains("cut_strategy")) c.cut_strategy = CutStrategy::parse(get_field<std::string>(j, "cut_strategy"));
  if (j.contains("seed")) c.seed = get_count(j, "seed");
  if (j.contains("holdout_fraction")) c.holdout_fraction = get_field<double>(j, "holdout_fraction");
  if (j.contains("retrain_codebooks")) c.retrain_codebooks = get_field<bool>(j, "retrain_codebooks");
  if (j.contains("workers")) c.workers = get_count(j, "workers");
  if (j.contains("record_timings")) c.record_timings = get_field<bool>(j, "record_timings");
  c.validate();
  return c;
}

QuantConfig QuantConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open config " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, path + ": " + e.what());
  }
  return from_json(j);
}

nlohmann::json QuantConfig::to_json() const {
  return {{"vector_len", vector_len},
          {"kmeans_iters", kmeans_iters},
          {"kmeans_init", kmeans_init},
          {"target_avg_bits", target_avg_bits},
          {"bit_budget", bit_budget},
          {"beta", beta},
          {"gaec_max_iters", gaec_max_iters},
          {"damping_scale", damping_scale},
          {"eps_norm", eps_norm},
          {"K_max", k_max},
          {"cut_strategy", cut_strategy.to_string()},
          {"seed", seed},
          {"holdout_fraction", holdout_fraction},
          {"retrain_codebooks", retrain_codebooks},
          {"workers", workers},
          {"record_timings", record_timings}};
}

}  // namespace sensvq
