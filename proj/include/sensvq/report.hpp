// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "json.hpp"
#include "sensvq/config.hpp"
#include "sensvq/pipeline.hpp"

namespace sensvq {

/// JSON text with sorted keys, two-space indentation, and every double
/// printed with 17 significant digits. Identical values give identical text.
std::string canonical_json(const nlohmann::json& j);

nlohmann::json plan_to_json(const BlockPlan& plan);
nlohmann::json metrics_to_json(const Metrics& m);

/// Report for one quantized layer: plan, loss trace, metrics, comparison arms.
nlohmann::json layer_report(const QuantRun& run);

/// Full report: config echo, seeds, and the per-layer entries.
nlohmann::json quant_report(const QuantConfig& config, const std::map<std::string, QuantRun>& layers);

/// Writes w_hat.npy, report.json, codebooks.npy and plan.json for a single
/// layer into `dir` (created if missing). RTN runs have no codebooks or plan.
void write_outputs(const std::filesystem::path& dir, const QuantConfig& config, const std::string& layer_name,
                   const QuantRun& run);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace sensvq
