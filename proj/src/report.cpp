// SPDX-License-Identifier: Apache-2.0
#include "sensvq/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "sensvq/error.hpp"
#include "sensvq/npy.hpp"

namespace sensvq {

namespace {

void emit(const nlohmann::json& j, std::string& out, int depth) {
  const std::string pad(static_cast<std::size_t>(2 * (depth + 1)), ' ');
  const std::string close_pad(static_cast<std::size_t>(2 * depth), ' ');
  switch (j.type()) {
    case nlohmann::json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (const auto& [key, value] : j.items()) {  // std::map backing: keys already sorted
        if (!first) out += ",\n";
        first = false;
        out += pad + nlohmann::json(key).dump() + ": ";
        emit(value, out, depth + 1);
      }
      out += "\n" + close_pad + "}";
      return;
    }
    case nlohmann::json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      for (std::size_t k = 0; k < j.size(); ++k) {
        if (k) out += ",\n";
        out += pad;
        emit(j[k], out, depth + 1);
      }
      out += "\n" + close_pad + "]";
      return;
    }
    case nlohmann::json::value_t::number_float: {
      const double v = j.get<double>();
      if (!std::isfinite(v)) {
        out += "null";
        return;
      }
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", v);
      out += buf;
      return;
    }
    default:
      out += j.dump();
  }
}

template <std::size_t N, typename T>
nlohmann::json array_json(const std::array<T, N>& a) {
  nlohmann::json j = nlohmann::json::array();
  for (const T& x : a) j.push_back(x);
  return j;
}

}  // namespace

std::string canonical_json(const nlohmann::json& j) {
  std::string out;
  emit(j, out, 0);
  out += "\n";
  return out;
}

nlohmann::json plan_to_json(const BlockPlan& plan) {
  return {{"perm_in", plan.perm_in.order()},
          {"perm_out", plan.perm_out.order()},
          {"cut_in", plan.cut_in},
          {"cut_out", plan.cut_out},
          {"block_order", {"top-left", "top-right", "bottom-left", "bottom-right"}},
          {"block_sensitivities", array_json(plan.sensitivities)},
          {"continuous_bits", array_json(plan.continuous_bits)},
          {"bit_budget", plan.bit_budget},
          {"requested_codebook_sizes", array_json(plan.requested_sizes)},
          {"codebook_sizes", array_json(plan.codebook_sizes)},
          {"achieved_bits", array_json(plan.achieved_bits)},
          {"weighted_average_bits", plan.average_bits}};
}

nlohmann::json metrics_to_json(const Metrics& m) {
  return {{"weight_mse", m.weight_mse}, {"proxy_loss", m.proxy}, {"output_mse", m.output_mse}};
}

nlohmann::json layer_report(const QuantRun& run) {
  const LayerResult& r = run.result;
  nlohmann::json j;
  j["arm"] = arm_name(r.arm);
  j["metrics"] = metrics_to_json(r.metrics);
  j["plan"] = r.plan ? plan_to_json(*r.plan) : nlohmann::json(nullptr);
  j["compensation"] = {{"loss_trace", r.loss_trace},
                       {"best_iteration", r.best_iteration},
                       {"iterations", r.gaec_iterations},
                       {"converged", r.gaec_converged}};
  nlohmann::json arms = nlohmann::json::object();
  for (const auto& [name, outcome] : run.arms) {
    arms[name] = outcome.metrics ? metrics_to_json(*outcome.metrics) : nlohmann::json{{"error", outcome.error}};
  }
  j["arms"] = arms;
  return j;
}

nlohmann::json quant_report(const QuantConfig& config, const std::map<std::string, QuantRun>& layers) {
  nlohmann::json j;
  j["config"] = config.to_json();
  j["seeds"] = {{"run", config.seed}, {"rng", "mt19937_64, splitmix64 stream derivation"}};
  nlohmann::json lj = nlohmann::json::object();
  nlohmann::json timings = nlohmann::json::object();
  for (const auto& [name, run] : layers) {
    lj[name] = layer_report(run);
    timings[name] = run.seconds;
  }
  j["layers"] = lj;
  if (config.record_timings) j["timings_seconds"] = timings;
  return j;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::kIoError, "short write to " + path.string());
}

void write_outputs(const std::filesystem::path& dir, const QuantConfig& config, const std::string& layer_name,
                   const QuantRun& run) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIoError, "cannot create " + dir.string() + ": " + ec.message());

  npy::save_matrix(dir / "w_hat.npy", run.result.w_hat);
  write_text(dir / "report.json", canonical_json(quant_report(config, {{layer_name, run}})));

  const auto& books = run.result.codebooks;
  if (!books.empty()) {
    // Stacked and zero-padded to the largest codebook; plan.json records the true sizes.
    std::size_t k = 0;
    for (const Codebook& b : books) k = std::max(k, b.size());
    const std::size_t v = books.front().vector_len();
    std::vector<double> data(books.size() * k * v, 0.0);
    for (std::size_t t = 0; t < books.size(); ++t) {
      const auto cw = books[t].codewords().data();
      std::copy(cw.begin(), cw.end(), data.begin() + static_cast<std::ptrdiff_t>(t * k * v));
    }
    npy::write(dir / "codebooks.npy", {books.size(), k, v}, data);
  }
  if (run.result.plan) {
    write_text(dir / "plan.json", canonical_json(plan_to_json(*run.result.plan)));
  } else if (!books.empty()) {
    write_text(dir / "plan.json", canonical_json({{"arm", arm_name(run.result.arm)},
                                                  {"codebook_sizes", {books.front().size()}}}));
  }
}

}  // namespace sensvq
