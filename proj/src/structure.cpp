// SPDX-License-Identifier: Apache-2.0
#include "sensvq/structure.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "sensvq/error.hpp"

namespace sensvq {

Permutation descending_order(const std::vector<double>& scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&scores](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return Permutation(std::move(order));
}

ChannelOrder reorder_channels(const SensitivityProfile& profile) {
  return {descending_order(profile.fused_in), descending_order(profile.fused_out)};
}

std::vector<double> shift_nonnegative(const std::vector<double>& scores) {
  if (scores.empty()) return {};
  const double lo = *std::min_element(scores.begin(), scores.end());
  if (lo > 0.0) return scores;
  std::vector<double> out(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) out[i] = scores[i] - lo + 1e-6;
  return out;
}

BlockArray elementwise_block_sensitivities(const std::vector<double>& out_sorted,
                                           const std::vector<double>& in_sorted, std::size_t cut_out,
                                           std::size_t cut_in) {
  if (cut_out == 0 || cut_out >= out_sorted.size() || cut_in == 0 || cut_in >= in_sorted.size()) {
    throw Error(ErrorCode::kCutOutOfRange, "cuts (" + std::to_string(cut_out) + ", " + std::to_string(cut_in) +
                                               ") outside (0, " + std::to_string(out_sorted.size()) + ") x (0, " +
                                               std::to_string(in_sorted.size()) + ")");
  }
  const auto o = shift_nonnegative(out_sorted);
  const auto i = shift_nonnegative(in_sorted);
  const auto cut_o = o.begin() + static_cast<std::ptrdiff_t>(cut_out);
  const auto cut_i = i.begin() + static_cast<std::ptrdiff_t>(cut_in);
  const double top = std::accumulate(o.begin(), cut_o, 0.0);
  const double bottom = std::accumulate(cut_o, o.end(), 0.0);
  const double left = std::accumulate(i.begin(), cut_i, 0.0);
  const double right = std::accumulate(cut_i, i.end(), 0.0);
  return {top * left, top * right, bottom * left, bottom * right};
}

CutStrategy CutStrategy::parse(const std::string& text) {
  if (text == "balanced") return balanced();
  const std::string prefix = "fixed:";
  if (text.rfind(prefix, 0) == 0) {
    std::size_t used = 0;
    double f = 0.0;
    try {
      f = std::stod(text.substr(prefix.size()), &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == text.size() - prefix.size() && f > 0.0 && f < 1.0) return fixed(f);
  }
  throw Error(ErrorCode::kInvalidConfig, "cut_strategy must be \"balanced\" or \"fixed:<f>\" with 0<f<1, got \"" +
                                             text + "\"");
}

std::string CutStrategy::to_string() const {
  if (kind == Kind::kBalanced) return "balanced";
  std::ostringstream os;
  os << "fixed:" << fraction;
  return os.str();
}

std::size_t choose_cut(const std::vector<double>& sorted, const CutStrategy& strategy) {
  const std::size_t dim = sorted.size();
  if (dim < 2) throw Error(ErrorCode::kCutOutOfRange, "cannot cut an axis of size " + std::to_string(dim));
  std::size_t cut = 0;
  if (strategy.kind == CutStrategy::Kind::kFixed) {
    cut = static_cast<std::size_t>(std::llround(strategy.fraction * static_cast<double>(dim)));
  } else {
    const auto shifted = shift_nonnegative(sorted);
    const double total = std::accumulate(shifted.begin(), shifted.end(), 0.0);
    // Relative slack absorbs summation-order rounding on evenly spread mass.
    const double half = 0.5 * total * (1.0 - 1e-12);
    double acc = 0.0;
    cut = dim;
    for (std::size_t k = 0; k < dim; ++k) {
      acc += shifted[k];
      if (acc >= half) {
        cut = k + 1;
        break;
      }
    }
  }
  return std::clamp<std::size_t>(cut, 1, dim - 1);
}

CutPoints choose_cut_points(const std::vector<double>& out_sorted, const std::vector<double>& in_sorted,
                            const CutStrategy& strategy) {
  return {choose_cut(out_sorted, strategy), choose_cut(in_sorted, strategy)};
}

BlockArray allocate_bits(const BlockArray& sensitivities, double budget) {
  if (!(budget > 0.0) || !std::isfinite(budget)) throw Error(ErrorCode::kInvalidArgument, "bit budget must be positive");
  double hi = 0.0;
  for (double s : sensitivities) {
    if (!(s >= 0.0) || !std::isfinite(s)) {
      throw Error(ErrorCode::kInvalidArgument, "block sensitivities must be finite and nonnegative");
    }
    hi = std::max(hi, s);
  }
  if (!(hi > 0.0)) throw Error(ErrorCode::kAllZeroSensitivity, "every block sensitivity is zero");
  const double floor = 1e-12 * hi;
  BlockArray root{};
  double total = 0.0;
  for (std::size_t t = 0; t < kNumBlocks; ++t) {
    root[t] = std::sqrt(std::max(sensitivities[t], floor));
    total += root[t];
  }
  BlockArray bits{};
  for (std::size_t t = 0; t < kNumBlocks; ++t) bits[t] = budget * root[t] / total;
  return bits;
}

DiscreteBits discretize_bits(const BlockArray& bits, std::size_t vector_len, std::size_t k_max) {
  if (vector_len == 0) throw Error(ErrorCode::kInvalidArgument, "vector length must be positive");
  if (k_max < 2 || (k_max & (k_max - 1)) != 0) {
    throw Error(ErrorCode::kInvalidArgument, "K_max must be a power of two >= 2");
  }
  long long max_index_bits = 0;
  while ((std::size_t{1} << max_index_bits) < k_max) ++max_index_bits;

  DiscreteBits out;
  for (std::size_t t = 0; t < kNumBlocks; ++t) {
    const long long index_bits =
        std::clamp<long long>(std::llround(bits[t] * static_cast<double>(vector_len)), 1, max_index_bits);
    out.codebook_sizes[t] = std::size_t{1} << index_bits;
    out.achieved_bits[t] = static_cast<double>(index_bits) / static_cast<double>(vector_len);
  }
  return out;
}

double weighted_average_bits(const BlockArray& achieved, const std::array<std::size_t, kNumBlocks>& element_counts) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t t = 0; t < kNumBlocks; ++t) {
    num += achieved[t] * static_cast<double>(element_counts[t]);
    den += static_cast<double>(element_counts[t]);
  }
  return den > 0.0 ? num / den : 0.0;
}

std::size_t floor_power_of_two(std::size_t n) {
  if (n == 0) throw Error(ErrorCode::kInvalidArgument, "floor_power_of_two(0)");
  std::size_t p = 1;
  while (p <= n / 2) p <<= 1;
  return p;
}

}  // namespace sensvq
