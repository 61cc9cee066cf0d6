// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "sensvq/linalg.hpp"
#include "sensvq/sensitivity.hpp"

namespace sensvq {

/// Quadrants in serialization order: top-left, top-right, bottom-left, bottom-right.
inline constexpr std::size_t kNumBlocks = 4;
using BlockArray = std::array<double, kNumBlocks>;

struct ChannelOrder {
  Permutation in;
  Permutation out;
};

/// Stable descending sort of the fused scores on each axis.
ChannelOrder reorder_channels(const SensitivityProfile& profile);

/// Descending stable argsort; ties keep the lower original index first.
Permutation descending_order(const std::vector<double>& scores);

/// Strictly positive scores pass through unchanged; otherwise shift by
/// (-min + 1e-6) so every entry is strictly positive.
std::vector<double> shift_nonnegative(const std::vector<double>& scores);

/// S_t = sum over block t of I_out[i] * I_in[j], after shifting each axis to be
/// nonnegative. Computed as (row sum) * (column sum) per block.
BlockArray elementwise_block_sensitivities(const std::vector<double>& out_sorted,
                                           const std::vector<double>& in_sorted, std::size_t cut_out,
                                           std::size_t cut_in);

struct CutStrategy {
  enum class Kind { kBalanced, kFixed };
  Kind kind = Kind::kBalanced;
  double fraction = 0.5;  // only for kFixed

  static CutStrategy balanced() { return {}; }
  static CutStrategy fixed(double f) { return {Kind::kFixed, f}; }
  /// "balanced" or "fixed:<fraction>".
  static CutStrategy parse(const std::string& text);
  std::string to_string() const;
};

struct CutPoints {
  std::size_t out = 0;
  std::size_t in = 0;
};

CutPoints choose_cut_points(const std::vector<double>& out_sorted, const std::vector<double>& in_sorted,
                            const CutStrategy& strategy);

/// Cut along one axis; see choose_cut_points.
std::size_t choose_cut(const std::vector<double>& sorted, const CutStrategy& strategy);

/// b_t = B * sqrt(S_t) / sum_s sqrt(S_s), the minimizer of sum_t S_t / b_t
/// subject to sum_t b_t = B. Entries below 1e-12 * max(S) are raised to that
/// floor first.
BlockArray allocate_bits(const BlockArray& sensitivities, double budget);

struct DiscreteBits {
  std::array<std::size_t, kNumBlocks> codebook_sizes{};
  BlockArray achieved_bits{};
};

/// K_t = 2^clamp(round(b_t * v), 1, log2(K_max)); achieved_t = log2(K_t) / v.
DiscreteBits discretize_bits(const BlockArray& bits, std::size_t vector_len, std::size_t k_max);

/// Element-count weighted mean of the per-block achieved bits.
double weighted_average_bits(const BlockArray& achieved, const std::array<std::size_t, kNumBlocks>& element_counts);

/// Largest power of two not exceeding n (n >= 1).
std::size_t floor_power_of_two(std::size_t n);

/// Everything decided about one layer before codebooks are trained.
struct BlockPlan {
  Permutation perm_in;
  Permutation perm_out;
  std::size_t cut_in = 0;
  std::size_t cut_out = 0;
  BlockArray sensitivities{};
  BlockArray continuous_bits{};
  double bit_budget = 0.0;
  // K_t requested by discretization, before capping at the block's vector count.
  std::array<std::size_t, kNumBlocks> requested_sizes{};
  std::array<std::size_t, kNumBlocks> codebook_sizes{};
  BlockArray achieved_bits{};
  double average_bits = 0.0;
};

}  // namespace sensvq
