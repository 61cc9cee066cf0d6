// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "sensvq/linalg.hpp"
#include "sensvq/vq.hpp"

namespace sensvq {

/// Rectangular region of a matrix quantized with one codebook.
struct Region {
  std::size_t row0 = 0;
  std::size_t col0 = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
};

/// Indices chosen for every region, in region order.
using BlockAssignments = std::vector<Assignment>;

/// The projection Q onto matrices whose regions are each built from
/// codewords of that region's codebook.
class BlockQuantizer {
 public:
  BlockQuantizer(std::size_t rows, std::size_t cols, std::vector<Region> regions, std::vector<Codebook> codebooks);

  /// One region covering the whole matrix.
  static BlockQuantizer single(std::size_t rows, std::size_t cols, Codebook codebook);
  /// The 2x2 layout split at (cut_out, cut_in); codebooks in TL, TR, BL, BR order.
  static BlockQuantizer quadrants(std::size_t rows, std::size_t cols, std::size_t cut_out, std::size_t cut_in,
                                  std::vector<Codebook> codebooks);
  static std::vector<Region> quadrant_regions(std::size_t rows, std::size_t cols, std::size_t cut_out,
                                              std::size_t cut_in);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t vector_len() const noexcept { return codebooks_.front().vector_len(); }
  const std::vector<Region>& regions() const noexcept { return regions_; }
  const std::vector<Codebook>& codebooks() const noexcept { return codebooks_; }

  struct Projection {
    Matrix value;
    BlockAssignments assignments;
  };
  Projection project_with_indices(const Matrix& eta) const;
  Matrix project(const Matrix& eta) const { return project_with_indices(eta).value; }

  /// Same layout, codebooks refit by k-means on the regions of `target`.
  BlockQuantizer refit(const Matrix& target, int kmeans_iters, std::uint64_t seed) const;

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<Region> regions_;
  std::vector<Codebook> codebooks_;
};

/// Seed of the k-means stream for region `region` of a run seeded with `seed`.
std::uint64_t codebook_seed(std::uint64_t seed, std::size_t region);

/// Trains one codebook per region on the corresponding part of `w`.
BlockQuantizer train_block_quantizer(const Matrix& w, const std::vector<Region>& regions,
                                     const std::vector<std::size_t>& sizes, std::size_t vector_len, int kmeans_iters,
                                     std::uint64_t seed);

Matrix project(const Matrix& eta, const BlockQuantizer& quantizer);

/// A = (L_O + I)^{-T} E (L_I + I)^{-1}, by two triangular solves.
Matrix compute_a(const Matrix& e, const LdlFactors& ldl_out, const LdlFactors& ldl_in);

/// W + L_O^T E L_I + L_O^T E + E L_I, the curvature feedback target without
/// any first-order correction.
Matrix compute_eta_second_order(const Matrix& w, const Matrix& e, const LdlFactors& ldl_out,
                                const LdlFactors& ldl_in);

/// The second-order target minus T = beta * A.
Matrix compute_eta(const Matrix& w, const Matrix& e, const LdlFactors& ldl_out, const LdlFactors& ldl_in,
                   double beta);

/// sum_ij D_O(i) D_I(j) Z_ij^2 with Z = (L_O + I)^T E (L_I + I); equals
/// trace(E^T H_O E H_I) for the factored (damped) H.
double factored_proxy_loss(const Matrix& e, const LdlFactors& ldl_out, const LdlFactors& ldl_in);

inline constexpr double kDefaultBeta = 0.1;
inline constexpr int kDefaultGaecIters = 10;

struct GaecOptions {
  double beta = kDefaultBeta;
  int max_iters = kDefaultGaecIters;
  // When false the target drops the T term entirely (reference path for beta = 0).
  bool first_order_correction = true;
  // Refit codebooks on eta at every step instead of keeping them fixed.
  bool retrain_codebooks = false;
  int kmeans_iters = kDefaultKmeansIters;
  std::uint64_t seed = 0;
};

struct GaecResult {
  Matrix w_hat;                 // lowest-loss iterate
  Matrix final_iterate;         // last iterate computed
  BlockQuantizer quantizer;     // quantizer that produced w_hat
  // Entry t is the proxy loss of iterate t; entry 0 is the plain projection Q(W).
  std::vector<double> loss_trace;
  std::vector<Matrix> trajectory;  // iterates in order, only when requested
  std::size_t best_iteration = 0;
  int iterations = 0;
  bool converged = false;
};

/// Fixed-point iteration W_hat <- Q(eta(W - W_hat)) starting from Q(W).
/// Halts when every block index is unchanged or after max_iters steps, and
/// returns the iterate with the lowest factored proxy loss.
GaecResult gaec_run(const Matrix& w, const BlockQuantizer& quantizer, const LdlFactors& ldl_out,
                    const LdlFactors& ldl_in, const GaecOptions& options, bool keep_trajectory = false);

}  // namespace sensvq
