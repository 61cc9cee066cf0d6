// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "sensvq/linalg.hpp"

namespace sensvq {

inline constexpr std::size_t kDefaultVectorLen = 4;
inline constexpr int kDefaultKmeansIters = 100;

/// A matrix flattened row-major and chopped into length-v sub-vectors.
/// The last sub-vector is zero-padded when v does not divide rows*cols.
struct BlockView {
  Matrix blocks;  // M x v
  std::size_t original_rows = 0;
  std::size_t original_cols = 0;
  std::size_t vector_len = 0;
  std::size_t pad_count = 0;

  std::size_t count() const noexcept { return blocks.rows(); }
};

BlockView reshape_blocks(const Matrix& w, std::size_t vector_len);

/// Inverse of reshape_blocks: drops the padding and restores the shape.
Matrix unreshape_blocks(const BlockView& view);

class Codebook {
 public:
  Codebook() = default;
  explicit Codebook(Matrix codewords);

  const Matrix& codewords() const noexcept { return codewords_; }
  std::size_t size() const noexcept { return codewords_.rows(); }
  std::size_t vector_len() const noexcept { return codewords_.cols(); }
  /// ceil(log2(K)); exact for the power-of-two sizes the pipeline produces.
  int index_bits() const;

  friend bool operator==(const Codebook&, const Codebook&) = default;

 private:
  Matrix codewords_;
};

struct Assignment {
  std::vector<std::uint32_t> indices;

  friend bool operator==(const Assignment&, const Assignment&) = default;
};

struct KmeansResult {
  Codebook codebook;
  Assignment assignment;  // assignment of the final iteration
  // Total distortion after the assignment step of each executed iteration.
  std::vector<double> distortion_trace;
  int iterations_run = 0;
};

/// k-means++ seeding (D^2 sampling) followed by up to `iters` Lloyd steps.
/// Stops early once assignments stop changing. Empty clusters are moved to
/// the point with the largest current error. Throws InvalidK when K > M.
KmeansResult kmeans_fit_traced(const BlockView& blocks, std::size_t k, int iters, std::uint64_t seed);

inline Codebook kmeans_fit(const BlockView& blocks, std::size_t k, int iters, std::uint64_t seed) {
  return kmeans_fit_traced(blocks, k, iters, seed).codebook;
}

/// Nearest codeword per block under squared Euclidean distance; exact ties
/// go to the lowest codeword index.
Assignment vq_assign(const BlockView& blocks, const Codebook& codebook);

Matrix vq_reconstruct(const Assignment& assignment, const Codebook& codebook, std::size_t rows,
                      std::size_t cols);

/// Sum over blocks of the squared distance to the assigned codeword.
double total_distortion(const BlockView& blocks, const Codebook& codebook, const Assignment& assignment);

}  // namespace sensvq
