// SPDX-License-Identifier: Apache-2.0
#include "sensvq/vq.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "sensvq/error.hpp"
#include "sensvq/rng.hpp"

namespace sensvq {

namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    s += d * d;
  }
  return s;
}

struct Nearest {
  std::uint32_t index;
  double distance;
};

Nearest nearest_codeword(std::span<const double> x, const Matrix& codewords) {
  Nearest best{0, std::numeric_limits<double>::infinity()};
  for (std::size_t c = 0; c < codewords.rows(); ++c) {
    const double d = squared_distance(x, codewords.row(c));
    if (d < best.distance) best = {static_cast<std::uint32_t>(c), d};
  }
  return best;
}

}  // namespace

BlockView reshape_blocks(const Matrix& w, std::size_t vector_len) {
  if (vector_len == 0) throw Error(ErrorCode::kInvalidArgument, "vector length must be positive");
  const std::size_t total = w.size();
  const std::size_t count = (total + vector_len - 1) / vector_len;
  std::vector<double> flat(count * vector_len, 0.0);
  std::copy(w.data().begin(), w.data().end(), flat.begin());
  return BlockView{Matrix(count, vector_len, std::move(flat)), w.rows(), w.cols(), vector_len,
                   count * vector_len - total};
}

Matrix unreshape_blocks(const BlockView& view) {
  Matrix out(view.original_rows, view.original_cols);
  std::copy_n(view.blocks.data().begin(), out.size(), out.data().begin());
  return out;
}

Codebook::Codebook(Matrix codewords) : codewords_(std::move(codewords)) {
  if (codewords_.rows() == 0 || codewords_.cols() == 0) {
    throw Error(ErrorCode::kInvalidK, "codebook needs at least one codeword of positive length");
  }
}

int Codebook::index_bits() const {
  int bits = 0;
  while ((std::size_t{1} << bits) < size()) ++bits;
  return bits;
}

Assignment vq_assign(const BlockView& blocks, const Codebook& codebook) {
  if (codebook.vector_len() != blocks.vector_len) {
    throw Error(ErrorCode::kDimensionMismatch, "codeword length " + std::to_string(codebook.vector_len()) +
                                                   " vs block length " + std::to_string(blocks.vector_len));
  }
  Assignment a;
  a.indices.resize(blocks.count());
  for (std::size_t i = 0; i < blocks.count(); ++i)
    a.indices[i] = nearest_codeword(blocks.blocks.row(i), codebook.codewords()).index;
  return a;
}

Matrix vq_reconstruct(const Assignment& assignment, const Codebook& codebook, std::size_t rows,
                      std::size_t cols) {
  const std::size_t v = codebook.vector_len();
  if (assignment.indices.size() * v < rows * cols) {
    throw Error(ErrorCode::kDimensionMismatch, "assignment covers " +
                                                   std::to_string(assignment.indices.size() * v) +
                                                   " entries, need " + std::to_string(rows * cols));
  }
  Matrix out(rows, cols);
  auto dst = out.data();
  const std::size_t total = rows * cols;
  for (std::size_t b = 0; b * v < total; ++b) {
    const std::uint32_t idx = assignment.indices[b];
    if (idx >= codebook.size()) {
      throw Error(ErrorCode::kDimensionMismatch, "index " + std::to_string(idx) + " outside codebook");
    }
    auto cw = codebook.codewords().row(idx);
    for (std::size_t k = 0; k < v && b * v + k < total; ++k) dst[b * v + k] = cw[k];
  }
  return out;
}

double total_distortion(const BlockView& blocks, const Codebook& codebook, const Assignment& assignment) {
  double s = 0.0;
  for (std::size_t i = 0; i < blocks.count(); ++i)
    s += squared_distance(blocks.blocks.row(i), codebook.codewords().row(assignment.indices[i]));
  return s;
}

KmeansResult kmeans_fit_traced(const BlockView& blocks, std::size_t k, int iters, std::uint64_t seed) {
  const std::size_t count = blocks.count();
  const std::size_t v = blocks.vector_len;
  if (count == 0) throw Error(ErrorCode::kInvalidArgument, "k-means needs at least one block");
  if (k == 0 || k > count) {
    throw Error(ErrorCode::kInvalidK, "K = " + std::to_string(k) + " with " + std::to_string(count) +
                                          " vectors; reduce K");
  }
  if (iters < 0) throw Error(ErrorCode::kInvalidArgument, "iteration count must be nonnegative");

  const Matrix& x = blocks.blocks;
  Rng rng(seed);
  Matrix centers(k, v);

  // k-means++ seeding.
  std::vector<double> d2(count, std::numeric_limits<double>::infinity());
  std::vector<bool> chosen(count, false);
  std::size_t pick = rng.below(count);
  for (std::size_t c = 0; c < k; ++c) {
    if (c > 0) {
      double total = 0.0;
      for (double d : d2) total += d;
      if (total > 0.0) {
        const double target = rng.uniform() * total;
        double acc = 0.0;
        pick = count;
        for (std::size_t i = 0; i < count; ++i) {
          if (d2[i] <= 0.0) continue;
          acc += d2[i];
          pick = i;
          if (acc > target) break;
        }
      } else {
        // Every point already coincides with a center; take the first unused one.
        pick = 0;
        while (chosen[pick]) ++pick;
      }
    }
    chosen[pick] = true;
    std::copy(x.row(pick).begin(), x.row(pick).end(), centers.row(c).begin());
    for (std::size_t i = 0; i < count; ++i) d2[i] = std::min(d2[i], squared_distance(x.row(i), centers.row(c)));
  }

  KmeansResult result;
  Assignment& assign = result.assignment;
  assign.indices.assign(count, 0);
  std::vector<double> err(count, 0.0);
  std::vector<std::size_t> members(k);
  Matrix sums(k, v);

  for (int it = 0; it < iters; ++it) {
    bool changed = (it == 0);
    double distortion = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
      const Nearest nn = nearest_codeword(x.row(i), centers);
      if (nn.index != assign.indices[i]) changed = true;
      assign.indices[i] = nn.index;
      distortion += nn.distance;
    }
    result.distortion_trace.push_back(distortion);
    result.iterations_run = it + 1;
    if (!changed) break;

    std::fill(members.begin(), members.end(), 0);
    std::fill(sums.data().begin(), sums.data().end(), 0.0);
    for (std::size_t i = 0; i < count; ++i) {
      const std::size_t c = assign.indices[i];
      ++members[c];
      auto s = sums.row(c);
      auto xi = x.row(i);
      for (std::size_t d = 0; d < v; ++d) s[d] += xi[d];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (members[c] == 0) continue;
      auto center = centers.row(c);
      auto s = sums.row(c);
      for (std::size_t d = 0; d < v; ++d) center[d] = s[d] / static_cast<double>(members[c]);
    }
    for (std::size_t i = 0; i < count; ++i) err[i] = squared_distance(x.row(i), centers.row(assign.indices[i]));
    for (std::size_t c = 0; c < k; ++c) {
      if (members[c] != 0) continue;
      std::size_t worst = 0;
      for (std::size_t i = 1; i < count; ++i)
        if (err[i] > err[worst]) worst = i;
      std::copy(x.row(worst).begin(), x.row(worst).end(), centers.row(c).begin());
      err[worst] = 0.0;
    }
  }
  result.codebook = Codebook(std::move(centers));
  assign = vq_assign(blocks, result.codebook);
  return result;
}

}  // namespace sensvq
