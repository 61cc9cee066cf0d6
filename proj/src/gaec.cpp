// SPDX-License-Identifier: Apache-2.0
#include "sensvq/gaec.hpp"

#include <string>

#include "sensvq/error.hpp"
#include "sensvq/rng.hpp"

namespace sensvq {

namespace {

void require_conformable(const Matrix& e, const LdlFactors& ldl_out, const LdlFactors& ldl_in) {
  if (ldl_out.size() != e.rows() || ldl_in.size() != e.cols()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "factors " + std::to_string(ldl_out.size()) + "/" + std::to_string(ldl_in.size()) + " vs residual " +
                    std::to_string(e.rows()) + "x" + std::to_string(e.cols()));
  }
}

}  // namespace

BlockQuantizer::BlockQuantizer(std::size_t rows, std::size_t cols, std::vector<Region> regions,
                               std::vector<Codebook> codebooks)
    : rows_(rows), cols_(cols), regions_(std::move(regions)), codebooks_(std::move(codebooks)) {
  if (regions_.empty() || regions_.size() != codebooks_.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "need exactly one codebook per region");
  }
  std::size_t covered = 0;
  for (const Region& r : regions_) {
    if (r.row0 + r.rows > rows_ || r.col0 + r.cols > cols_ || r.rows == 0 || r.cols == 0) {
      throw Error(ErrorCode::kDimensionMismatch, "region outside the matrix or empty");
    }
    covered += r.rows * r.cols;
  }
  if (covered != rows_ * cols_) throw Error(ErrorCode::kDimensionMismatch, "regions must tile the matrix");
  for (const Codebook& c : codebooks_) {
    if (c.vector_len() != codebooks_.front().vector_len()) {
      throw Error(ErrorCode::kDimensionMismatch, "codebooks disagree on vector length");
    }
  }
}

BlockQuantizer BlockQuantizer::single(std::size_t rows, std::size_t cols, Codebook codebook) {
  return BlockQuantizer(rows, cols, {Region{0, 0, rows, cols}}, {std::move(codebook)});
}

std::vector<Region> BlockQuantizer::quadrant_regions(std::size_t rows, std::size_t cols, std::size_t cut_out,
                                                     std::size_t cut_in) {
  if (cut_out == 0 || cut_out >= rows || cut_in == 0 || cut_in >= cols) {
    throw Error(ErrorCode::kCutOutOfRange, "cuts must lie strictly inside the matrix");
  }
  return {Region{0, 0, cut_out, cut_in}, Region{0, cut_in, cut_out, cols - cut_in},
          Region{cut_out, 0, rows - cut_out, cut_in}, Region{cut_out, cut_in, rows - cut_out, cols - cut_in}};
}

BlockQuantizer BlockQuantizer::quadrants(std::size_t rows, std::size_t cols, std::size_t cut_out,
                                         std::size_t cut_in, std::vector<Codebook> codebooks) {
  return BlockQuantizer(rows, cols, quadrant_regions(rows, cols, cut_out, cut_in), std::move(codebooks));
}

BlockQuantizer::Projection BlockQuantizer::project_with_indices(const Matrix& eta) const {
  if (eta.rows() != rows_ || eta.cols() != cols_) {
    throw Error(ErrorCode::kDimensionMismatch, "projection target does not match the quantizer layout");
  }
  Projection p{Matrix(rows_, cols_), {}};
  p.assignments.reserve(regions_.size());
  for (std::size_t t = 0; t < regions_.size(); ++t) {
    const Region& r = regions_[t];
    const BlockView view = reshape_blocks(eta.block(r.row0, r.col0, r.rows, r.cols), codebooks_[t].vector_len());
    Assignment a = vq_assign(view, codebooks_[t]);
    p.value.set_block(r.row0, r.col0, vq_reconstruct(a, codebooks_[t], r.rows, r.cols));
    p.assignments.push_back(std::move(a));
  }
  return p;
}

BlockQuantizer BlockQuantizer::refit(const Matrix& target, int kmeans_iters, std::uint64_t seed) const {
  std::vector<std::size_t> sizes;
  for (const Codebook& c : codebooks_) sizes.push_back(c.size());
  return train_block_quantizer(target, regions_, sizes, vector_len(), kmeans_iters, seed);
}

std::uint64_t codebook_seed(std::uint64_t seed, std::size_t region) { return derive_seed(seed, 0x100 + region); }

BlockQuantizer train_block_quantizer(const Matrix& w, const std::vector<Region>& regions,
                                     const std::vector<std::size_t>& sizes, std::size_t vector_len, int kmeans_iters,
                                     std::uint64_t seed) {
  if (sizes.size() != regions.size()) throw Error(ErrorCode::kDimensionMismatch, "one size per region");
  std::vector<Codebook> books;
  books.reserve(regions.size());
  for (std::size_t t = 0; t < regions.size(); ++t) {
    const Region& r = regions[t];
    const BlockView view = reshape_blocks(w.block(r.row0, r.col0, r.rows, r.cols), vector_len);
    books.push_back(kmeans_fit(view, sizes[t], kmeans_iters, codebook_seed(seed, t)));
  }
  return BlockQuantizer(w.rows(), w.cols(), regions, std::move(books));
}

Matrix project(const Matrix& eta, const BlockQuantizer& quantizer) { return quantizer.project(eta); }

Matrix compute_a(const Matrix& e, const LdlFactors& ldl_out, const LdlFactors& ldl_in) {
  require_conformable(e, ldl_out, ldl_in);
  return tri_solve_unit_lower_right(tri_solve_unit_upper(ldl_out, e), ldl_in);
}

Matrix compute_eta_second_order(const Matrix& w, const Matrix& e, const LdlFactors& ldl_out,
                                const LdlFactors& ldl_in) {
  require_conformable(e, ldl_out, ldl_in);
  if (w.rows() != e.rows() || w.cols() != e.cols()) throw Error(ErrorCode::kDimensionMismatch, "W vs E");
  const Matrix lo_t = ldl_out.lower.transpose();
  const Matrix lo_e = matmul(lo_t, e);          // L_O^T E
  const Matrix lo_e_li = matmul(lo_e, ldl_in.lower);  // L_O^T E L_I
  const Matrix e_li = matmul(e, ldl_in.lower);  // E L_I
  Matrix eta = w;
  auto out = eta.data();
  auto a = lo_e_li.data();
  auto b = lo_e.data();
  auto c = e_li.data();
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = out[k] + a[k] + b[k] + c[k];
  return eta;
}

Matrix compute_eta(const Matrix& w, const Matrix& e, const LdlFactors& ldl_out, const LdlFactors& ldl_in,
                   double beta) {
  if (!(beta >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "beta must be nonnegative");
  Matrix eta = compute_eta_second_order(w, e, ldl_out, ldl_in);
  const Matrix a = compute_a(e, ldl_out, ldl_in);
  auto out = eta.data();
  auto ad = a.data();
  for (std::size_t k = 0; k < out.size(); ++k) out[k] -= beta * ad[k];
  return eta;
}

double factored_proxy_loss(const Matrix& e, const LdlFactors& ldl_out, const LdlFactors& ldl_in) {
  require_conformable(e, ldl_out, ldl_in);
  // Z = (L_O + I)^T E (L_I + I) = E + L_O^T E + E L_I + L_O^T E L_I
  const Matrix lo_e = matmul(ldl_out.lower.transpose(), e);
  const Matrix z_left = e + lo_e;
  const Matrix z = z_left + matmul(z_left, ldl_in.lower);
  double s = 0.0;
  for (std::size_t i = 0; i < z.rows(); ++i)
    for (std::size_t j = 0; j < z.cols(); ++j) s += ldl_out.diag[i] * ldl_in.diag[j] * z(i, j) * z(i, j);
  return s;
}

GaecResult gaec_run(const Matrix& w, const BlockQuantizer& quantizer, const LdlFactors& ldl_out,
                    const LdlFactors& ldl_in, const GaecOptions& options, bool keep_trajectory) {
  if (options.max_iters < 1) throw Error(ErrorCode::kInvalidArgument, "max_iters must be at least 1");
  if (!(options.beta >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "beta must be nonnegative");
  if (w.rows() != quantizer.rows() || w.cols() != quantizer.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "W does not match the quantizer layout");
  }
  require_conformable(w, ldl_out, ldl_in);

  BlockQuantizer q = quantizer;
  auto start = q.project_with_indices(w);
  GaecResult result{start.value, start.value, q, {}, {}, 0, 0, false};
  Matrix current = std::move(start.value);
  BlockAssignments indices = std::move(start.assignments);
  Matrix e = w - current;
  result.loss_trace.push_back(factored_proxy_loss(e, ldl_out, ldl_in));
  if (keep_trajectory) result.trajectory.push_back(current);

  for (int it = 0; it < options.max_iters; ++it) {
    const Matrix eta = options.first_order_correction ? compute_eta(w, e, ldl_out, ldl_in, options.beta)
                                                      : compute_eta_second_order(w, e, ldl_out, ldl_in);
    if (options.retrain_codebooks) q = q.refit(eta, options.kmeans_iters, derive_seed(options.seed, it + 1));
    auto next = q.project_with_indices(eta);
    result.iterations = it + 1;
    const bool same = next.assignments == indices && (!options.retrain_codebooks || next.value == current);
    current = std::move(next.value);
    indices = std::move(next.assignments);
    e = w - current;
    const double loss = factored_proxy_loss(e, ldl_out, ldl_in);
    result.loss_trace.push_back(loss);
    if (keep_trajectory) result.trajectory.push_back(current);
    if (loss < result.loss_trace[result.best_iteration]) {
      result.best_iteration = result.loss_trace.size() - 1;
      result.w_hat = current;
      result.quantizer = q;
    }
    if (same) {
      result.converged = true;
      break;
    }
  }
  result.final_iterate = std::move(current);
  return result;
}

}  // namespace sensvq
