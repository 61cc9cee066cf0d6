// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "sensvq/linalg.hpp"

namespace sensvq::npy {

/// A C-ordered little-endian float array as stored in an .npy file, widened to double.
struct Array {
  std::vector<std::size_t> shape;
  std::vector<double> data;
};

/// Parses NPY format version 1.0 / 2.0 bytes. Accepts '<f4' and '<f8' only.
Array parse(const std::string& bytes);
Array read(const std::filesystem::path& path);

/// Always writes version 1.0, dtype '<f8'.
std::string serialize(const std::vector<std::size_t>& shape, const std::vector<double>& data);
void write(const std::filesystem::path& path, const std::vector<std::size_t>& shape, const std::vector<double>& data);

Matrix load_matrix(const std::filesystem::path& path);
void save_matrix(const std::filesystem::path& path, const Matrix& m);

/// S x m x n array as S matrices of m x n.
std::vector<Matrix> load_stack(const std::filesystem::path& path);
void save_stack(const std::filesystem::path& path, const std::vector<Matrix>& stack);

}  // namespace sensvq::npy
