// SPDX-License-Identifier: Apache-2.0
#include "sensvq/npy.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <regex>
#include <sstream>

#include "sensvq/error.hpp"

namespace sensvq::npy {

static_assert(std::endian::native == std::endian::little, "NPY I/O assumes a little-endian host");

namespace {

constexpr char kMagic[] = "\x93NUMPY";
constexpr std::size_t kMagicLen = 6;

std::size_t read_le(const std::string& bytes, std::size_t pos, std::size_t width) {
  std::size_t v = 0;
  for (std::size_t k = 0; k < width; ++k)
    v |= static_cast<std::size_t>(static_cast<unsigned char>(bytes[pos + k])) << (8 * k);
  return v;
}

std::string header_value(const std::string& header, const std::string& key) {
  const std::regex re("['\"]" + key + "['\"]\\s*:\\s*");
  std::smatch m;
  if (!std::regex_search(header, m, re)) throw Error(ErrorCode::kIoError, "header lacks '" + key + "'");
  return header.substr(static_cast<std::size_t>(m.position(0) + m.length(0)));
}

}  // namespace

Array parse(const std::string& bytes) {
  if (bytes.size() < kMagicLen + 2 || bytes.compare(0, kMagicLen, kMagic, kMagicLen) != 0) {
    throw Error(ErrorCode::kBadMagic, "not an NPY file");
  }
  const int major = static_cast<unsigned char>(bytes[kMagicLen]);
  std::size_t len_width = 0;
  if (major == 1) {
    len_width = 2;
  } else if (major == 2) {
    len_width = 4;
  } else {
    throw Error(ErrorCode::kBadMagic, "unsupported NPY version " + std::to_string(major));
  }
  const std::size_t header_start = kMagicLen + 2 + len_width;
  if (bytes.size() < header_start) throw Error(ErrorCode::kIoError, "truncated NPY preamble");
  const std::size_t header_len = read_le(bytes, kMagicLen + 2, len_width);
  if (bytes.size() < header_start + header_len) throw Error(ErrorCode::kIoError, "truncated NPY header");
  const std::string header = bytes.substr(header_start, header_len);

  const std::string descr_tail = header_value(header, "descr");
  std::size_t width = 0;
  if (descr_tail.rfind("'<f8'", 0) == 0 || descr_tail.rfind("\"<f8\"", 0) == 0) {
    width = 8;
  } else if (descr_tail.rfind("'<f4'", 0) == 0 || descr_tail.rfind("\"<f4\"", 0) == 0) {
    width = 4;
  } else {
    throw Error(ErrorCode::kUnsupportedDtype, "only little-endian float32/float64 are supported: " +
                                                  descr_tail.substr(0, descr_tail.find(',')));
  }

  const std::string order_tail = header_value(header, "fortran_order");
  if (order_tail.rfind("True", 0) == 0) throw Error(ErrorCode::kNonCOrder, "Fortran-ordered arrays are not supported");
  if (order_tail.rfind("False", 0) != 0) throw Error(ErrorCode::kIoError, "malformed fortran_order");

  const std::string shape_tail = header_value(header, "shape");
  if (shape_tail.empty() || shape_tail.front() != '(') throw Error(ErrorCode::kIoError, "malformed shape");
  const std::size_t close = shape_tail.find(')');
  if (close == std::string::npos) throw Error(ErrorCode::kIoError, "malformed shape");
  Array out;
  std::size_t count = 1;
  {
    std::string dims = shape_tail.substr(1, close - 1);
    std::stringstream ss(dims);
    std::string item;
    while (std::getline(ss, item, ',')) {
      const auto first = item.find_first_not_of(" \t");
      if (first == std::string::npos) continue;
      std::size_t used = 0;
      unsigned long long d = 0;
      try {
        d = std::stoull(item.substr(first), &used);
      } catch (const std::exception&) {
        throw Error(ErrorCode::kIoError, "malformed shape entry '" + item + "'");
      }
      out.shape.push_back(static_cast<std::size_t>(d));
      count *= static_cast<std::size_t>(d);
    }
  }

  const std::size_t payload = header_start + header_len;
  if (bytes.size() - payload < count * width) {
    throw Error(ErrorCode::kIoError, "payload holds " + std::to_string(bytes.size() - payload) + " bytes, need " +
                                         std::to_string(count * width));
  }
  out.data.resize(count);
  const char* src = bytes.data() + payload;
  for (std::size_t k = 0; k < count; ++k) {
    if (width == 8) {
      std::memcpy(&out.data[k], src + 8 * k, 8);
    } else {
      float f;
      std::memcpy(&f, src + 4 * k, 4);
      out.data[k] = static_cast<double>(f);
    }
  }
  return out;
}

Array read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::string serialize(const std::vector<std::size_t>& shape, const std::vector<double>& data) {
  std::size_t count = 1;
  for (std::size_t d : shape) count *= d;
  if (count != data.size()) throw Error(ErrorCode::kDimensionMismatch, "shape does not match data length");

  std::string dims;
  for (std::size_t d : shape) dims += std::to_string(d) + ", ";
  if (shape.size() > 1) dims.erase(dims.size() - 2);
  else if (shape.size() == 1) dims.pop_back();
  std::string header = "{'descr': '<f8', 'fortran_order': False, 'shape': (" + dims + "), }";
  // Pad with spaces so the payload starts on a 64-byte boundary; header ends in '\n'.
  const std::size_t unpadded = kMagicLen + 2 + 2 + header.size() + 1;
  header.append((64 - unpadded % 64) % 64, ' ');
  header.push_back('\n');

  std::string out(kMagic, kMagicLen);
  out.push_back('\x01');
  out.push_back('\x00');
  out.push_back(static_cast<char>(header.size() & 0xff));
  out.push_back(static_cast<char>((header.size() >> 8) & 0xff));
  out += header;
  const std::size_t start = out.size();
  out.resize(start + 8 * data.size());
  if (!data.empty()) std::memcpy(out.data() + start, data.data(), 8 * data.size());
  return out;
}

void write(const std::filesystem::path& path, const std::vector<std::size_t>& shape, const std::vector<double>& data) {
  const std::string bytes = serialize(shape, data);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIoError, "short write to " + path.string());
}

Matrix load_matrix(const std::filesystem::path& path) {
  Array a = read(path);
  if (a.shape.size() != 2) {
    throw Error(ErrorCode::kDimensionMismatch, path.string() + ": expected a 2-D array, got " +
                                                   std::to_string(a.shape.size()) + "-D");
  }
  return Matrix(a.shape[0], a.shape[1], std::move(a.data));
}

void save_matrix(const std::filesystem::path& path, const Matrix& m) {
  write(path, {m.rows(), m.cols()}, std::vector<double>(m.data().begin(), m.data().end()));
}

std::vector<Matrix> load_stack(const std::filesystem::path& path) {
  const Array a = read(path);
  if (a.shape.size() != 3) {
    throw Error(ErrorCode::kDimensionMismatch, path.string() + ": expected a 3-D array, got " +
                                                   std::to_string(a.shape.size()) + "-D");
  }
  const std::size_t rows = a.shape[1];
  const std::size_t cols = a.shape[2];
  std::vector<Matrix> out;
  out.reserve(a.shape[0]);
  for (std::size_t s = 0; s < a.shape[0]; ++s) {
    const auto first = a.data.begin() + static_cast<std::ptrdiff_t>(s * rows * cols);
    out.emplace_back(rows, cols, std::vector<double>(first, first + static_cast<std::ptrdiff_t>(rows * cols)));
  }
  return out;
}

void save_stack(const std::filesystem::path& path, const std::vector<Matrix>& stack) {
  const std::size_t rows = stack.empty() ? 0 : stack.front().rows();
  const std::size_t cols = stack.empty() ? 0 : stack.front().cols();
  std::vector<double> data;
  data.reserve(stack.size() * rows * cols);
  for (const Matrix& m : stack) {
    if (m.rows() != rows || m.cols() != cols) throw Error(ErrorCode::kDimensionMismatch, "ragged stack");
    data.insert(data.end(), m.data().begin(), m.data().end());
  }
  write(path, {stack.size(), rows, cols}, data);
}

}  // namespace sensvq::npy
