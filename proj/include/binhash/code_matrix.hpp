#pragma once

#include "binhash/types.hpp"

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <span>
#include <stdexcept>
#include <vector>

namespace binhash {

/// Binary codes in {-1,+1}^(n x l), stored bit-packed: bit k of a row lives in
/// byte k/8 at bit position k%8, with bit value 1 <-> +1 and 0 <-> -1.
/// Unused high bits of the last byte of each row are always zero, so byte-wise
/// XOR/popcount over rows computes exact Hamming distances.
class CodeMatrix {
 public:
  CodeMatrix() = default;
  CodeMatrix(Index rows, int bits)
      : rows_(rows), bits_(bits), row_bytes_((bits + 7) / 8), data_(static_cast<std::size_t>(rows) * row_bytes_, 0) {
    if (rows < 0 || bits < 1) throw std::invalid_argument("CodeMatrix: rows >= 0 and bits >= 1 required");
  }

  /// Pack a +-1 matrix (entry >= 0 maps to bit 1).
  static CodeMatrix from_signs(const Matrix& signs) {
    CodeMatrix cm(signs.rows(), static_cast<int>(signs.cols()));
    for (Index i = 0; i < signs.rows(); ++i)
      for (int k = 0; k < cm.bits_; ++k)
        if (signs(i, k) >= 0.0) cm.data_[static_cast<std::size_t>(i) * cm.row_bytes_ + k / 8] |= std::uint8_t(1u << (k % 8));
    return cm;
  }

  /// Unpack to a dense +-1 matrix.
  Matrix to_signs() const {
    Matrix out(rows_, bits_);
    for (Index i = 0; i < rows_; ++i)
      for (int k = 0; k < bits_; ++k) out(i, k) = bit(i, k);
    return out;
  }

  Index rows() const { return rows_; }
  int bits() const { return bits_; }
  int row_bytes() const { return row_bytes_; }

  std::span<const std::uint8_t> row(Index i) const {
    return {data_.data() + static_cast<std::size_t>(i) * row_bytes_, static_cast<std::size_t>(row_bytes_)};
  }
  std::span<std::uint8_t> row(Index i) {
    return {data_.data() + static_cast<std::size_t>(i) * row_bytes_, static_cast<std::size_t>(row_bytes_)};
  }

  /// Logical entry, +1 or -1.
  int bit(Index i, int k) const {
    return (data_[static_cast<std::size_t>(i) * row_bytes_ + k / 8] >> (k % 8)) & 1u ? +1 : -1;
  }

  void set_bit(Index i, int k, int sign) {
    std::uint8_t& b = data_[static_cast<std::size_t>(i) * row_bytes_ + k / 8];
    if (sign >= 0)
      b |= std::uint8_t(1u << (k % 8));
    else
      b &= std::uint8_t(~(1u << (k % 8)));
  }

  const std::vector<std::uint8_t>& bytes() const { return data_; }
  std::vector<std::uint8_t>& bytes() { return data_; }

  bool operator==(const CodeMatrix&) const = default;

 private:
  Index rows_ = 0;
  int bits_ = 0;
  int row_bytes_ = 0;
  std::vector<std::uint8_t> data_;
};

/// Pack one +-1 row vector.
inline std::vector<std::uint8_t> pack_code_row(const RowVector& signs) {
  std::vector<std::uint8_t> out((signs.size() + 7) / 8, 0);
  for (Index k = 0; k < signs.size(); ++k)
    if (signs(k) >= 0.0) out[static_cast<std::size_t>(k / 8)] |= std::uint8_t(1u << (k % 8));
  return out;
}

inline RowVector unpack_code_row(std::span<const std::uint8_t> packed, int bits) {
  RowVector out(bits);
  for (int k = 0; k < bits; ++k) out(k) = (packed[static_cast<std::size_t>(k / 8)] >> (k % 8)) & 1u ? 1.0 : -1.0;
  return out;
}

namespace detail {

inline void put_u32le(std::vector<std::uint8_t>& buf, std::uint32_t v) {
  buf.push_back(std::uint8_t(v));
  buf.push_back(std::uint8_t(v >> 8));
  buf.push_back(std::uint8_t(v >> 16));
  buf.push_back(std::uint8_t(v >> 24));
}

inline std::uint32_t get_u32le(const std::uint8_t* p) {
  return std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 | std::uint32_t(p[2]) << 16 | std::uint32_t(p[3]) << 24;
}

inline std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return bytes;
}

/// Write via a temp file and rename, so partially written outputs never
/// appear under the final name.
inline void write_file_atomic(const std::string& path, const void* data, std::size_t size) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp + " for writing");
    out.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
    if (!out) throw std::runtime_error("write failed: " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw std::runtime_error("rename " + tmp + " -> " + path + ": " + ec.message());
}

}  // namespace detail

inline constexpr std::uint32_t kBincVersion = 1;

/// BINC code file: magic "BINC", u32 LE version, u32 LE n, u32 LE l,
/// then n rows of ceil(l/8) packed bytes.
inline void save_codes(const CodeMatrix& codes, const std::string& path) {
  std::vector<std::uint8_t> buf;
  buf.reserve(16 + codes.bytes().size());
  buf.insert(buf.end(), {0x42, 0x49, 0x4E, 0x43});
  detail::put_u32le(buf, kBincVersion);
  detail::put_u32le(buf, static_cast<std::uint32_t>(codes.rows()));
  detail::put_u32le(buf, static_cast<std::uint32_t>(codes.bits()));
  buf.insert(buf.end(), codes.bytes().begin(), codes.bytes().end());
  detail::write_file_atomic(path, buf.data(), buf.size());
}

inline CodeMatrix load_codes(const std::string& path) {
  const std::vector<std::uint8_t> buf = detail::read_file_bytes(path);
  if (buf.size() < 16 || std::memcmp(buf.data(), "BINC", 4) != 0)
    throw std::runtime_error(path + ": not a BINC code file");
  const std::uint32_t version = detail::get_u32le(buf.data() + 4);
  if (version != kBincVersion)
    throw std::runtime_error(path + ": unsupported BINC version " + std::to_string(version));
  const std::uint32_t n = detail::get_u32le(buf.data() + 8);
  const std::uint32_t l = detail::get_u32le(buf.data() + 12);
  if (l < 1) throw std::runtime_error(path + ": invalid code length");
  CodeMatrix codes(static_cast<Index>(n), static_cast<int>(l));
  const std::size_t payload = static_cast<std::size_t>(n) * codes.row_bytes();
  if (buf.size() != 16 + payload)
    throw std::runtime_error(path + ": size mismatch (expected " + std::to_string(16 + payload) +
                             " bytes, got " + std::to_string(buf.size()) + ")");
  std::memcpy(codes.bytes().data(), buf.data() + 16, payload);
  if (l % 8 != 0) {
    const std::uint8_t tail_mask = std::uint8_t(~((1u << (l % 8)) - 1u));
    for (Index i = 0; i < codes.rows(); ++i)
      if (codes.row(i).back() & tail_mask)
        throw std::runtime_error(path + ": nonzero padding bits in row " + std::to_string(i));
  }
  return codes;
}

}  // namespace binhash
