#pragma once

#include "binhash/code_matrix.hpp"
#include "binhash/sdhr.hpp"

#include <array>
#include <cstring>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace binhash {

inline constexpr std::uint32_t kModelVersion = 1;

enum class ModelKind : std::uint32_t { sdh = 0, sdhr = 1 };

/// Everything needed to re-encode queries plus the configuration echo.
/// Binary layout (all little-endian, doubles as IEEE-754 bit patterns):
///   "SDHM" magic, u32 version, then payload:
///     u32 kind, u32 flags, u32 d, u32 m, u32 l, u32 c,
///     u64 seed, u64 split_seed,
///     f64 lambda, f64 v, u32 max_iters, u32 max_sweeps, f64 tol, f64 sigma_override,
///     f64 sigma, anchors (m*d f64 row-major), P (m*l), W (l*c), t (c, SDHR only),
///   u32 CRC-32 over the payload bytes.
struct ModelFile {
  ModelKind kind = ModelKind::sdh;
  bool features_unit_scaled = false;  // pixel /255 scaling applied at load time
  std::uint64_t split_seed = 0;
  TrainConfig config;
  EmbeddingModel embedding;
  Matrix w;           // l x c
  Vector t;           // c; SDHR only
};

namespace detail {

inline std::uint32_t crc32(const std::uint8_t* data, std::size_t size) {
  static const std::array<std::uint32_t, 256> table = [] {
    std::array<std::uint32_t, 256> t{};
    for (std::uint32_t i = 0; i < 256; ++i) {
      std::uint32_t c = i;
      for (int k = 0; k < 8; ++k) c = (c & 1u) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
      t[i] = c;
    }
    return t;
  }();
  std::uint32_t crc = 0xFFFFFFFFu;
  for (std::size_t i = 0; i < size; ++i) crc = table[(crc ^ data[i]) & 0xFFu] ^ (crc >> 8);
  return crc ^ 0xFFFFFFFFu;
}

inline void put_u64le(std::vector<std::uint8_t>& buf, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) buf.push_back(std::uint8_t(v >> (8 * i)));
}

inline void put_f64le(std::vector<std::uint8_t>& buf, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  put_u64le(buf, bits);
}

inline void put_matrix(std::vector<std::uint8_t>& buf, const Matrix& m) {
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) put_f64le(buf, m(i, j));
}

class Reader {
 public:
  Reader(const std::uint8_t* data, std::size_t size, std::string path)
      : data_(data), size_(size), path_(std::move(path)) {}

  std::uint32_t u32() {
    need(4);
    const std::uint32_t v = get_u32le(data_ + pos_);
    pos_ += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t(data_[pos_ + i]) << (8 * i);
    pos_ += 8;
    return v;
  }
  double f64() {
    const std::uint64_t bits = u64();
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
  }
  Matrix matrix(Index rows, Index cols) {
    Matrix m(rows, cols);
    for (Index i = 0; i < rows; ++i)
      for (Index j = 0; j < cols; ++j) m(i, j) = f64();
    return m;
  }
  std::size_t pos() const { return pos_; }

 private:
  void need(std::size_t bytes) const {
    if (pos_ + bytes > size_) throw std::runtime_error(path_ + ": truncated model file");
  }
  const std::uint8_t* data_;
  std::size_t size_;
  std::size_t pos_ = 0;
  std::string path_;
};

}  // namespace detail

inline void save_model(const ModelFile& model, const std::string& path) {
  const Index d = model.embedding.dim();
  const Index m = model.embedding.anchor_count();
  const Index l = model.embedding.projection.cols();
  const Index c = model.w.cols();
  if (model.embedding.projection.rows() != m || model.w.rows() != l)
    throw std::invalid_argument("save_model: inconsistent model dimensions");
  if (model.kind == ModelKind::sdhr && model.t.size() != c)
    throw std::invalid_argument("save_model: offset vector size does not match class count");

  std::vector<std::uint8_t> payload;
  payload.reserve(64 + 8 * static_cast<std::size_t>(m * d + m * l + l * c + c));
  detail::put_u32le(payload, static_cast<std::uint32_t>(model.kind));
  detail::put_u32le(payload, model.features_unit_scaled ? 1u : 0u);
  detail::put_u32le(payload, static_cast<std::uint32_t>(d));
  detail::put_u32le(payload, static_cast<std::uint32_t>(m));
  detail::put_u32le(payload, static_cast<std::uint32_t>(l));
  detail::put_u32le(payload, static_cast<std::uint32_t>(c));
  detail::put_u64le(payload, model.config.seed);
  detail::put_u64le(payload, model.split_seed);
  detail::put_f64le(payload, model.config.lambda);
  detail::put_f64le(payload, model.config.v);
  detail::put_u32le(payload, static_cast<std::uint32_t>(model.config.max_iters));
  detail::put_u32le(payload, static_cast<std::uint32_t>(model.config.max_sweeps));
  detail::put_f64le(payload, model.config.tol);
  detail::put_f64le(payload, model.config.sigma_override);
  detail::put_f64le(payload, model.embedding.sigma);
  detail::put_matrix(payload, model.embedding.anchors);
  detail::put_matrix(payload, model.embedding.projection);
  detail::put_matrix(payload, model.w);
  if (model.kind == ModelKind::sdhr)
    for (Index k = 0; k < c; ++k) detail::put_f64le(payload, model.t(k));

  std::vector<std::uint8_t> buf;
  buf.reserve(12 + payload.size());
  buf.insert(buf.end(), {'S', 'D', 'H', 'M'});
  detail::put_u32le(buf, kModelVersion);
  buf.insert(buf.end(), payload.begin(), payload.end());
  detail::put_u32le(buf, detail::crc32(payload.data(), payload.size()));
  detail::write_file_atomic(path, buf.data(), buf.size());
}

inline ModelFile load_model(const std::string& path) {
  const std::vector<std::uint8_t> buf = detail::read_file_bytes(path);
  if (buf.size() < 12 || std::memcmp(buf.data(), "SDHM", 4) != 0)
    throw std::runtime_error(path + ": not an SDHM model file");
  const std::uint32_t version = detail::get_u32le(buf.data() + 4);
  if (version != kModelVersion)
    throw std::runtime_error(path + ": unsupported model version " + std::to_string(version));

  const std::uint8_t* payload = buf.data() + 8;
  const std::size_t payload_size = buf.size() - 12;
  const std::uint32_t stored_crc = detail::get_u32le(buf.data() + buf.size() - 4);
  if (detail::crc32(payload, payload_size) != stored_crc)
    throw std::runtime_error(path + ": checksum mismatch (corrupt model file)");

  detail::Reader r(payload, payload_size, path);
  ModelFile model;
  const std::uint32_t kind = r.u32();
  if (kind > 1) throw std::runtime_error(path + ": unknown model kind " + std::to_string(kind));
  model.kind = static_cast<ModelKind>(kind);
  model.features_unit_scaled = r.u32() != 0;
  const Index d = r.u32(), m = r.u32(), l = r.u32(), c = r.u32();
  if (d < 1 || m < 1 || l < 1 || c < 1) throw std::runtime_error(path + ": invalid model dimensions");
  model.config.seed = r.u64();
  model.split_seed = r.u64();
  model.config.lambda = r.f64();
  model.config.v = r.f64();
  model.config.max_iters = static_cast<int>(r.u32());
  model.config.max_sweeps = static_cast<int>(r.u32());
  model.config.tol = r.f64();
  model.config.sigma_override = r.f64();
  model.config.bits = static_cast<int>(l);
  model.config.anchors = m;
  model.embedding.sigma = r.f64();
  model.embedding.anchors = r.matrix(m, d);
  model.embedding.projection = r.matrix(m, l);
  model.w = r.matrix(l, c);
  if (model.kind == ModelKind::sdhr) {
    model.t.resize(c);
    for (Index k = 0; k < c; ++k) model.t(k) = r.f64();
  }
  if (r.pos() != payload_size)
    throw std::runtime_error(path + ": payload size disagrees with declared dimensions");
  return model;
}

inline ModelFile to_model_file(const SdhModel& model, const TrainConfig& cfg, std::uint64_t split_seed,
                               bool unit_scaled) {
  ModelFile out;
  out.kind = ModelKind::sdh;
  out.features_unit_scaled = unit_scaled;
  out.split_seed = split_seed;
  out.config = cfg;
  out.embedding = model.embedding;
  out.w = model.w;
  return out;
}

inline ModelFile to_model_file(const SdhrModel& model, const TrainConfig& cfg, std::uint64_t split_seed,
                               bool unit_scaled) {
  ModelFile out;
  out.kind = ModelKind::sdhr;
  out.features_unit_scaled = unit_scaled;
  out.split_seed = split_seed;
  out.config = cfg;
  out.embedding = model.embedding;
  out.w = model.head.w;
  out.t = model.head.t;
  return out;
}

/// Classifier offset for scoring: zero for SDH models.
inline Vector effective_offset(const ModelFile& model) {
  return model.kind == ModelKind::sdhr ? model.t : Vector::Zero(model.w.cols());
}

}  // namespace binhash
