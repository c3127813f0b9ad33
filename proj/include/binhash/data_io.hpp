#pragma once

#include "binhash/code_matrix.hpp"  // file helpers
#include "binhash/rng.hpp"
#include "binhash/types.hpp"

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace binhash {

inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;  // ubyte, 3 dims
inline constexpr std::uint32_t kIdxLabelMagic = 0x00000801;  // ubyte, 1 dim

/// Raw contents of an IDX ubyte image tensor, kept byte-exact so the pair can
/// be re-serialized identically.
struct IdxImages {
  std::uint32_t count = 0;
  std::uint32_t rows = 0;
  std::uint32_t cols = 0;
  std::vector<std::uint8_t> pixels;  // count * rows * cols
};

namespace detail {

inline std::uint32_t get_u32be(const std::uint8_t* p) {
  return std::uint32_t(p[0]) << 24 | std::uint32_t(p[1]) << 16 | std::uint32_t(p[2]) << 8 | std::uint32_t(p[3]);
}

inline void put_u32be(std::vector<std::uint8_t>& buf, std::uint32_t v) {
  buf.push_back(std::uint8_t(v >> 24));
  buf.push_back(std::uint8_t(v >> 16));
  buf.push_back(std::uint8_t(v >> 8));
  buf.push_back(std::uint8_t(v));
}

}  // namespace detail

inline IdxImages read_idx_images(const std::string& path) {
  const std::vector<std::uint8_t> buf = detail::read_file_bytes(path);
  if (buf.size() < 16) throw std::runtime_error(path + ": truncated IDX image header");
  const std::uint32_t magic = detail::get_u32be(buf.data());
  if (magic != kIdxImageMagic)
    throw std::runtime_error(path + ": bad IDX image magic (expected 0x00000803)");
  IdxImages out;
  out.count = detail::get_u32be(buf.data() + 4);
  out.rows = detail::get_u32be(buf.data() + 8);
  out.cols = detail::get_u32be(buf.data() + 12);
  const std::size_t payload = std::size_t(out.count) * out.rows * out.cols;
  if (buf.size() != 16 + payload)
    throw std::runtime_error(path + ": IDX payload size mismatch (header says " + std::to_string(payload) +
                             " pixel bytes, file has " + std::to_string(buf.size() - 16) + ")");
  out.pixels.assign(buf.begin() + 16, buf.end());
  return out;
}

inline std::vector<std::uint8_t> read_idx_labels(const std::string& path) {
  const std::vector<std::uint8_t> buf = detail::read_file_bytes(path);
  if (buf.size() < 8) throw std::runtime_error(path + ": truncated IDX label header");
  const std::uint32_t magic = detail::get_u32be(buf.data());
  if (magic != kIdxLabelMagic)
    throw std::runtime_error(path + ": bad IDX label magic (expected 0x00000801)");
  const std::uint32_t count = detail::get_u32be(buf.data() + 4);
  if (buf.size() != 8 + count)
    throw std::runtime_error(path + ": IDX label payload size mismatch");
  return {buf.begin() + 8, buf.end()};
}

inline void write_idx_images(const IdxImages& images, const std::string& path) {
  std::vector<std::uint8_t> buf;
  buf.reserve(16 + images.pixels.size());
  detail::put_u32be(buf, kIdxImageMagic);
  detail::put_u32be(buf, images.count);
  detail::put_u32be(buf, images.rows);
  detail::put_u32be(buf, images.cols);
  buf.insert(buf.end(), images.pixels.begin(), images.pixels.end());
  detail::write_file_atomic(path, buf.data(), buf.size());
}

inline void write_idx_labels(const std::vector<std::uint8_t>& labels, const std::string& path) {
  std::vector<std::uint8_t> buf;
  buf.reserve(8 + labels.size());
  detail::put_u32be(buf, kIdxLabelMagic);
  detail::put_u32be(buf, static_cast<std::uint32_t>(labels.size()));
  buf.insert(buf.end(), labels.begin(), labels.end());
  detail::write_file_atomic(path, buf.data(), buf.size());
}

/// Load an IDX image/label pair as a dataset. Pixels are scaled to [0,1] by
/// dividing by 255; image i is flattened row-major into feature row i.
inline Dataset load_idx(const std::string& images_path, const std::string& labels_path) {
  const IdxImages images = read_idx_images(images_path);
  const std::vector<std::uint8_t> labels = read_idx_labels(labels_path);
  if (labels.size() != images.count)
    throw std::runtime_error("IDX image/label count mismatch: " + std::to_string(images.count) +
                             " images vs " + std::to_string(labels.size()) + " labels");
  if (images.count == 0) throw std::runtime_error(images_path + ": empty IDX image set");

  const Index n = static_cast<Index>(images.count);
  const Index d = static_cast<Index>(images.rows) * images.cols;
  Dataset ds;
  ds.features.resize(n, d);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < d; ++j)
      ds.features(i, j) = images.pixels[static_cast<std::size_t>(i) * d + j] / 255.0;

  std::int32_t max_label = 0;
  ds.labels.labels.reserve(labels.size());
  for (std::uint8_t y : labels) {
    ds.labels.labels.push_back(y);
    max_label = std::max(max_label, std::int32_t(y));
  }
  ds.labels.num_classes = max_label + 1;
  return ds;
}

namespace detail {

inline double parse_double_field(const std::string& field, const std::string& path, std::size_t line_no) {
  double value = 0.0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  while (first < last && (*first == ' ' || *first == '\t')) ++first;
  while (last > first && (last[-1] == ' ' || last[-1] == '\t')) --last;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || first == last)
    throw std::runtime_error(path + ":" + std::to_string(line_no) + ": non-numeric field '" + field + "'");
  return value;
}

}  // namespace detail

/// Load a feature CSV (one comma-separated row of reals per example) and a
/// label file (one integer per line). The class count is inferred as
/// max(label)+1.
inline Dataset load_csv(const std::string& features_path, const std::string& labels_path) {
  std::ifstream in(features_path);
  if (!in) throw std::runtime_error("cannot open " + features_path);

  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      const std::string field = line.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
      row.push_back(detail::parse_double_field(field, features_path, line_no));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw std::runtime_error(features_path + ":" + std::to_string(line_no) + ": ragged row (" +
                               std::to_string(row.size()) + " fields, expected " +
                               std::to_string(rows.front().size()) + ")");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error(features_path + ": empty feature file");

  std::ifstream lin(labels_path);
  if (!lin) throw std::runtime_error("cannot open " + labels_path);
  LabelVector lv;
  std::size_t label_line = 0;
  while (std::getline(lin, line)) {
    ++label_line;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::int32_t y = 0;
    const auto [ptr, ec] = std::from_chars(line.data(), line.data() + line.size(), y);
    if (ec != std::errc() || ptr != line.data() + line.size())
      throw std::runtime_error(labels_path + ":" + std::to_string(label_line) + ": bad label '" + line + "'");
    if (y < 0) throw std::runtime_error(labels_path + ":" + std::to_string(label_line) + ": negative label");
    lv.labels.push_back(y);
    lv.num_classes = std::max(lv.num_classes, y + 1);
  }
  if (lv.labels.empty()) throw std::runtime_error(labels_path + ": empty label file");
  if (lv.labels.size() != rows.size())
    throw std::runtime_error("feature/label count mismatch: " + std::to_string(rows.size()) + " rows vs " +
                             std::to_string(lv.labels.size()) + " labels");

  Dataset ds;
  ds.features.resize(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (Index i = 0; i < ds.features.rows(); ++i)
    for (Index j = 0; j < ds.features.cols(); ++j)
      ds.features(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  validate_finite(ds.features, "feature CSV");
  ds.labels = std::move(lv);
  return ds;
}

struct TrainTestSplit {
  Dataset train;
  Dataset test;
  std::vector<Index> train_indices;  // ascending positions in the source dataset
  std::vector<Index> test_indices;
};

/// Uniform random train/test split, deterministic for a fixed seed. The test
/// set is a sample of size spec.test_count; indices within each side are kept
/// in ascending source order.
inline TrainTestSplit split(const Dataset& ds, const SplitSpec& spec) {
  const Index n = ds.rows();
  if (spec.test_count <= 0 || spec.test_count >= n)
    throw std::invalid_argument("split: test_count must lie in (0, n)");
  validate_labels(ds.labels, n);

  Rng rng = make_rng(spec.seed);
  std::vector<std::uint64_t> picks =
      sample_without_replacement(rng, static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(spec.test_count));
  std::vector<char> is_test(static_cast<std::size_t>(n), 0);
  for (std::uint64_t p : picks) is_test[p] = 1;

  TrainTestSplit out;
  out.test_indices.reserve(static_cast<std::size_t>(spec.test_count));
  out.train_indices.reserve(static_cast<std::size_t>(n - spec.test_count));
  for (Index i = 0; i < n; ++i) (is_test[static_cast<std::size_t>(i)] ? out.test_indices : out.train_indices).push_back(i);

  auto take = [&](const std::vector<Index>& idx) {
    Dataset part;
    part.features.resize(static_cast<Index>(idx.size()), ds.dim());
    part.labels.num_classes = ds.labels.num_classes;
    part.labels.labels.reserve(idx.size());
    for (std::size_t r = 0; r < idx.size(); ++r) {
      part.features.row(static_cast<Index>(r)) = ds.features.row(idx[r]);
      part.labels.labels.push_back(ds.labels.labels[static_cast<std::size_t>(idx[r])]);
    }
    return part;
  };
  out.train = take(out.train_indices);
  out.test = take(out.test_indices);
  return out;
}

}  // namespace binhash
