#pragma once

#include "binhash/code_matrix.hpp"
#include "binhash/types.hpp"

#include <bit>
#include <cstring>
#include <numeric>
#include <span>
#include <vector>

namespace binhash {

/// Exact Hamming distance between two packed code rows of equal width.
/// Valid because unused padding bits are zero by CodeMatrix construction.
inline std::uint32_t hamming_distance(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
  if (a.size() != b.size()) throw std::invalid_argument("hamming_distance: code length mismatch");
  std::uint32_t dist = 0;
  std::size_t i = 0;
  for (; i + 8 <= a.size(); i += 8) {
    std::uint64_t wa, wb;
    std::memcpy(&wa, a.data() + i, 8);
    std::memcpy(&wb, b.data() + i, 8);
    dist += static_cast<std::uint32_t>(std::popcount(wa ^ wb));
  }
  for (; i < a.size(); ++i) dist += static_cast<std::uint32_t>(std::popcount(std::uint8_t(a[i] ^ b[i])));
  return dist;
}

/// Searchable collection of packed codes with optional labels (used by the
/// evaluation protocol) and external identifiers.
struct CodeDatabase {
  CodeMatrix codes;
  std::vector<std::int32_t> labels;  // empty, or aligned with codes
  std::vector<std::uint32_t> ids;    // aligned with codes

  Index size() const { return codes.rows(); }
  bool has_labels() const { return !labels.empty(); }
};

inline CodeDatabase make_database(CodeMatrix codes, std::vector<std::int32_t> labels = {},
                                  std::vector<std::uint32_t> ids = {}) {
  CodeDatabase db;
  db.codes = std::move(codes);
  if (!labels.empty() && static_cast<Index>(labels.size()) != db.codes.rows())
    throw std::invalid_argument("make_database: label count mismatch");
  db.labels = std::move(labels);
  if (ids.empty()) {
    db.ids.resize(static_cast<std::size_t>(db.codes.rows()));
    std::iota(db.ids.begin(), db.ids.end(), 0u);
  } else {
    if (static_cast<Index>(ids.size()) != db.codes.rows())
      throw std::invalid_argument("make_database: id count mismatch");
    db.ids = std::move(ids);
  }
  return db;
}

struct SearchHit {
  std::uint32_t index;     // position in the database (tie-break key)
  std::uint32_t distance;

  bool operator==(const SearchHit&) const = default;
};

namespace detail {

inline void check_query(const CodeDatabase& db, std::span<const std::uint8_t> query) {
  if (static_cast<int>(query.size()) != db.codes.row_bytes())
    throw std::invalid_argument("query code width does not match database");
}

}  // namespace detail

/// All database entries within Hamming distance r of the query, ordered by
/// (distance, database index).
inline std::vector<SearchHit> lookup_radius(const CodeDatabase& db, std::span<const std::uint8_t> query,
                                            std::uint32_t radius) {
  detail::check_query(db, query);
  const std::uint32_t max_dist = std::min(radius, static_cast<std::uint32_t>(db.codes.bits()));
  std::vector<std::vector<std::uint32_t>> buckets(max_dist + 1);
  for (Index i = 0; i < db.size(); ++i) {
    const std::uint32_t d = hamming_distance(db.codes.row(i), query);
    if (d <= radius) buckets[d].push_back(static_cast<std::uint32_t>(i));
  }
  std::vector<SearchHit> hits;
  for (std::uint32_t d = 0; d <= max_dist; ++d)
    for (std::uint32_t i : buckets[d]) hits.push_back({i, d});
  return hits;
}

/// The n nearest database entries by (distance, database index); if n exceeds
/// the database size the full ranking is returned. Distances are bounded by
/// the code length, so a counting sort gives the exact deterministic order.
inline std::vector<SearchHit> rank_topn(const CodeDatabase& db, std::span<const std::uint8_t> query, Index n) {
  detail::check_query(db, query);
  if (n < 1) throw std::invalid_argument("rank_topn: n must be >= 1");
  n = std::min(n, db.size());

  const std::uint32_t max_dist = static_cast<std::uint32_t>(db.codes.bits());
  std::vector<std::uint32_t> distances(static_cast<std::size_t>(db.size()));
  std::vector<std::uint32_t> counts(max_dist + 2, 0);
  for (Index i = 0; i < db.size(); ++i) {
    const std::uint32_t d = hamming_distance(db.codes.row(i), query);
    distances[static_cast<std::size_t>(i)] = d;
    ++counts[d + 1];
  }
  for (std::uint32_t d = 1; d < counts.size(); ++d) counts[d] += counts[d - 1];

  std::vector<SearchHit> hits(static_cast<std::size_t>(db.size()));
  for (Index i = 0; i < db.size(); ++i) {
    const std::uint32_t d = distances[static_cast<std::size_t>(i)];
    hits[counts[d]++] = {static_cast<std::uint32_t>(i), d};
  }
  hits.resize(static_cast<std::size_t>(n));
  return hits;
}

/// Label of the nearest database entry (1-NN vote; tie order as rank_topn).
inline std::int32_t nearest_label(const CodeDatabase& db, std::span<const std::uint8_t> query) {
  if (!db.has_labels()) throw std::logic_error("nearest_label: database has no labels");
  if (db.size() < 1) throw std::invalid_argument("nearest_label: empty database");
  return db.labels[rank_topn(db, query, 1).front().index];
}

}  // namespace binhash
