#pragma once

#include "binhash/hamming.hpp"
#include "binhash/types.hpp"

#include <json.hpp>

#include <cstdio>
#include <string>
#include <vector>

namespace binhash {

/// Average precision of one ranked result list. relevance[p] marks whether
/// the item at rank p (0-based) is relevant; total_relevant is the number of
/// relevant items in the whole collection.
inline double average_precision(const std::vector<char>& relevance, Index total_relevant) {
  if (total_relevant < 1) throw std::invalid_argument("average_precision: total_relevant must be positive");
  Index seen = 0;
  double sum = 0.0;
  for (std::size_t p = 0; p < relevance.size(); ++p)
    if (relevance[p]) {
      ++seen;
      sum += static_cast<double>(seen) / static_cast<double>(p + 1);
    }
  if (seen > total_relevant)
    throw std::invalid_argument("average_precision: relevant items in list exceed total_relevant");
  return sum / static_cast<double>(total_relevant);
}

/// Mean average precision over queries, each ranked against the full
/// database by Hamming distance; relevance is label equality.
inline double map_over_queries(const CodeDatabase& db, const CodeMatrix& queries,
                               const LabelVector& query_labels) {
  if (!db.has_labels()) throw std::logic_error("map_over_queries: database has no labels");
  if (queries.rows() < 1) throw std::invalid_argument("map_over_queries: empty query set");
  validate_labels(query_labels, queries.rows());

  std::vector<Index> class_counts(static_cast<std::size_t>(query_labels.num_classes), 0);
  for (std::int32_t y : db.labels)
    if (y >= 0 && y < query_labels.num_classes) ++class_counts[static_cast<std::size_t>(y)];

  double total_ap = 0.0;
  for (Index qi = 0; qi < queries.rows(); ++qi) {
    const std::int32_t label = query_labels.labels[static_cast<std::size_t>(qi)];
    const Index total_relevant = class_counts[static_cast<std::size_t>(label)];
    if (total_relevant < 1)
      throw std::invalid_argument("map_over_queries: query label " + std::to_string(label) +
                                  " absent from database");
    const std::vector<SearchHit> ranking = rank_topn(db, queries.row(qi), db.size());
    Index seen = 0;
    double ap = 0.0;
    for (std::size_t p = 0; p < ranking.size(); ++p)
      if (db.labels[ranking[p].index] == label) {
        ++seen;
        ap += static_cast<double>(seen) / static_cast<double>(p + 1);
      }
    total_ap += ap / static_cast<double>(total_relevant);
  }
  return total_ap / static_cast<double>(queries.rows());
}

struct RadiusMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f_measure = 0.0;
};

inline double f_measure(double precision, double recall) {
  const double denom = precision + recall;
  return denom > 0.0 ? 2.0 * precision * recall / denom : 0.0;
}

/// Hash-lookup metrics at a fixed Hamming radius. A query that retrieves
/// nothing is a false case: it contributes precision 0 (and recall 0). The
/// F-measure combines the two means: F = 2PR / (P + R), 0 when P + R = 0.
inline RadiusMetrics radius_metrics(const CodeDatabase& db, const CodeMatrix& queries,
                                    const LabelVector& query_labels, std::uint32_t radius) {
  if (!db.has_labels()) throw std::logic_error("radius_metrics: database has no labels");
  if (db.size() < 1) throw std::invalid_argument("radius_metrics: empty database");
  if (queries.rows() < 1) throw std::invalid_argument("radius_metrics: empty query set");
  validate_labels(query_labels, queries.rows());

  std::vector<Index> class_counts(static_cast<std::size_t>(query_labels.num_classes), 0);
  for (std::int32_t y : db.labels)
    if (y >= 0 && y < query_labels.num_classes) ++class_counts[static_cast<std::size_t>(y)];

  double precision_sum = 0.0, recall_sum = 0.0;
  for (Index qi = 0; qi < queries.rows(); ++qi) {
    const std::int32_t label = query_labels.labels[static_cast<std::size_t>(qi)];
    const std::vector<SearchHit> hits = lookup_radius(db, queries.row(qi), radius);
    Index matching = 0;
    for (const SearchHit& h : hits)
      if (db.labels[h.index] == label) ++matching;
    if (!hits.empty()) precision_sum += static_cast<double>(matching) / static_cast<double>(hits.size());
    const Index relevant = class_counts[static_cast<std::size_t>(label)];
    if (relevant > 0) recall_sum += static_cast<double>(matching) / static_cast<double>(relevant);
  }

  RadiusMetrics out;
  out.precision = precision_sum / static_cast<double>(queries.rows());
  out.recall = recall_sum / static_cast<double>(queries.rows());
  out.f_measure = f_measure(out.precision, out.recall);
  return out;
}

/// Mean fraction of same-label items among each query's top n.
inline double precision_at_n(const CodeDatabase& db, const CodeMatrix& queries,
                             const LabelVector& query_labels, Index n) {
  if (!db.has_labels()) throw std::logic_error("precision_at_n: database has no labels");
  if (n < 1 || n > db.size()) throw std::invalid_argument("precision_at_n: n must lie in [1, database size]");
  if (queries.rows() < 1) throw std::invalid_argument("precision_at_n: empty query set");
  validate_labels(query_labels, queries.rows());

  double total = 0.0;
  for (Index qi = 0; qi < queries.rows(); ++qi) {
    const std::int32_t label = query_labels.labels[static_cast<std::size_t>(qi)];
    const std::vector<SearchHit> hits = rank_topn(db, queries.row(qi), n);
    Index matching = 0;
    for (const SearchHit& h : hits)
      if (db.labels[h.index] == label) ++matching;
    total += static_cast<double>(matching) / static_cast<double>(n);
  }
  return total / static_cast<double>(queries.rows());
}

inline double classification_accuracy(const LabelVector& predicted, const LabelVector& truth) {
  if (predicted.size() != truth.size())
    throw std::invalid_argument("classification_accuracy: length mismatch");
  if (predicted.size() < 1) throw std::invalid_argument("classification_accuracy: empty input");
  Index correct = 0;
  for (std::size_t i = 0; i < predicted.labels.size(); ++i)
    if (predicted.labels[i] == truth.labels[i]) ++correct;
  return static_cast<double>(correct) / static_cast<double>(predicted.size());
}

/// The full per-run metric set of the evaluation protocol.
struct MetricsReport {
  double map = 0.0;
  double precision_r = 0.0;
  double recall_r = 0.0;
  double f_measure_r = 0.0;
  double precision_at_n = 0.0;
  double accuracy = 0.0;
  double accuracy_1nn = 0.0;
  std::uint32_t radius = 2;
  Index n_at = 500;
  double train_seconds = 0.0;
  double test_seconds = 0.0;
};

inline std::string metrics_csv_header() {
  return "method,bits,map,precision_at_r,recall_at_r,f_measure_at_r,precision_at_n,accuracy,"
         "radius,top_n,train_seconds,test_seconds";
}

inline std::string metrics_csv_row(const std::string& method, int bits, const MetricsReport& r) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), "%s,%d,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%u,%lld,%.3f,%.3f", method.c_str(),
                bits, r.map, r.precision_r, r.recall_r, r.f_measure_r, r.precision_at_n, r.accuracy,
                r.radius, static_cast<long long>(r.n_at), r.train_seconds, r.test_seconds);
  return buf;
}

inline nlohmann::json metrics_json(const std::string& method, int bits, const MetricsReport& r) {
  return {
      {"method", method},
      {"bits", bits},
      {"map", r.map},
      {"precision_at_r", r.precision_r},
      {"recall_at_r", r.recall_r},
      {"f_measure_at_r", r.f_measure_r},
      {"precision_at_n", r.precision_at_n},
      {"accuracy", r.accuracy},
      {"accuracy_1nn", r.accuracy_1nn},
      {"radius", r.radius},
      {"top_n", r.n_at},
      {"train_seconds", r.train_seconds},
      {"test_seconds", r.test_seconds},
  };
}

}  // namespace binhash
