#include "binhash/metrics.hpp"

#include "test_util.hpp"

#include <gtest/gtest.h>

using namespace binhash;

namespace {

// Codes at controlled distances from the all-ones query: entry i differs in
// exactly `flips[i]` leading bits.
CodeMatrix codes_at_distances(const std::vector<int>& flips, int bits) {
  Matrix signs = Matrix::Ones(static_cast<Index>(flips.size()), bits);
  for (std::size_t i = 0; i < flips.size(); ++i)
    for (int k = 0; k < flips[i]; ++k) signs(static_cast<Index>(i), k) = -1.0;
  return CodeMatrix::from_signs(signs);
}

CodeMatrix all_ones_query(int bits) { return CodeMatrix::from_signs(Matrix::Ones(1, bits)); }

LabelVector labels_of(std::vector<std::int32_t> labels, std::int32_t classes) {
  return {std::move(labels), classes};
}

}  // namespace

TEST(AveragePrecision, HandComputedCase) {
  // relevance (1,0,1), 2 relevant in total: AP = (1/1 + 2/3) / 2 = 5/6
  EXPECT_NEAR(average_precision({1, 0, 1}, 2), (1.0 / 1.0 + 2.0 / 3.0) / 2.0, 1e-9);
  EXPECT_NEAR(average_precision({1, 0, 1}, 2), 0.83333, 1e-5);
}

TEST(AveragePrecision, AllRelevantIsOne) {
  EXPECT_DOUBLE_EQ(average_precision({1, 1, 1, 1}, 4), 1.0);
}

TEST(AveragePrecision, NoneRelevantIsZero) {
  EXPECT_DOUBLE_EQ(average_precision({0, 0, 0}, 5), 0.0);
}

TEST(AveragePrecision, RejectsZeroTotalRelevant) {
  EXPECT_THROW(average_precision({0, 0}, 0), std::invalid_argument);
}

TEST(AveragePrecision, RejectsInconsistentTotal) {
  EXPECT_THROW(average_precision({1, 1, 1}, 2), std::invalid_argument);
}

TEST(MapOverQueries, IdenticalSetsSameLabelIsOne) {
  const CodeMatrix codes = CodeMatrix::from_signs(testutil::random_sign_matrix(12, 16, 401));
  const CodeDatabase db = make_database(codes, std::vector<std::int32_t>(12, 0));
  EXPECT_DOUBLE_EQ(map_over_queries(db, codes, labels_of(std::vector<std::int32_t>(12, 0), 1)), 1.0);
}

TEST(MapOverQueries, ComposesRankedRelevancePattern) {
  // db entries at distances 0, 1, 2 with labels (0, 1, 0): pattern (1,0,1)
  const CodeDatabase db = make_database(codes_at_distances({0, 1, 2}, 16), {0, 1, 0});
  const double map = map_over_queries(db, all_ones_query(16), labels_of({0}, 2));
  EXPECT_NEAR(map, 5.0 / 6.0, 1e-12);
}

TEST(MapOverQueries, RejectsLabelAbsentFromDatabase) {
  const CodeDatabase db = make_database(codes_at_distances({0, 1}, 8), {0, 0});
  EXPECT_THROW(map_over_queries(db, all_ones_query(8), labels_of({1}, 2)), std::invalid_argument);
}

TEST(RadiusMetrics, PerfectRetrievalIsAllOnes) {
  const CodeMatrix codes = CodeMatrix::from_signs(testutil::random_sign_matrix(6, 12, 402));
  const CodeDatabase db = make_database(codes, std::vector<std::int32_t>(6, 0));
  const RadiusMetrics rm = radius_metrics(db, codes, labels_of(std::vector<std::int32_t>(6, 0), 1), 12);
  EXPECT_DOUBLE_EQ(rm.precision, 1.0);
  EXPECT_DOUBLE_EQ(rm.recall, 1.0);
  EXPECT_DOUBLE_EQ(rm.f_measure, 1.0);
}

TEST(RadiusMetrics, EmptyRetrievalIsFalseCase) {
  // One query at distance 5 from everything with radius 2: precision 0.
  const CodeDatabase db = make_database(codes_at_distances({5, 5}, 16), {0, 0});
  const RadiusMetrics rm = radius_metrics(db, all_ones_query(16), labels_of({0}, 1), 2);
  EXPECT_DOUBLE_EQ(rm.precision, 0.0);
  EXPECT_DOUBLE_EQ(rm.recall, 0.0);
  EXPECT_DOUBLE_EQ(rm.f_measure, 0.0);
}

TEST(RadiusMetrics, MixedQueriesAverage) {
  // Query retrieves items at distance 0,1 (labels 0,1) with radius 1:
  // precision 1/2, recall 1/2 (two label-0 items in db).
  const CodeDatabase db = make_database(codes_at_distances({0, 1, 6}, 16), {0, 1, 0});
  const RadiusMetrics rm = radius_metrics(db, all_ones_query(16), labels_of({0}, 2), 1);
  EXPECT_DOUBLE_EQ(rm.precision, 0.5);
  EXPECT_DOUBLE_EQ(rm.recall, 0.5);
  EXPECT_DOUBLE_EQ(rm.f_measure, 0.5);
}

TEST(FMeasure, FormulaValue) {
  EXPECT_NEAR(f_measure(0.5, 0.25), 1.0 / 3.0, 1e-12);
  EXPECT_DOUBLE_EQ(f_measure(0.0, 0.0), 0.0);
}

TEST(RadiusMetrics, FullRadiusRecallIsOne) {
  const CodeMatrix codes = CodeMatrix::from_signs(testutil::random_sign_matrix(10, 14, 403));
  std::vector<std::int32_t> labels;
  for (int i = 0; i < 10; ++i) labels.push_back(i % 2);
  const CodeDatabase db = make_database(codes, labels);
  const CodeMatrix queries = CodeMatrix::from_signs(testutil::random_sign_matrix(4, 14, 404));
  const RadiusMetrics rm = radius_metrics(db, queries, labels_of({0, 1, 0, 1}, 2), 14);
  EXPECT_DOUBLE_EQ(rm.recall, 1.0);
}

TEST(PrecisionAtN, SelfMatchGivesOne) {
  const CodeMatrix codes = CodeMatrix::from_signs(testutil::random_sign_matrix(9, 16, 405));
  std::vector<std::int32_t> labels;
  for (int i = 0; i < 9; ++i) labels.push_back(i);
  const CodeDatabase db = make_database(codes, labels);
  EXPECT_DOUBLE_EQ(precision_at_n(db, codes, labels_of(labels, 9), 1), 1.0);
}

TEST(PrecisionAtN, TopTwoHalfRelevant) {
  const CodeDatabase db = make_database(codes_at_distances({0, 1, 2}, 16), {0, 1, 1});
  EXPECT_DOUBLE_EQ(precision_at_n(db, all_ones_query(16), labels_of({0}, 2), 2), 0.5);
}

TEST(PrecisionAtN, RejectsInvalidN) {
  const CodeDatabase db = make_database(codes_at_distances({0, 1}, 8), {0, 1});
  EXPECT_THROW(precision_at_n(db, all_ones_query(8), labels_of({0}, 2), 0), std::invalid_argument);
  EXPECT_THROW(precision_at_n(db, all_ones_query(8), labels_of({0}, 2), 3), std::invalid_argument);
}

TEST(ClassificationAccuracy, ExactAndZero) {
  const LabelVector a = labels_of({0, 1, 2, 1}, 3);
  const LabelVector b = labels_of({1, 2, 0, 2}, 3);
  EXPECT_DOUBLE_EQ(classification_accuracy(a, a), 1.0);
  EXPECT_DOUBLE_EQ(classification_accuracy(a, b), 0.0);
  EXPECT_DOUBLE_EQ(classification_accuracy(a, labels_of({0, 1, 0, 2}, 3)), 0.5);
}

TEST(ClassificationAccuracy, RejectsLengthMismatch) {
  EXPECT_THROW(classification_accuracy(labels_of({0}, 2), labels_of({0, 1}, 2)), std::invalid_argument);
}

TEST(MetricsOutput, RatesStayInUnitInterval) {
  Rng rng = make_rng(406);
  const CodeMatrix codes = CodeMatrix::from_signs(testutil::random_sign_matrix(40, 24, 407));
  std::vector<std::int32_t> db_labels;
  for (int i = 0; i < 40; ++i) db_labels.push_back(static_cast<std::int32_t>(bounded_uint(rng, 3)));
  const CodeDatabase db = make_database(codes, db_labels);
  const CodeMatrix queries = CodeMatrix::from_signs(testutil::random_sign_matrix(15, 24, 408));
  std::vector<std::int32_t> q_labels;
  for (int i = 0; i < 15; ++i) q_labels.push_back(static_cast<std::int32_t>(bounded_uint(rng, 3)));
  const LabelVector ql = labels_of(q_labels, 3);

  const double map = map_over_queries(db, queries, ql);
  const RadiusMetrics rm = radius_metrics(db, queries, ql, 2);
  const double p_at = precision_at_n(db, queries, ql, 10);
  for (double v : {map, rm.precision, rm.recall, rm.f_measure, p_at}) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
}

TEST(MetricsOutput, CsvRowHasDocumentedColumnOrder) {
  MetricsReport r;
  r.map = 0.5;
  r.precision_r = 0.25;
  r.recall_r = 0.125;
  r.f_measure_r = f_measure(0.25, 0.125);
  r.precision_at_n = 0.75;
  r.accuracy = 0.9;
  r.radius = 2;
  r.n_at = 500;
  EXPECT_EQ(metrics_csv_header(),
            "method,bits,map,precision_at_r,recall_at_r,f_measure_at_r,precision_at_n,accuracy,"
            "radius,top_n,train_seconds,test_seconds");
  EXPECT_EQ(metrics_csv_row("sdhr", 64, r),
            "sdhr,64,0.500000,0.250000,0.125000,0.166667,0.750000,0.900000,2,500,0.000,0.000");
}

TEST(MetricsOutput, JsonCarriesAllFields) {
  MetricsReport r;
  r.map = 0.25;
  const auto j = metrics_json("sdh", 32, r);
  EXPECT_EQ(j.at("method"), "sdh");
  EXPECT_EQ(j.at("bits"), 32);
  EXPECT_DOUBLE_EQ(j.at("map").get<double>(), 0.25);
  EXPECT_TRUE(j.contains("accuracy_1nn"));
  EXPECT_TRUE(j.contains("train_seconds"));
}
