#include "binhash/model_io.hpp"

#include "test_util.hpp"

#include <gtest/gtest.h>

using namespace binhash;

namespace {

ModelFile sample_model(ModelKind kind, std::uint64_t seed) {
  ModelFile m;
  m.kind = kind;
  m.features_unit_scaled = true;
  m.split_seed = 99;
  m.config.bits = 8;
  m.config.lambda = 1.25;
  m.config.v = 2e-5;
  m.config.max_iters = 4;
  m.config.anchors = 6;
  m.config.seed = seed;
  m.config.tol = 1e-4;
  m.config.sigma_override = 0.0;
  m.config.max_sweeps = 7;
  m.embedding.anchors = testutil::random_matrix(6, 5, seed);
  m.embedding.sigma = 1.75;
  m.embedding.projection = testutil::random_matrix(6, 8, seed + 1);
  m.w = testutil::random_matrix(8, 3, seed + 2);
  if (kind == ModelKind::sdhr) m.t = testutil::random_matrix(3, 1, seed + 3).col(0);
  return m;
}

}  // namespace

TEST(ModelStore, RoundTripSdhr) {
  testutil::TempDir tmp("model_sdhr");
  const ModelFile m = sample_model(ModelKind::sdhr, 500);
  save_model(m, tmp.path("m.sdhm"));
  const ModelFile loaded = load_model(tmp.path("m.sdhm"));

  EXPECT_EQ(loaded.kind, ModelKind::sdhr);
  EXPECT_EQ(loaded.features_unit_scaled, m.features_unit_scaled);
  EXPECT_EQ(loaded.split_seed, m.split_seed);
  EXPECT_EQ(loaded.config.seed, m.config.seed);
  EXPECT_EQ(loaded.config.max_iters, m.config.max_iters);
  EXPECT_EQ(loaded.config.max_sweeps, m.config.max_sweeps);
  EXPECT_DOUBLE_EQ(loaded.config.lambda, m.config.lambda);
  EXPECT_DOUBLE_EQ(loaded.config.v, m.config.v);
  EXPECT_DOUBLE_EQ(loaded.config.tol, m.config.tol);
  EXPECT_EQ(loaded.embedding.anchors, m.embedding.anchors);
  EXPECT_EQ(loaded.embedding.projection, m.embedding.projection);
  EXPECT_DOUBLE_EQ(loaded.embedding.sigma, m.embedding.sigma);
  EXPECT_EQ(loaded.w, m.w);
  EXPECT_EQ(loaded.t, m.t);
}

TEST(ModelStore, RoundTripSdhOmitsOffset) {
  testutil::TempDir tmp("model_sdh");
  const ModelFile m = sample_model(ModelKind::sdh, 510);
  save_model(m, tmp.path("m.sdhm"));
  const ModelFile loaded = load_model(tmp.path("m.sdhm"));
  EXPECT_EQ(loaded.kind, ModelKind::sdh);
  EXPECT_EQ(loaded.t.size(), 0);
  EXPECT_EQ(loaded.w, m.w);

  // SDHR file with the same dimensions is exactly c doubles longer.
  save_model(sample_model(ModelKind::sdhr, 510), tmp.path("r.sdhm"));
  EXPECT_EQ(testutil::read_file(tmp.path("r.sdhm")).size(),
            testutil::read_file(tmp.path("m.sdhm")).size() + 3 * 8);
}

TEST(ModelStore, SaveIsByteStable) {
  testutil::TempDir tmp("model_stable");
  const ModelFile m = sample_model(ModelKind::sdhr, 520);
  save_model(m, tmp.path("a.sdhm"));
  save_model(m, tmp.path("b.sdhm"));
  EXPECT_EQ(testutil::read_file(tmp.path("a.sdhm")), testutil::read_file(tmp.path("b.sdhm")));

  const ModelFile loaded = load_model(tmp.path("a.sdhm"));
  save_model(loaded, tmp.path("c.sdhm"));
  EXPECT_EQ(testutil::read_file(tmp.path("a.sdhm")), testutil::read_file(tmp.path("c.sdhm")));
}

TEST(ModelStore, LoadedModelEncodesIdentically) {
  testutil::TempDir tmp("model_encode");
  const ModelFile m = sample_model(ModelKind::sdhr, 530);
  save_model(m, tmp.path("m.sdhm"));
  const ModelFile loaded = load_model(tmp.path("m.sdhm"));
  const Matrix x = testutil::random_matrix(10, 5, 531);
  EXPECT_EQ(encode_batch(x, loaded.embedding), encode_batch(x, m.embedding));
}

TEST(ModelStore, RejectsBadMagic) {
  testutil::TempDir tmp("model_magic");
  testutil::write_file(tmp.path("x.sdhm"), "NOTAMODELFILE000");
  EXPECT_THROW(load_model(tmp.path("x.sdhm")), std::runtime_error);
}

TEST(ModelStore, RejectsTruncation) {
  testutil::TempDir tmp("model_trunc");
  save_model(sample_model(ModelKind::sdh, 540), tmp.path("m.sdhm"));
  std::string bytes = testutil::read_file(tmp.path("m.sdhm"));
  bytes.resize(bytes.size() - 17);
  testutil::write_file(tmp.path("short.sdhm"), bytes);
  EXPECT_THROW(load_model(tmp.path("short.sdhm")), std::runtime_error);
}

TEST(ModelStore, RejectsCorruptedPayload) {
  testutil::TempDir tmp("model_crc");
  save_model(sample_model(ModelKind::sdh, 550), tmp.path("m.sdhm"));
  std::string bytes = testutil::read_file(tmp.path("m.sdhm"));
  bytes[100] = char(bytes[100] ^ 0x40);
  testutil::write_file(tmp.path("bad.sdhm"), bytes);
  EXPECT_THROW(load_model(tmp.path("bad.sdhm")), std::runtime_error);
}

TEST(ModelStore, RejectsUnsupportedVersion) {
  testutil::TempDir tmp("model_ver");
  save_model(sample_model(ModelKind::sdh, 560), tmp.path("m.sdhm"));
  std::string bytes = testutil::read_file(tmp.path("m.sdhm"));
  bytes[4] = 2;
  testutil::write_file(tmp.path("v2.sdhm"), bytes);
  EXPECT_THROW(load_model(tmp.path("v2.sdhm")), std::runtime_error);
}

TEST(ModelStore, RejectsDimensionPayloadDisagreement) {
  testutil::TempDir tmp("model_dims");
  save_model(sample_model(ModelKind::sdh, 570), tmp.path("m.sdhm"));
  std::string bytes = testutil::read_file(tmp.path("m.sdhm"));
  // Grow the declared anchor count; payload length no longer matches. The
  // checksum is recomputed so the size check itself is what must fire.
  const std::size_t m_offset = 8 + 4 + 4 + 4;
  bytes[m_offset] = char(std::uint8_t(bytes[m_offset]) + 1);
  std::vector<std::uint8_t> payload(bytes.begin() + 8, bytes.end() - 4);
  const std::uint32_t crc = detail::crc32(payload.data(), payload.size());
  for (int i = 0; i < 4; ++i) bytes[bytes.size() - 4 + std::size_t(i)] = char(crc >> (8 * i));
  testutil::write_file(tmp.path("dims.sdhm"), bytes);
  EXPECT_THROW(load_model(tmp.path("dims.sdhm")), std::runtime_error);
}

TEST(ModelStore, EffectiveOffsetZeroForSdh) {
  const ModelFile sdh = sample_model(ModelKind::sdh, 580);
  EXPECT_TRUE(effective_offset(sdh).isZero(0.0));
  const ModelFile sdhr = sample_model(ModelKind::sdhr, 581);
  EXPECT_EQ(effective_offset(sdhr), sdhr.t);
}
