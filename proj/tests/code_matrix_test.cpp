#include "binhash/code_matrix.hpp"

#include "test_util.hpp"

#include <gtest/gtest.h>

using namespace binhash;

TEST(CodeMatrix, BitLayoutIsLittleEndianWithinBytes) {
  // bit k lives in byte k/8 at position k%8
  Matrix signs = Matrix::Constant(1, 12, -1.0);
  signs(0, 9) = 1.0;
  CodeMatrix cm = CodeMatrix::from_signs(signs);
  ASSERT_EQ(cm.row_bytes(), 2);
  EXPECT_EQ(cm.row(0)[0], 0x00);
  EXPECT_EQ(cm.row(0)[1], 0x02);
  EXPECT_EQ(cm.bit(0, 9), 1);
  EXPECT_EQ(cm.bit(0, 8), -1);
}

TEST(CodeMatrix, ZeroMapsToPlusOne) {
  Matrix signs(1, 3);
  signs << 0.3, -0.2, 0.0;
  CodeMatrix cm = CodeMatrix::from_signs(signs);
  EXPECT_EQ(cm.bit(0, 0), 1);
  EXPECT_EQ(cm.bit(0, 1), -1);
  EXPECT_EQ(cm.bit(0, 2), 1);
}

TEST(CodeMatrix, PackUnpackRoundTripAllLengths) {
  for (int bits = 1; bits <= 256; ++bits) {
    const Matrix signs = testutil::random_sign_matrix(3, bits, 1000 + bits);
    const CodeMatrix cm = CodeMatrix::from_signs(signs);
    EXPECT_EQ(cm.to_signs(), signs) << "bits=" << bits;
  }
}

TEST(CodeMatrix, PaddingBitsStayZero) {
  for (int bits : {1, 5, 9, 13, 63, 65}) {
    const CodeMatrix cm = CodeMatrix::from_signs(Matrix::Ones(2, bits));
    if (bits % 8 == 0) continue;
    const std::uint8_t mask = std::uint8_t(~((1u << (bits % 8)) - 1));
    for (Index i = 0; i < cm.rows(); ++i) EXPECT_EQ(cm.row(i).back() & mask, 0) << "bits=" << bits;
  }
}

TEST(CodeMatrix, SingleRowPackMatchesMatrixPack) {
  const Matrix signs = testutil::random_sign_matrix(1, 37, 42);
  const CodeMatrix cm = CodeMatrix::from_signs(signs);
  const std::vector<std::uint8_t> row = pack_code_row(signs.row(0));
  EXPECT_TRUE(std::equal(row.begin(), row.end(), cm.row(0).begin()));
  EXPECT_EQ(unpack_code_row(row, 37), signs.row(0));
}

TEST(BincFile, RoundTrip) {
  testutil::TempDir tmp("binc");
  const CodeMatrix cm = CodeMatrix::from_signs(testutil::random_sign_matrix(17, 21, 3));
  save_codes(cm, tmp.path("codes.binc"));
  EXPECT_EQ(load_codes(tmp.path("codes.binc")), cm);
}

TEST(BincFile, HeaderAndMagicAreExact) {
  testutil::TempDir tmp("binc_hdr");
  const CodeMatrix cm = CodeMatrix::from_signs(testutil::random_sign_matrix(2, 9, 4));
  save_codes(cm, tmp.path("codes.binc"));
  const std::string bytes = testutil::read_file(tmp.path("codes.binc"));
  ASSERT_EQ(bytes.size(), 16u + 2 * 2);
  EXPECT_EQ(bytes.substr(0, 4), "BINC");
  EXPECT_EQ(std::uint8_t(bytes[4]), 1);   // version, little-endian
  EXPECT_EQ(std::uint8_t(bytes[8]), 2);   // n
  EXPECT_EQ(std::uint8_t(bytes[12]), 9);  // l
}

TEST(BincFile, RejectsBadMagic) {
  testutil::TempDir tmp("binc_bad");
  testutil::write_file(tmp.path("x.binc"), "NOPE0000000000000000");
  EXPECT_THROW(load_codes(tmp.path("x.binc")), std::runtime_error);
}

TEST(BincFile, RejectsTruncation) {
  testutil::TempDir tmp("binc_trunc");
  const CodeMatrix cm = CodeMatrix::from_signs(testutil::random_sign_matrix(5, 16, 5));
  save_codes(cm, tmp.path("codes.binc"));
  std::string bytes = testutil::read_file(tmp.path("codes.binc"));
  bytes.resize(bytes.size() - 3);
  testutil::write_file(tmp.path("short.binc"), bytes);
  EXPECT_THROW(load_codes(tmp.path("short.binc")), std::runtime_error);
}

TEST(BincFile, RejectsNonzeroPadding) {
  testutil::TempDir tmp("binc_pad");
  const CodeMatrix cm = CodeMatrix::from_signs(testutil::random_sign_matrix(1, 5, 6));
  save_codes(cm, tmp.path("codes.binc"));
  std::string bytes = testutil::read_file(tmp.path("codes.binc"));
  bytes[16] = char(std::uint8_t(bytes[16]) | 0x80);  // set a padding bit
  testutil::write_file(tmp.path("pad.binc"), bytes);
  EXPECT_THROW(load_codes(tmp.path("pad.binc")), std::runtime_error);
}
