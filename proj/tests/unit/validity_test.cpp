#include <random>
#include <stdexcept>

#include <gtest/gtest.h>

#include "condyr/validity.hpp"

using condyr::Validity;

TEST(Validity, StringRoundTrip) {
  for (const char* s : {"", "0", "1", "011", "101", "1000000000000000000000000000000000000000000000000000000000000001",
                        "10000000000000000000000000000000000000000000000000000000000000010"}) {
    EXPECT_EQ(Validity::from_string(s).to_string(), s);
  }
}

TEST(Validity, LeftmostBitIsFirstVersion) {
  auto v = Validity::from_string("011");
  EXPECT_FALSE(v.test(0));
  EXPECT_TRUE(v.test(1));
  EXPECT_TRUE(v.test(2));
  EXPECT_EQ(Validity::single(3, 1).to_string(), "100");
  EXPECT_EQ(Validity::single(3, 3).to_string(), "001");
}

TEST(Validity, RejectsNonBinaryText) { EXPECT_THROW(Validity::from_string("01x"), std::invalid_argument); }

TEST(Validity, ExtendPadsWithZeros) {
  auto v = Validity::from_string("11");
  v.extend(1);
  EXPECT_EQ(v.to_string(), "110");
  v.extend(63);
  EXPECT_EQ(v.size(), 66u);
  EXPECT_EQ(v.popcount(), 2u);
}

TEST(Validity, PopcountAndEmptiness) {
  EXPECT_EQ(Validity::from_string("10110").popcount(), 3u);
  EXPECT_TRUE(Validity::from_string("000").none());
  EXPECT_TRUE(Validity::from_string("001").any());
  EXPECT_TRUE(Validity(0).none());
}

TEST(Validity, SetPositions) {
  auto v = Validity::from_string("0101");
  EXPECT_EQ(v.set_positions(), (std::vector<std::size_t>{1, 3}));
}

TEST(Validity, AndOrMatchBitwiseDefinition) {
  std::mt19937 rng(5);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + rng() % 150;
    std::string a, b;
    for (std::size_t i = 0; i < n; ++i) {
      a += (rng() & 1) ? '1' : '0';
      b += (rng() & 1) ? '1' : '0';
    }
    const auto va = Validity::from_string(a), vb = Validity::from_string(b);
    const auto both = va & vb, either = va | vb;
    for (std::size_t i = 0; i < n; ++i) {
      ASSERT_EQ(both.test(i), a[i] == '1' && b[i] == '1');
      ASSERT_EQ(either.test(i), a[i] == '1' || b[i] == '1');
    }
  }
}

TEST(Validity, MismatchedLengthsAreRejected) {
  auto a = Validity::from_string("01");
  EXPECT_ANY_THROW(a &= Validity::from_string("011"));
}
