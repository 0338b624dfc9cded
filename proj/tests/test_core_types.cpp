/*
 * Copyright 2026 The RGCF Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <set>
#include <vector>

#include "oracles.hpp"

using namespace rgcf;

TEST(ParamVector, RejectsEmptyAndNonFinite) {
  EXPECT_THROW(ParamVector(std::vector<double>{}), Error);
  try {
    ParamVector(std::vector<double>{1.0, std::numeric_limits<double>::quiet_NaN(), 2.0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NonFiniteValue);
    ASSERT_TRUE(e.index().has_value());
    EXPECT_EQ(*e.index(), 1u);
  }
  try {
    ParamVector(std::vector<double>{std::numeric_limits<double>::infinity()});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NonFiniteValue);
  }
}

TEST(ParamVector, ZerosAndEquality) {
  const ParamVector z = ParamVector::zeros(3);
  EXPECT_EQ(z.size(), 3u);
  EXPECT_EQ(z, ParamVector(std::vector<double>{0.0, 0.0, 0.0}));
  EXPECT_NE(z, ParamVector(std::vector<double>{0.0, 0.0, 1.0}));
}

TEST(L2, HandExamples) {
  EXPECT_EQ(l2_distance(ParamVector({0.0, 0.0}), ParamVector({3.0, 4.0})), 5.0);
  EXPECT_EQ(l2_norm(ParamVector({3.0, 4.0}).values()), 5.0);
  try {
    (void)l2_distance(ParamVector({1.0}), ParamVector({1.0, 2.0}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::LengthMismatch);
  }
}

TEST(L2, MetricProperties) {
  RngStream rng(3, 0);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t d = 1 + rng.uniform_index(37);
    auto g = oracle::random_grads(3, d, rng);
    const double ab = l2_distance(g[0], g[1]);
    EXPECT_EQ(ab, l2_distance(g[1], g[0]));
    EXPECT_EQ(l2_distance(g[0], g[0]), 0.0);
    EXPECT_LE(l2_distance(g[0], g[2]), ab + l2_distance(g[1], g[2]) + 1e-12);
    EXPECT_NEAR(ab, std::sqrt(oracle::sqdist(g[0].to_vector(), g[1].to_vector())), 1e-12 * (1.0 + ab));
  }
}

TEST(GradientReport, ValidatesLoss) {
  try {
    GradientReport(ParamVector({1.0}), std::nan(""));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NonFiniteValue);
  }
  try {
    GradientReport(ParamVector({1.0}), -0.5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidArgument);
  }
  const GradientReport r(ParamVector({1.0}), 0.25, Provenance::byzantine(AttackKind::AllOnes));
  EXPECT_TRUE(r.provenance.is_byzantine());
  EXPECT_FALSE(Provenance::honest().is_byzantine());
}

// Reference values from an independent implementation of the same mixer.
TEST(RngStream, PinnedPrefix) {
  RngStream a(0, 0);
  EXPECT_EQ(a.next_u64(), 0x58016df76f315627ULL);
  EXPECT_EQ(a.next_u64(), 0x57b74577e39d30beULL);
  EXPECT_EQ(a.next_u64(), 0x9e29a82f42fc47f4ULL);
  EXPECT_EQ(a.next_u64(), 0x6c13bfd1d3ce3a90ULL);
  RngStream b(42, 7);
  EXPECT_EQ(b.next_u64(), 0x81b285cff736d63fULL);
  EXPECT_EQ(b.next_u64(), 0xbe28577c1dca7306ULL);
  EXPECT_EQ(b.next_u64(), 0xf18f9f46f63e2666ULL);
  EXPECT_EQ(b.next_u64(), 0xfcb545e97cb3d80fULL);
  RngStream c(42, 7);
  EXPECT_EQ(c.uniform(), 0.5066302902916633);
  RngStream d(1, 2);
  EXPECT_NEAR(d.normal(), -1.228091139392276, 1e-15);
  EXPECT_EQ(d.position(), 2u);
}

TEST(RngStream, StreamsAreIndependentOfEachOther) {
  RngStream a(5, 1), b(5, 2), a2(5, 1);
  for (int i = 0; i < 10; ++i) (void)b.next_u64();
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_u64(), a2.next_u64());
  EXPECT_NE(RngStream(5, 1).next_u64(), RngStream(5, 2).next_u64());
  EXPECT_NE(RngStream(5, 1).next_u64(), RngStream(6, 1).next_u64());
}

TEST(RngStream, SplitIsDeterministicAndDistinct) {
  const RngStream parent(9, 4);
  RngStream x = parent.split(1), y = parent.split(1), z = parent.split(2);
  EXPECT_EQ(x.stream_id(), y.stream_id());
  EXPECT_NE(x.stream_id(), z.stream_id());
  EXPECT_EQ(x.next_u64(), y.next_u64());
}

TEST(RngStream, UniformIndexCoversRangeWithoutBias) {
  RngStream rng(11, 0);
  std::vector<int> counts(7, 0);
  const int draws = 70000;
  for (int i = 0; i < draws; ++i) counts[rng.uniform_index(7)]++;
  for (int c : counts) EXPECT_NEAR(c, draws / 7, 5 * std::sqrt(draws / 7.0));
  EXPECT_THROW(rng.uniform_index(0), Error);
}

TEST(RngStream, NormalMoments) {
  RngStream rng(12, 0);
  const int n = 100000;
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal();
    s += x;
    s2 += x * x;
  }
  EXPECT_NEAR(s / n, 0.0, 4.0 / std::sqrt(n));
  EXPECT_NEAR(s2 / n, 1.0, 0.02);
}
