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

#include <cstring>
#include <filesystem>
#include <vector>

#include "oracles.hpp"

using namespace rgcf;

namespace {

FilterNet sample_filter() {
  RngStream rng(41, 0);
  FilterNet f = FilterNet::random_init(7, rng);
  f.threshold = 0.625;
  f.unit_norm_input = true;
  return f;
}

}  // namespace

TEST(FilterIo, RoundTripIsBitExact) {
  const FilterNet f = sample_filter();
  const auto bytes = serialize_filter(f);
  const FilterNet g = deserialize_filter(bytes);
  EXPECT_EQ(g.d, f.d);
  EXPECT_EQ(g.params, f.params);
  EXPECT_EQ(g.threshold, f.threshold);
  EXPECT_EQ(g.unit_norm_input, f.unit_norm_input);
  EXPECT_EQ(serialize_filter(g), bytes);

  const auto path = std::filesystem::temp_directory_path() / "rgcf_filter_io_roundtrip.bin";
  save_filter(f, path);
  EXPECT_EQ(load_filter(path).params, f.params);
  std::filesystem::remove(path);
}

TEST(FilterIo, HeaderLayout) {
  const auto bytes = serialize_filter(sample_filter());
  ASSERT_GE(bytes.size(), 16u);
  EXPECT_EQ(std::memcmp(bytes.data(), "RGCF", 4), 0);
  EXPECT_EQ(bytes[4], 1u);  // version, little-endian
  EXPECT_EQ(bytes[5] | bytes[6] | bytes[7], 0);
  EXPECT_EQ(bytes[8], 7u);  // d
  const std::size_t header = 4 + 4 + 8 + 4 + 4 * 8 + 8 + 4 + 8;
  EXPECT_EQ(bytes.size(), header + 8 * FilterNet::param_count_for(7));
}

TEST(FilterIo, RejectsCorruptFiles) {
  auto bytes = serialize_filter(sample_filter());
  auto bad = bytes;
  bad[0] = 'X';
  try {
    (void)deserialize_filter(bad);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::BadMagic);
  }
  auto cut = bytes;
  cut.resize(cut.size() - 3);
  try {
    (void)deserialize_filter(cut);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::TruncatedFile);
  }
  auto extra = bytes;
  extra.push_back(0);
  EXPECT_THROW(deserialize_filter(extra), Error);
  auto version = bytes;
  version[4] = 2;
  EXPECT_THROW(deserialize_filter(version), Error);
  EXPECT_THROW(load_filter("/nonexistent/rgcf/filter.bin"), Error);
}
