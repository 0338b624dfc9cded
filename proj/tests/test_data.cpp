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

#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "oracles.hpp"

using namespace rgcf;

namespace {

class TempDir {
 public:
  explicit TempDir(const std::string& name) : path_(std::filesystem::temp_directory_path() / name) {
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  std::filesystem::path operator/(const std::string& f) const { return path_ / f; }

 private:
  std::filesystem::path path_;
};

void write_bytes(const std::filesystem::path& p, const std::vector<unsigned char>& bytes) {
  std::ofstream out(p, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

// Two 2x2 images with labels 3 and 1, written byte by byte.
const std::vector<unsigned char> kImages{0, 0, 8, 3, 0, 0, 0, 2, 0, 0, 0, 2, 0, 0, 0, 2,
                                         0, 255, 51, 102, 255, 0, 0, 0};
const std::vector<unsigned char> kLabels{0, 0, 8, 1, 0, 0, 0, 2, 3, 1};

}  // namespace

TEST(Idx, LoadsHandWrittenFiles) {
  TempDir dir("rgcf_idx_load");
  write_bytes(dir / "img", kImages);
  write_bytes(dir / "lab", kLabels);
  const Dataset d = load_idx(dir / "img", dir / "lab");
  EXPECT_EQ(d.size(), 2u);
  EXPECT_EQ(d.in_dim, 4u);
  EXPECT_EQ(d.classes, 4u);
  const std::vector<double> want{0.0, 1.0, 0.2, 0.4, 1.0, 0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < want.size(); ++i) EXPECT_NEAR(d.inputs[i], want[i], 1e-15);
  EXPECT_EQ(d.labels, (std::vector<std::size_t>{3, 1}));
}

TEST(Idx, WriteThenLoadRoundTrips) {
  TempDir dir("rgcf_idx_roundtrip");
  Dataset d{9, 3, {}, {}};
  for (std::size_t i = 0; i < 5 * 9; ++i) d.inputs.push_back(static_cast<double>((i * 37) % 256) / 255.0);
  d.labels = {0, 1, 2, 1, 0};
  write_idx(d, dir / "img", dir / "lab");
  const Dataset back = load_idx(dir / "img", dir / "lab");
  EXPECT_EQ(back.inputs, d.inputs);
  EXPECT_EQ(back.labels, d.labels);
  EXPECT_EQ(back.in_dim, 9u);
}

TEST(Idx, Errors) {
  TempDir dir("rgcf_idx_errors");
  auto expect_kind = [&](const std::vector<unsigned char>& img, const std::vector<unsigned char>& lab,
                         ErrorKind kind) {
    write_bytes(dir / "img", img);
    write_bytes(dir / "lab", lab);
    try {
      (void)load_idx(dir / "img", dir / "lab");
      ADD_FAILURE() << "no error";
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), kind) << e.what();
    }
  };
  auto bad_magic = kImages;
  bad_magic[3] = 1;
  expect_kind(bad_magic, kLabels, ErrorKind::BadMagic);
  expect_kind(kImages, kImages, ErrorKind::BadMagic);
  auto three_labels = kLabels;
  three_labels[7] = 3;
  three_labels.push_back(0);
  expect_kind(kImages, three_labels, ErrorKind::CountMismatch);
  auto short_images = kImages;
  short_images.pop_back();
  expect_kind(short_images, kLabels, ErrorKind::TruncatedFile);
  expect_kind({0, 0, 8}, kLabels, ErrorKind::TruncatedFile);
  EXPECT_THROW(load_idx(dir / "missing", dir / "lab"), Error);
}

TEST(Blobs, ShapeAndDeterminism) {
  RngStream a(1, 1), b(1, 1);
  const Dataset x = synth_gaussian_blobs(3, 4, 5, 2.0, a);
  const Dataset y = synth_gaussian_blobs(3, 4, 5, 2.0, b);
  EXPECT_EQ(x.size(), 12u);
  EXPECT_EQ(x.inputs, y.inputs);
  EXPECT_EQ(x.labels[0], 0u);
  EXPECT_EQ(x.labels[4], 1u);
  EXPECT_NO_THROW(x.validate());
  RngStream c(1, 1);
  EXPECT_THROW(synth_gaussian_blobs(3, 4, 2, 2.0, c), Error);
}

TEST(Blobs, ClassMeansSitOnAxes) {
  RngStream rng(2, 2);
  const Dataset d = synth_gaussian_blobs(2, 4000, 3, 5.0, rng);
  std::vector<double> mean0(3, 0.0);
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d.labels[i] != 0) continue;
    for (std::size_t j = 0; j < 3; ++j) mean0[j] += d.row(i)[j] / 4000.0;
  }
  EXPECT_NEAR(mean0[0], 5.0, 0.1);
  EXPECT_NEAR(mean0[1], 0.0, 0.1);
}

TEST(Shards, PartitionIsDisjointAndBalanced) {
  RngStream rng(3, 3);
  const auto shards = shard_indices(23, 5, rng);
  ASSERT_EQ(shards.size(), 5u);
  std::set<std::size_t> seen;
  for (std::size_t s = 0; s < 5; ++s) {
    EXPECT_EQ(shards[s].size(), s < 3 ? 5u : 4u);
    for (std::size_t i : shards[s]) EXPECT_TRUE(seen.insert(i).second);
  }
  EXPECT_EQ(seen.size(), 23u);
  EXPECT_EQ(*seen.rbegin(), 22u);
  try {
    (void)shard_indices(3, 4, rng);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::TooManyShards);
  }
}

TEST(Minibatch, SamplesFromShardWithReplacement) {
  RngStream rng(4, 4);
  const Dataset d = synth_gaussian_blobs(2, 3, 2, 1.0, rng);
  const LabeledBatch b = sample_minibatch(d, 50, rng);
  EXPECT_EQ(b.size(), 50u);
  EXPECT_EQ(b.inputs.size(), 100u);
  for (std::size_t k = 0; k < b.size(); ++k) {
    bool found = false;
    for (std::size_t i = 0; i < d.size(); ++i) {
      found = found || (d.row(i)[0] == b.inputs[2 * k] && d.labels[i] == b.labels[k]);
    }
    EXPECT_TRUE(found);
  }
  try {
    (void)sample_minibatch(Dataset{2, 2, {}, {}}, 4, rng);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EmptyShard);
  }
}
