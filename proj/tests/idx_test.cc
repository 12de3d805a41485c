// Copyright 2026 The mi-audit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cstdlib>
#include <filesystem>
#include <vector>

#include "gtest/gtest.h"
#include "idx_fixture.h"
#include "miaudit/error.h"
#include "miaudit/idx.h"

namespace miaudit {
namespace {

using testing::FourImageFixture;
using testing::FourLabelFixture;

TEST(IdxTest, DecodesImageFixture) {
  const auto bytes = FourImageFixture();
  const IdxFile f = ParseIdx(bytes);
  EXPECT_TRUE(f.is_images());
  EXPECT_EQ(f.header.dims, (std::vector<std::uint32_t>{4, 2, 3}));
  const auto px = f.Pixels();
  ASSERT_EQ(px.size(), 24u);
  for (std::size_t i = 0; i < px.size(); ++i) {
    EXPECT_EQ(px[i], bytes[16 + i] / 255.0);
  }
  EXPECT_EQ(px[1], 1.0);
  EXPECT_EQ(px[0], 0.0);
  EXPECT_EQ(SerializeIdx(f), bytes);
  EXPECT_THROW(f.Labels(), Error);
}

TEST(IdxTest, DecodesLabelFixture) {
  const IdxFile f = ParseIdx(FourLabelFixture());
  EXPECT_TRUE(f.is_labels());
  EXPECT_EQ(f.Labels(), (std::vector<int>{3, 0, 9, 1}));
  EXPECT_EQ(SerializeIdx(f), FourLabelFixture());
}

TEST(IdxTest, BuildsDataset) {
  const Dataset d = DatasetFromIdx(ParseIdx(FourImageFixture()),
                                   ParseIdx(FourLabelFixture()), 10);
  EXPECT_EQ(d.sample_shape, (std::vector<std::size_t>{1, 2, 3}));
  EXPECT_EQ(d.size(), 4u);
  EXPECT_EQ(d.labels[2], 9);
  EXPECT_EQ(d.Sample(1)[0], 10 / 255.0);
  const Dataset two = DatasetFromIdx(ParseIdx(FourImageFixture()),
                                     ParseIdx(FourLabelFixture()), 10, 2);
  EXPECT_EQ(two.size(), 2u);
  EXPECT_THROW(DatasetFromIdx(ParseIdx(FourImageFixture()),
                              ParseIdx(FourLabelFixture()), 5),
               Error);
}

std::size_t OffsetOf(const std::vector<std::uint8_t>& bytes) {
  try {
    ParseIdx(bytes);
  } catch (const ParseError& e) {
    return e.offset();
  }
  ADD_FAILURE() << "fixture parsed without error";
  return static_cast<std::size_t>(-1);
}

TEST(IdxTest, RejectsMalformedFixtures) {
  const auto good = FourImageFixture();

  std::vector<std::uint8_t> short_magic(good.begin(), good.begin() + 2);
  EXPECT_EQ(OffsetOf(short_magic), 2u);

  auto bad_magic = good;
  bad_magic[3] = 0x04;
  EXPECT_EQ(OffsetOf(bad_magic), 0u);

  std::vector<std::uint8_t> short_dim(good.begin(), good.begin() + 10);
  EXPECT_EQ(OffsetOf(short_dim), 10u);

  std::vector<std::uint8_t> short_payload(good.begin(), good.end() - 1);
  EXPECT_EQ(OffsetOf(short_payload), good.size() - 1);

  auto trailing = good;
  trailing.push_back(0);
  EXPECT_EQ(OffsetOf(trailing), good.size());
}

TEST(IdxTest, FileRoundTripAndDataDir) {
  const auto dir = std::filesystem::temp_directory_path() / "miaudit_idx_test";
  std::filesystem::create_directories(dir);
  const IdxFile f = ParseIdx(FourImageFixture());
  WriteIdxFile(f, dir / "images.idx");
  EXPECT_EQ(ReadIdxFile(dir / "images.idx"), f);
  ::setenv("MI_AUDIT_DATA_DIR", dir.c_str(), 1);
  EXPECT_EQ(ResolveDataPath("images.idx"), dir / "images.idx");
  EXPECT_EQ(ReadIdxFile(ResolveDataPath("images.idx")), f);
  ::unsetenv("MI_AUDIT_DATA_DIR");
  EXPECT_THROW(ReadIdxFile(dir / "missing.idx"), Error);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace miaudit
