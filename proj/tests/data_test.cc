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

#include <algorithm>
#include <numeric>
#include <set>
#include <vector>

#include "gtest/gtest.h"
#include "miaudit/data.h"
#include "miaudit/error.h"
#include "test_util.h"

namespace miaudit {
namespace {

using testing::Mlp;
using testing::RandomParams;

ExperimentSplit BlobSplit(std::size_t n, std::uint64_t seed) {
  BlobSpec spec{3, 5, 0.1};
  return MakeSplit(SynthBlobs(spec, n, seed), SynthBlobs(spec, 20, seed + 1), seed);
}

TEST(DataTest, SplitTakesHalfOfPopulation) {
  const ExperimentSplit s = BlobSplit(101, 1);
  EXPECT_EQ(s.target_indices.size(), 50u);
  EXPECT_TRUE(std::is_sorted(s.target_indices.begin(), s.target_indices.end()));
  EXPECT_EQ(std::set<std::size_t>(s.target_indices.begin(), s.target_indices.end())
                .size(),
            50u);
  const Dataset dt = s.TargetTrainingSet();
  ASSERT_EQ(dt.size(), 50u);
  for (std::size_t i = 0; i < dt.size(); ++i) {
    const auto a = dt.Sample(i);
    const auto b = s.population.Sample(s.target_indices[i]);
    EXPECT_TRUE(std::equal(a.begin(), a.end(), b.begin()));
  }
  const auto mask = s.TargetMask();
  EXPECT_EQ(std::count(mask.begin(), mask.end(), true), 50);
  EXPECT_EQ(BlobSplit(101, 1).target_indices, s.target_indices);
}

TEST(DataTest, SubjectsCarryCorrectMembership) {
  const ExperimentSplit s = BlobSplit(100, 2);
  const auto mask = s.TargetMask();
  const SubjectSet subjects = SampleSubjects(s, 40, 7);
  ASSERT_EQ(subjects.k(), 40u);
  std::set<std::size_t> seen;
  for (std::size_t i = 0; i < subjects.k(); ++i) {
    const Subject& sub = subjects.subjects[i];
    EXPECT_TRUE(seen.insert(sub.population_index).second);
    EXPECT_EQ(subjects.truth.bits()[i], mask[sub.population_index]);
    const auto x = s.population.Sample(sub.population_index);
    EXPECT_TRUE(std::equal(x.begin(), x.end(), sub.x.begin()));
    EXPECT_EQ(sub.y, s.population.labels[sub.population_index]);
  }
  EXPECT_EQ(SampleSubjects(s, 40, 7).subjects, subjects.subjects);
  EXPECT_THROW(SampleSubjects(s, 101, 7), Error);
  // Everything: both sides are exhausted exactly.
  EXPECT_EQ(SampleSubjects(s, 100, 7).truth.num_members(), 50u);
}

TEST(DataTest, SubjectMembershipIsFairCoin) {
  const ExperimentSplit s = BlobSplit(400, 3);
  std::size_t members = 0, total = 0;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const SubjectSet subjects = SampleSubjects(s, 50, seed);
    members += subjects.truth.num_members();
    total += subjects.k();
  }
  EXPECT_NEAR(static_cast<double>(members) / total, 0.5, 0.05);
}

TEST(DataTest, AttackerSetExcludesSubjects) {
  const ExperimentSplit s = BlobSplit(120, 4);
  const SubjectSet subjects = SampleSubjects(s, 20, 5);
  std::set<std::size_t> subject_ids;
  for (const auto& sub : subjects.subjects) subject_ids.insert(sub.population_index);
  const AttackerSet a0 = SampleAttackerSet(s.population, subjects.subjects, 9, 0);
  const AttackerSet a1 = SampleAttackerSet(s.population, subjects.subjects, 9, 1);
  EXPECT_EQ(AttackerSetSize(120), 30u);
  ASSERT_EQ(a0.population_indices.size(), 30u);
  EXPECT_EQ(a0.data.size(), 30u);
  EXPECT_EQ(std::set<std::size_t>(a0.population_indices.begin(),
                                  a0.population_indices.end())
                .size(),
            30u);
  for (std::size_t idx : a0.population_indices) {
    EXPECT_EQ(subject_ids.count(idx), 0u);
  }
  EXPECT_NE(a0.population_indices, a1.population_indices);
  EXPECT_EQ(SampleAttackerSet(s.population, subjects.subjects, 9, 0)
                .population_indices,
            a0.population_indices);
}

TEST(DataTest, SoftRelabelUsesTargetProbabilities) {
  const Dataset d = SynthBlobs(BlobSpec{3, 4, 0.2}, 12, 6);
  const ModelParams target = RandomParams(Mlp(4, 5, 3), 6);
  const Dataset soft = SoftRelabel(d, target);
  ASSERT_EQ(soft.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    ASSERT_TRUE(soft.HasSoftLabel(i));
    const auto probs = PredictProba(target, d.Sample(i));
    EXPECT_EQ(soft.soft_labels[i], probs);
    EXPECT_EQ(soft.labels[i],
              std::max_element(probs.begin(), probs.end()) - probs.begin());
  }
  EXPECT_NO_THROW(soft.Validate());
}

TEST(DataTest, BisectionPartitionsSubjects) {
  for (std::size_t k : {2u, 3u, 10u, 51u}) {
    const Bisection b = RandomBisect(k, 4, 2);
    EXPECT_EQ(b.first.size(), (k + 1) / 2);
    EXPECT_EQ(b.second.size(), k / 2);
    std::vector<std::size_t> all = b.first;
    all.insert(all.end(), b.second.begin(), b.second.end());
    std::sort(all.begin(), all.end());
    std::vector<std::size_t> expected(k);
    std::iota(expected.begin(), expected.end(), std::size_t{0});
    EXPECT_EQ(all, expected);
  }
  EXPECT_NE(RandomBisect(20, 4, 0).first, RandomBisect(20, 4, 1).first);
  EXPECT_THROW(RandomBisect(1, 4, 0), Error);
}

TEST(DataTest, BlobsAreBoundedAndBalanced) {
  const BlobSpec spec{4, 6, 0.5};
  const Dataset d = SynthBlobs(spec, 40, 8);
  EXPECT_EQ(d.size(), 40u);
  for (std::size_t i = 0; i < d.size(); ++i) EXPECT_EQ(d.labels[i], int(i % 4));
  for (double v : d.inputs) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
  EXPECT_EQ(SynthBlobs(spec, 40, 8).inputs, d.inputs);
  EXPECT_NE(SynthBlobs(spec, 40, 9).inputs, d.inputs);
}

TEST(DataTest, DatasetValidation) {
  Dataset d;
  d.sample_shape = {2};
  d.num_classes = 2;
  d.Append(std::vector<double>{0.1, 0.2}, 1);
  EXPECT_NO_THROW(d.Validate());
  Dataset bad_label = d;
  bad_label.labels[0] = 2;
  EXPECT_THROW(bad_label.Validate(), Error);
  Dataset bad_pixel = d;
  bad_pixel.inputs[0] = 1.5;
  EXPECT_THROW(bad_pixel.Validate(), Error);
  Dataset bad_soft = d;
  bad_soft.soft_labels = {{0.3, 0.3}};
  EXPECT_THROW(bad_soft.Validate(), Error);
  const Dataset both = Concat(d, d);
  EXPECT_EQ(both.size(), 2u);
}

}  // namespace
}  // namespace miaudit
