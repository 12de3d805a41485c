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

#ifndef MIAUDIT_RNG_H_
#define MIAUDIT_RNG_H_

#include <cstdint>
#include <initializer_list>
#include <random>

namespace miaudit {

using Rng = std::mt19937_64;

// SplitMix64 finalizer.
std::uint64_t MixSeed(std::uint64_t value);

// Derives a child seed from a parent seed and a path of tags. Child streams
// depend only on (parent, tags), so work can be scheduled in any order.
std::uint64_t DeriveSeed(std::uint64_t parent,
                         std::initializer_list<std::uint64_t> tags);

// Stream tags. Values are part of the determinism contract; do not renumber.
namespace seed_tag {
inline constexpr std::uint64_t kInit = 1;
inline constexpr std::uint64_t kShuffle = 2;
inline constexpr std::uint64_t kDpNoise = 3;
inline constexpr std::uint64_t kSplit = 10;
inline constexpr std::uint64_t kSubjects = 11;
inline constexpr std::uint64_t kAttackerSet = 12;
inline constexpr std::uint64_t kBisect = 13;
inline constexpr std::uint64_t kNoiseBank = 14;
inline constexpr std::uint64_t kData = 15;
inline constexpr std::uint64_t kTarget = 20;
inline constexpr std::uint64_t kShadowNonmember = 21;
inline constexpr std::uint64_t kShadowMember = 22;
inline constexpr std::uint64_t kShadowPairFirst = 23;
inline constexpr std::uint64_t kShadowPairSecond = 24;
inline constexpr std::uint64_t kPrepare = 25;
inline constexpr std::uint64_t kUnknownModel = 30;
inline constexpr std::uint64_t kDpModel = 31;
inline constexpr std::uint64_t kShuffledBaseline = 40;
}  // namespace seed_tag

}  // namespace miaudit

#endif  // MIAUDIT_RNG_H_
