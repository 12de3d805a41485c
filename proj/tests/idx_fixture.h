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

#ifndef MIAUDIT_TESTS_IDX_FIXTURE_H_
#define MIAUDIT_TESTS_IDX_FIXTURE_H_

#include <cstdint>
#include <vector>

namespace miaudit::testing {

// Four 2x3 images, written out byte by byte.
inline std::vector<std::uint8_t> FourImageFixture() {
  return {0x00, 0x00, 0x08, 0x03,  // magic
          0x00, 0x00, 0x00, 0x04,  // count
          0x00, 0x00, 0x00, 0x02,  // rows
          0x00, 0x00, 0x00, 0x03,  // cols
          0,   255, 128, 1,   2,   3,    //
          10,  20,  30,  40,  50,  60,   //
          255, 254, 253, 252, 251, 250,  //
          7,   0,   7,   0,   7,   0};
}

inline std::vector<std::uint8_t> FourLabelFixture() {
  return {0x00, 0x00, 0x08, 0x01, 0x00, 0x00, 0x00, 0x04, 3, 0, 9, 1};
}

}  // namespace miaudit::testing

#endif  // MIAUDIT_TESTS_IDX_FIXTURE_H_
