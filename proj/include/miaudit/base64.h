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

#ifndef MIAUDIT_BASE64_H_
#define MIAUDIT_BASE64_H_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace miaudit {

std::string Base64Encode(std::span<const std::uint8_t> bytes);
// Throws ParseError on bad alphabet or padding.
std::vector<std::uint8_t> Base64Decode(std::string_view text);

// Little-endian IEEE-754 doubles.
std::string EncodeDoubles(std::span<const double> values);
std::vector<double> DecodeDoubles(std::string_view text);

}  // namespace miaudit

#endif  // MIAUDIT_BASE64_H_
