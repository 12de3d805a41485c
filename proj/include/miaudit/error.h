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

#ifndef MIAUDIT_ERROR_H_
#define MIAUDIT_ERROR_H_

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace miaudit {

// Broad failure categories. Callers branch on these; messages are for humans.
enum class ErrorCode {
  kContract,   // caller violated a documented precondition (shapes, ranges)
  kConfig,     // invalid or inconsistent configuration
  kNumerical,  // non-finite value in a loss, objective or gradient
  kTraining,   // training diverged
  kParse,      // malformed input bytes or text
  kStat,       // not enough samples for an estimate
  kMetric,     // metric undefined for the given inputs
  kIo,         // filesystem failure
  kInternal,   // broken internal invariant
};

std::string_view ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Parse failure positioned at a byte offset of the input.
class ParseError : public Error {
 public:
  ParseError(std::size_t offset, const std::string& message);

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

}  // namespace miaudit

#endif  // MIAUDIT_ERROR_H_
