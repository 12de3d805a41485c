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

#include "miaudit/error.h"

namespace miaudit {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kContract:
      return "contract";
    case ErrorCode::kConfig:
      return "config";
    case ErrorCode::kNumerical:
      return "numerical";
    case ErrorCode::kTraining:
      return "training";
    case ErrorCode::kParse:
      return "parse";
    case ErrorCode::kStat:
      return "stat";
    case ErrorCode::kMetric:
      return "metric";
    case ErrorCode::kIo:
      return "io";
    case ErrorCode::kInternal:
      return "internal";
  }
  return "unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(ErrorCodeName(code)) + " error: " +
                         message),
      code_(code) {}

ParseError::ParseError(std::size_t offset, const std::string& message)
    : Error(ErrorCode::kParse,
            message + " (at byte offset " + std::to_string(offset) + ")"),
      offset_(offset) {}

}  // namespace miaudit
