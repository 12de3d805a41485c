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

// IDX container (MNIST / Fashion-MNIST): big-endian magic and dimensions
// followed by an unsigned-byte payload.

#ifndef MIAUDIT_IDX_H_
#define MIAUDIT_IDX_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "miaudit/dataset.h"

namespace miaudit {

inline constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;
inline constexpr std::uint32_t kIdxImagesMagic = 0x00000803;

struct IdxHeader {
  std::uint32_t magic = 0;
  std::vector<std::uint32_t> dims;
  bool operator==(const IdxHeader&) const = default;
};

struct IdxFile {
  IdxHeader header;
  std::vector<std::uint8_t> payload;
  bool operator==(const IdxFile&) const = default;

  bool is_labels() const { return header.magic == kIdxLabelsMagic; }
  bool is_images() const { return header.magic == kIdxImagesMagic; }

  // Payload bytes as labels. Throws kContract for image files.
  std::vector<int> Labels() const;
  // Payload scaled to [0,1] by division by 255. Throws for label files.
  std::vector<double> Pixels() const;
};

// Throws ParseError positioned at the offending byte for an unknown magic,
// a truncated header or payload, or trailing bytes.
IdxFile ParseIdx(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> SerializeIdx(const IdxFile& file);

IdxFile ReadIdxFile(const std::filesystem::path& path);
void WriteIdxFile(const IdxFile& file, const std::filesystem::path& path);

// Combines an image file and a label file into a dataset with sample shape
// [1, rows, cols]. `limit` keeps only the first samples.
Dataset DatasetFromIdx(const IdxFile& images, const IdxFile& labels,
                       int num_classes,
                       std::optional<std::size_t> limit = std::nullopt);

// Resolves `name` against MI_AUDIT_DATA_DIR when it is relative and the
// variable is set.
std::filesystem::path ResolveDataPath(const std::filesystem::path& name);

}  // namespace miaudit

#endif  // MIAUDIT_IDX_H_
