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

#include "miaudit/idx.h"

#include <cstdlib>
#include <fstream>
#include <iterator>
#include <string>

#include "miaudit/error.h"

namespace miaudit {
namespace {

std::uint32_t ReadBigEndian32(std::span<const std::uint8_t> bytes,
                              std::size_t offset) {
  return (std::uint32_t{bytes[offset]} << 24) |
         (std::uint32_t{bytes[offset + 1]} << 16) |
         (std::uint32_t{bytes[offset + 2]} << 8) |
         std::uint32_t{bytes[offset + 3]};
}

void AppendBigEndian32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

}  // namespace

std::vector<int> IdxFile::Labels() const {
  if (!is_labels()) throw Error(ErrorCode::kContract, "not an IDX label file");
  return std::vector<int>(payload.begin(), payload.end());
}

std::vector<double> IdxFile::Pixels() const {
  if (!is_images()) throw Error(ErrorCode::kContract, "not an IDX image file");
  std::vector<double> out(payload.size());
  for (std::size_t i = 0; i < payload.size(); ++i) out[i] = payload[i] / 255.0;
  return out;
}

IdxFile ParseIdx(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4) throw ParseError(bytes.size(), "truncated IDX magic");
  IdxFile file;
  file.header.magic = ReadBigEndian32(bytes, 0);
  std::size_t num_dims = 0;
  if (file.header.magic == kIdxLabelsMagic) {
    num_dims = 1;
  } else if (file.header.magic == kIdxImagesMagic) {
    num_dims = 3;
  } else {
    throw ParseError(0, "unsupported IDX magic");
  }
  std::size_t offset = 4;
  std::uint64_t expected = 1;
  for (std::size_t d = 0; d < num_dims; ++d) {
    if (bytes.size() < offset + 4) {
      throw ParseError(bytes.size(), "truncated IDX dimension " +
                                         std::to_string(d));
    }
    std::uint32_t dim = ReadBigEndian32(bytes, offset);
    file.header.dims.push_back(dim);
    expected *= dim;
    offset += 4;
  }
  const std::size_t available = bytes.size() - offset;
  if (available < expected) {
    throw ParseError(bytes.size(),
                     "truncated IDX payload: expected " +
                         std::to_string(expected) + " bytes, found " +
                         std::to_string(available));
  }
  if (available > expected) {
    throw ParseError(offset + expected, "trailing bytes after IDX payload");
  }
  file.payload.assign(bytes.begin() + offset, bytes.end());
  return file;
}

std::vector<std::uint8_t> SerializeIdx(const IdxFile& file) {
  std::vector<std::uint8_t> out;
  AppendBigEndian32(out, file.header.magic);
  for (std::uint32_t d : file.header.dims) AppendBigEndian32(out, d);
  out.insert(out.end(), file.payload.begin(), file.payload.end());
  return out;
}

IdxFile ReadIdxFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return ParseIdx(bytes);
}

void WriteIdxFile(const IdxFile& file, const std::filesystem::path& path) {
  auto bytes = SerializeIdx(file);
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
}

Dataset DatasetFromIdx(const IdxFile& images, const IdxFile& labels,
                       int num_classes, std::optional<std::size_t> limit) {
  if (!images.is_images() || !labels.is_labels()) {
    throw Error(ErrorCode::kContract, "expected an image and a label file");
  }
  std::size_t count = images.header.dims[0];
  if (labels.header.dims[0] != count) {
    throw Error(ErrorCode::kContract, "image and label counts differ");
  }
  if (limit) count = std::min(count, *limit);
  const std::size_t rows = images.header.dims[1];
  const std::size_t cols = images.header.dims[2];
  Dataset data;
  data.sample_shape = {1, rows, cols};
  data.num_classes = num_classes;
  data.inputs.resize(count * rows * cols);
  for (std::size_t i = 0; i < data.inputs.size(); ++i) {
    data.inputs[i] = images.payload[i] / 255.0;
  }
  data.labels.assign(labels.payload.begin(), labels.payload.begin() + count);
  data.Validate();
  return data;
}

std::filesystem::path ResolveDataPath(const std::filesystem::path& name) {
  if (name.is_absolute()) return name;
  if (const char* dir = std::getenv("MI_AUDIT_DATA_DIR"); dir && *dir) {
    return std::filesystem::path(dir) / name;
  }
  return name;
}

}  // namespace miaudit
