// Copyright 2026 The FanStore Authors
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

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "fanstore/codec.h"
#include "fanstore/file_meta.h"

namespace fanstore {

inline constexpr std::string_view kManifestMagic = "FANSMAN1";
inline constexpr std::string_view kManifestFileName = "manifest.fans";

struct ManifestEntry {
  std::string path;
  FileMeta meta;
  std::uint32_t partition_id = 0;
  std::uint64_t data_offset = 0;
  std::uint64_t compressed_size = 0;

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

struct PartitionInfo {
  std::uint32_t id = 0;
  std::uint32_t entry_count = 0;
  std::uint64_t byte_size = 0;
  std::uint64_t digest = 0;  // FNV-1a 64 over the whole partition file

  friend bool operator==(const PartitionInfo&, const PartitionInfo&) = default;
};

// Index of a packed dataset. Entries keep pack order; directories are the
// sorted closure of every entry's parent chain, including the root "".
struct PartitionManifest {
  std::uint32_t partition_count = 0;
  CodecId codec = CodecId::kIdentity;
  std::vector<PartitionInfo> partitions;
  std::vector<ManifestEntry> entries;
  std::vector<std::string> directories;

  friend bool operator==(const PartitionManifest&,
                         const PartitionManifest&) = default;
};

// Text encoding, one record per line:
//
//   FANSMAN1
//   codec <id>
//   partitions <count>
//   partition <id> <entry_count> <byte_size> <digest:16 hex>
//   dir /<path>
//   file <partition_id> <data_offset> <compressed_size> <meta:288 hex> /<path>
//   end <checksum:16 hex>
//
// Paths are written with a leading '/' so the root directory is "/". Bytes
// '%', space, control characters and 0x7f are percent-encoded. The checksum
// is FNV-1a 64 over every byte preceding the "end" line.
std::string serialize_manifest(const PartitionManifest& manifest);

// Throws Error(kCorrupt) on a bad magic, malformed record or checksum
// mismatch.
PartitionManifest parse_manifest(std::string_view text);

void write_manifest(const PartitionManifest& manifest,
                    const std::filesystem::path& path);
PartitionManifest read_manifest(const std::filesystem::path& path);

// Checksum recorded in the "end" line.
std::uint64_t manifest_digest(const PartitionManifest& manifest);

// All parent directories of path, from the root "" downwards.
std::vector<std::string> parent_chain(std::string_view path);

}  // namespace fanstore
