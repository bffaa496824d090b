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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fanstore/bytes.h"
#include "fanstore/codec.h"
#include "fanstore/file_meta.h"
#include "fanstore/manifest.h"

namespace fanstore {

// Partition file layout (all integers little-endian):
//
//   bytes 0..3      u32 number of entries
//   then, per entry, contiguously:
//     +0   .. +255  file name, relative path, NUL-terminated, zero-padded
//     +256 .. +399  FileMeta (144 bytes)
//     +400 .. +407  u64 compressed_size, 0 when stored raw
//     +408 ..       data, compressed_size bytes or meta.size_bytes when raw
//
// For the first entry this puts the name at 4..259, the stat record at
// 260..403, compressed_size at 404..411 and data from 412.
inline constexpr std::size_t kCountFieldSize = 4;
inline constexpr std::size_t kNameFieldSize = 256;
inline constexpr std::size_t kMaxPathLength = kNameFieldSize - 1;
inline constexpr std::size_t kEntryHeaderSize =
    kNameFieldSize + FileMeta::kEncodedSize + 8;
inline constexpr std::size_t kFirstDataOffset =
    kCountFieldSize + kEntryHeaderSize;

struct PartitionEntry {
  std::string file_name;
  FileMeta meta;
  std::uint64_t compressed_size = 0;
  std::uint64_t data_offset = 0;

  bool compressed() const { return compressed_size != 0; }
  std::uint64_t stored_size() const {
    return compressed_size != 0 ? compressed_size : meta.size_bytes;
  }
};

std::string partition_file_name(std::uint32_t partition_id);

struct PackOptions {
  // nullopt packs without compression (codec id 0 in the manifest).
  std::optional<CodecId> codec;
  // Codec level; nullopt selects the codec's default.
  std::optional<int> level;
};

// Reorganizes the listed files into partition_count partition files
// part.0 .. part.(P-1) plus a manifest under out_dir. File i goes to
// partition i mod P. Entries listed as absolute paths must lie under root;
// relative entries are resolved against root. Each file is compressed on its
// own and kept compressed only when strictly smaller than the source.
PartitionManifest pack_dataset(std::span<const std::string> file_list,
                               const std::filesystem::path& root,
                               std::uint32_t partition_count,
                               const PackOptions& options,
                               const std::filesystem::path& out_dir);

// Walks the headers of a partition file without loading entry data. Throws
// CorruptionError naming the failing entry on truncation or bad headers.
std::vector<PartitionEntry> read_partition_index(
    const std::filesystem::path& partition_path);

// Stored (possibly compressed) bytes of one entry.
Bytes read_stored_bytes(const std::filesystem::path& partition_path,
                        const PartitionEntry& entry);

// Original file content of one entry.
Bytes extract_file(const std::filesystem::path& partition_path,
                   const PartitionEntry& entry, const Codec& codec);

// Turns stored bytes back into file content, validating the length.
Bytes decode_stored(ByteView stored, bool compressed, std::uint64_t size,
                    const Codec& codec);

// Checks a partition file against the manifest: entry names, offsets, sizes
// and the whole-file digest. Throws Error(kCorrupt) on any mismatch.
void verify_partition(const std::filesystem::path& partition_path,
                      const PartitionManifest& manifest,
                      std::uint32_t partition_id);

// Normalizes a dataset-relative path: strips "./", collapses duplicate
// separators, rejects ".." escapes and absolute paths.
std::string normalize_relative_path(std::string_view path);

}  // namespace fanstore
