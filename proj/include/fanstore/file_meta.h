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

#include <sys/stat.h>

#include <array>
#include <cstdint>

#include "fanstore/bytes.h"

namespace fanstore {

// Per-file stat record. Serialized as 144 bytes: the fields below in
// declaration order, packed without alignment, little-endian, then zero
// padding from byte 116 to 143.
//
//   0 size_bytes   8 mode   12 uid   16 gid
//  20 atime_sec   28 mtime_sec   36 ctime_sec
//  44 atime_nsec  52 mtime_nsec  60 ctime_nsec
//  68 ino  76 dev  84 nlink  92 rdev  100 blksize  108 blocks
struct FileMeta {
  static constexpr std::size_t kEncodedSize = 144;
  static constexpr std::size_t kUsedBytes = 116;

  std::uint64_t size_bytes = 0;
  std::uint32_t mode = 0;
  std::uint32_t uid = 0;
  std::uint32_t gid = 0;
  std::int64_t atime_sec = 0;
  std::int64_t mtime_sec = 0;
  std::int64_t ctime_sec = 0;
  std::int64_t atime_nsec = 0;
  std::int64_t mtime_nsec = 0;
  std::int64_t ctime_nsec = 0;
  std::uint64_t ino = 0;
  std::uint64_t dev = 0;
  std::uint64_t nlink = 0;
  std::uint64_t rdev = 0;
  std::uint64_t blksize = 0;
  std::uint64_t blocks = 0;

  bool is_directory() const { return S_ISDIR(mode); }
  bool is_regular() const { return S_ISREG(mode); }

  friend bool operator==(const FileMeta&, const FileMeta&) = default;
};

using EncodedMeta = std::array<std::uint8_t, FileMeta::kEncodedSize>;

EncodedMeta encode_meta(const FileMeta& meta);
void encode_meta(const FileMeta& meta, std::uint8_t* out);
void append_meta(Bytes& out, const FileMeta& meta);

// Throws Error(kCorrupt) when a nanosecond field is outside [0, 1e9) or the
// padding is not zero.
FileMeta decode_meta(const std::uint8_t* in);

FileMeta meta_from_stat(const struct stat& st);

// Synthetic record for directories in the packed namespace.
FileMeta directory_meta();

// Record for a freshly committed output file of the given size, stamped now.
FileMeta output_file_meta(std::uint64_t size);

}  // namespace fanstore
