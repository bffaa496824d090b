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

#include "fanstore/file_meta.h"

#include <unistd.h>

#include <chrono>
#include <string>

#include "fanstore/error.h"

namespace fanstore {
namespace {

constexpr std::int64_t kNanosPerSecond = 1'000'000'000;

void check_nsec(std::int64_t v, const char* field) {
  if (v < 0 || v >= kNanosPerSecond) {
    throw Error(Errc::kCorrupt, std::string(field) + " out of range: " +
                                    std::to_string(v));
  }
}

}  // namespace

void encode_meta(const FileMeta& m, std::uint8_t* out) {
  std::memset(out, 0, FileMeta::kEncodedSize);
  store_le(out + 0, m.size_bytes);
  store_le(out + 8, m.mode);
  store_le(out + 12, m.uid);
  store_le(out + 16, m.gid);
  store_le(out + 20, m.atime_sec);
  store_le(out + 28, m.mtime_sec);
  store_le(out + 36, m.ctime_sec);
  store_le(out + 44, m.atime_nsec);
  store_le(out + 52, m.mtime_nsec);
  store_le(out + 60, m.ctime_nsec);
  store_le(out + 68, m.ino);
  store_le(out + 76, m.dev);
  store_le(out + 84, m.nlink);
  store_le(out + 92, m.rdev);
  store_le(out + 100, m.blksize);
  store_le(out + 108, m.blocks);
}

EncodedMeta encode_meta(const FileMeta& meta) {
  EncodedMeta out;
  encode_meta(meta, out.data());
  return out;
}

void append_meta(Bytes& out, const FileMeta& meta) {
  std::size_t at = out.size();
  out.resize(at + FileMeta::kEncodedSize);
  encode_meta(meta, out.data() + at);
}

FileMeta decode_meta(const std::uint8_t* in) {
  FileMeta m;
  m.size_bytes = load_le<std::uint64_t>(in + 0);
  m.mode = load_le<std::uint32_t>(in + 8);
  m.uid = load_le<std::uint32_t>(in + 12);
  m.gid = load_le<std::uint32_t>(in + 16);
  m.atime_sec = load_le<std::int64_t>(in + 20);
  m.mtime_sec = load_le<std::int64_t>(in + 28);
  m.ctime_sec = load_le<std::int64_t>(in + 36);
  m.atime_nsec = load_le<std::int64_t>(in + 44);
  m.mtime_nsec = load_le<std::int64_t>(in + 52);
  m.ctime_nsec = load_le<std::int64_t>(in + 60);
  m.ino = load_le<std::uint64_t>(in + 68);
  m.dev = load_le<std::uint64_t>(in + 76);
  m.nlink = load_le<std::uint64_t>(in + 84);
  m.rdev = load_le<std::uint64_t>(in + 92);
  m.blksize = load_le<std::uint64_t>(in + 100);
  m.blocks = load_le<std::uint64_t>(in + 108);
  check_nsec(m.atime_nsec, "atime_nsec");
  check_nsec(m.mtime_nsec, "mtime_nsec");
  check_nsec(m.ctime_nsec, "ctime_nsec");
  for (std::size_t i = FileMeta::kUsedBytes; i < FileMeta::kEncodedSize; ++i) {
    if (in[i] != 0) throw Error(Errc::kCorrupt, "stat padding not zero");
  }
  return m;
}

FileMeta meta_from_stat(const struct stat& st) {
  FileMeta m;
  m.size_bytes = static_cast<std::uint64_t>(st.st_size);
  m.mode = st.st_mode;
  m.uid = st.st_uid;
  m.gid = st.st_gid;
  m.atime_sec = st.st_atim.tv_sec;
  m.atime_nsec = st.st_atim.tv_nsec;
  m.mtime_sec = st.st_mtim.tv_sec;
  m.mtime_nsec = st.st_mtim.tv_nsec;
  m.ctime_sec = st.st_ctim.tv_sec;
  m.ctime_nsec = st.st_ctim.tv_nsec;
  m.ino = st.st_ino;
  m.dev = st.st_dev;
  m.nlink = st.st_nlink;
  m.rdev = st.st_rdev;
  m.blksize = static_cast<std::uint64_t>(st.st_blksize);
  m.blocks = static_cast<std::uint64_t>(st.st_blocks);
  return m;
}

FileMeta directory_meta() {
  FileMeta m;
  m.mode = S_IFDIR | 0755;
  m.nlink = 2;
  m.blksize = 4096;
  return m;
}

FileMeta output_file_meta(std::uint64_t size) {
  using namespace std::chrono;
  auto now = duration_cast<nanoseconds>(system_clock::now().time_since_epoch())
                 .count();
  FileMeta m;
  m.size_bytes = size;
  m.mode = S_IFREG | 0644;
  m.uid = ::getuid();
  m.gid = ::getgid();
  m.atime_sec = m.mtime_sec = m.ctime_sec = now / kNanosPerSecond;
  m.atime_nsec = m.mtime_nsec = m.ctime_nsec = now % kNanosPerSecond;
  m.nlink = 1;
  m.blksize = 4096;
  m.blocks = (size + 511) / 512;
  return m;
}

}  // namespace fanstore
