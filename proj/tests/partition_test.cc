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

#include <gtest/gtest.h>
#include <sys/stat.h>

#include <cstring>
#include <random>
#include <string>
#include <vector>

#include "fanstore/codec.h"
#include "fanstore/error.h"
#include "fanstore/io.h"
#include "fanstore/manifest.h"
#include "fanstore/partition.h"
#include "test_util.h"

namespace fanstore {
namespace {

namespace fs = std::filesystem;
using testing::TempDir;
using Buffer = std::vector<std::uint8_t>;

void put_u32(Buffer& b, std::size_t at, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b[at + i] = static_cast<std::uint8_t>(v >> (8 * i));
}
void put_u64(Buffer& b, std::size_t at, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) b[at + i] = static_cast<std::uint8_t>(v >> (8 * i));
}
std::uint32_t get_u32(const Buffer& b, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | b[at + i];
  return v;
}
std::uint64_t get_u64(const Buffer& b, std::size_t at) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | b[at + i];
  return v;
}

// The 144-byte stat record built field by field from struct stat at the
// documented offsets, independent of the library encoder.
Buffer expected_stat_record(const struct stat& st) {
  Buffer r(144, 0);
  put_u64(r, 0, static_cast<std::uint64_t>(st.st_size));
  put_u32(r, 8, st.st_mode);
  put_u32(r, 12, st.st_uid);
  put_u32(r, 16, st.st_gid);
  put_u64(r, 20, static_cast<std::uint64_t>(st.st_mtim.tv_sec));  // atime pinned
  put_u64(r, 28, static_cast<std::uint64_t>(st.st_mtim.tv_sec));
  put_u64(r, 36, static_cast<std::uint64_t>(st.st_ctim.tv_sec));
  put_u64(r, 44, static_cast<std::uint64_t>(st.st_mtim.tv_nsec));
  put_u64(r, 52, static_cast<std::uint64_t>(st.st_mtim.tv_nsec));
  put_u64(r, 60, static_cast<std::uint64_t>(st.st_ctim.tv_nsec));
  put_u64(r, 68, st.st_ino);
  put_u64(r, 76, st.st_dev);
  put_u64(r, 84, st.st_nlink);
  put_u64(r, 92, st.st_rdev);
  put_u64(r, 100, static_cast<std::uint64_t>(st.st_blksize));
  put_u64(r, 108, static_cast<std::uint64_t>(st.st_blocks));
  return r;
}

// Walks a partition with nothing but the layout rules: returns name, stored
// length and data offset per entry.
struct ScannedEntry {
  std::string name;
  std::uint64_t size;
  std::uint64_t compressed_size;
  std::uint64_t data_offset;
};
std::vector<ScannedEntry> scan_partition(const Buffer& b) {
  std::vector<ScannedEntry> out;
  std::uint32_t count = get_u32(b, 0);
  std::size_t pos = 4;
  for (std::uint32_t i = 0; i < count; ++i) {
    ScannedEntry e;
    e.name = std::string(reinterpret_cast<const char*>(&b[pos]));
    e.size = get_u64(b, pos + 256);
    e.compressed_size = get_u64(b, pos + 400);
    e.data_offset = pos + 408;
    pos = e.data_offset + (e.compressed_size ? e.compressed_size : e.size);
    out.push_back(e);
  }
  EXPECT_EQ(pos, b.size()) << "trailing bytes after the last entry";
  return out;
}

TEST(PartitionLayoutTest, OneFileGoldenBytes) {
  TempDir dir;
  const std::string payload = "FanStore golden payload\n";
  testing::write_bytes(dir / "src/hello.txt", Buffer(payload.begin(), payload.end()));
  testing::set_times(dir / "src/hello.txt", 1600000000);
  struct stat st;
  ASSERT_EQ(::stat((dir / "src/hello.txt").c_str(), &st), 0);

  std::vector<std::string> files{"hello.txt"};
  pack_dataset(files, dir / "src", 1, {}, dir / "out");

  Buffer expected(412 + payload.size(), 0);
  put_u32(expected, 0, 1);
  std::memcpy(&expected[4], "hello.txt", 9);
  Buffer rec = expected_stat_record(st);
  std::copy(rec.begin(), rec.end(), expected.begin() + 260);
  put_u64(expected, 404, 0);
  std::memcpy(&expected[412], payload.data(), payload.size());

  Buffer actual = testing::read_bytes(dir / "out/part.0");
  ASSERT_EQ(actual.size(), expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i) {
    ASSERT_EQ(actual[i], expected[i]) << "byte " << i;
  }
  EXPECT_EQ(kFirstDataOffset, 412u);
}

TEST(PartitionLayoutTest, ByteScanMatchesIndexAndManifest) {
  TempDir dir;
  std::mt19937_64 rng(41);
  std::vector<std::string> files;
  for (int i = 0; i < 40; ++i) {
    std::string rel = "d" + std::to_string(i % 3) + "/f" + std::to_string(i);
    testing::write_bytes(dir / ("src/" + rel),
                         testing::mixed_content(rng, rng() % 20000));
    files.push_back(rel);
  }
  PackOptions options;
  options.codec = CodecId::kLzss;
  auto manifest = pack_dataset(files, dir / "src", 3, options, dir / "out");

  for (std::uint32_t p = 0; p < 3; ++p) {
    fs::path part = dir / ("out/part." + std::to_string(p));
    auto scanned = scan_partition(testing::read_bytes(part));
    auto index = read_partition_index(part);
    ASSERT_EQ(scanned.size(), index.size());
    std::size_t k = 0;
    for (std::size_t i = p; i < files.size(); i += 3, ++k) {
      // Round-robin placement: file i lands in partition i mod 3, in order.
      EXPECT_EQ(scanned[k].name, files[i]);
      EXPECT_EQ(index[k].file_name, files[i]);
      EXPECT_EQ(index[k].data_offset, scanned[k].data_offset);
      EXPECT_EQ(index[k].compressed_size, scanned[k].compressed_size);
      const ManifestEntry& m = manifest.entries[i];
      EXPECT_EQ(m.partition_id, p);
      EXPECT_EQ(m.data_offset, scanned[k].data_offset);
      Buffer original = testing::read_bytes(dir / ("src/" + files[i]));
      EXPECT_EQ(extract_file(part, index[k], CodecRegistry::get(CodecId::kLzss)),
                original);
      if (scanned[k].compressed_size != 0) {
        EXPECT_LT(scanned[k].compressed_size, original.size());
      }
    }
    verify_partition(part, manifest, p);
  }
}

TEST(PartitionLayoutTest, CompressionKeptOnlyWhenSmaller) {
  TempDir dir;
  std::mt19937_64 rng(43);
  Buffer random(1 << 20);
  for (auto& b : random) b = static_cast<std::uint8_t>(rng());
  testing::write_bytes(dir / "src/random.bin", random);
  testing::write_bytes(dir / "src/zeros.bin", Buffer(1 << 20, 0));
  testing::write_bytes(dir / "src/empty.bin", {});
  PackOptions options;
  options.codec = CodecId::kLzss;
  std::vector<std::string> files{"random.bin", "zeros.bin", "empty.bin"};
  auto manifest = pack_dataset(files, dir / "src", 1, options, dir / "out");
  EXPECT_EQ(manifest.entries[0].compressed_size, 0u);
  EXPECT_GT(manifest.entries[1].compressed_size, 0u);
  EXPECT_EQ(manifest.entries[2].compressed_size, 0u);
  EXPECT_EQ(manifest.codec, CodecId::kLzss);
}

TEST(PartitionLayoutTest, RepackIsByteIdentical) {
  TempDir dir;
  std::mt19937_64 rng(47);
  std::vector<std::string> files;
  for (int i = 0; i < 10; ++i) {
    files.push_back("f" + std::to_string(i));
    testing::write_bytes(dir / ("src/" + files.back()), testing::mixed_content(rng, 5000));
  }
  PackOptions options;
  options.codec = CodecId::kLzss;
  pack_dataset(files, dir / "src", 2, options, dir / "a");
  pack_dataset(files, dir / "src", 2, options, dir / "b");
  for (const char* f : {"part.0", "part.1", "manifest.fans"}) {
    EXPECT_EQ(testing::read_bytes(dir / (std::string("a/") + f)),
              testing::read_bytes(dir / (std::string("b/") + f)))
        << f;
  }
}

TEST(PartitionLayoutTest, RejectsBadFileLists) {
  TempDir dir;
  testing::write_bytes(dir / "src/a", {1});
  auto expect_invalid = [&](std::vector<std::string> files) {
    try {
      pack_dataset(files, dir / "src", 1, {}, dir / "out");
      ADD_FAILURE() << "accepted";
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::kInvalidArgument) << e.what();
    }
  };
  expect_invalid({"a", "./a"});
  expect_invalid({"../escape"});
  expect_invalid({std::string(256, 'x')});
  expect_invalid({"/elsewhere/a"});
  EXPECT_THROW(pack_dataset(std::vector<std::string>{"a"}, dir / "src", 0, {},
                            dir / "out"),
               Error);
}

TEST(PartitionLayoutTest, AbsolutePathsUnderRootAreRelativized) {
  TempDir dir;
  testing::write_bytes(dir / "src/x/y", {1, 2, 3});
  std::vector<std::string> files{(dir / "src/x/y").string()};
  auto m = pack_dataset(files, dir / "src", 1, {}, dir / "out");
  EXPECT_EQ(m.entries[0].path, "x/y");
  EXPECT_EQ(m.directories, (std::vector<std::string>{"", "x"}));
}

TEST(PartitionLayoutTest, MaximumLengthPathFits) {
  TempDir dir;
  std::string name(255, 'n');
  testing::write_bytes(dir / ("src/" + name), {9});
  std::vector<std::string> files{name};
  pack_dataset(files, dir / "src", 1, {}, dir / "out");
  auto index = read_partition_index(dir / "out/part.0");
  EXPECT_EQ(index[0].file_name, name);
}

class PartitionCorruptionTest : public ::testing::Test {
 protected:
  void SetUp() override {
    for (int i = 0; i < 3; ++i) {
      files_.push_back("f" + std::to_string(i));
      testing::write_bytes(dir_ / ("src/" + files_.back()), Buffer(1000 + i, 'a' + i));
    }
    manifest_ = pack_dataset(files_, dir_ / "src", 1, {}, dir_ / "out");
    part_ = dir_ / "out/part.0";
    bytes_ = testing::read_bytes(part_);
  }

  TempDir dir_;
  std::vector<std::string> files_;
  PartitionManifest manifest_;
  fs::path part_;
  Buffer bytes_;
};

TEST_F(PartitionCorruptionTest, TruncationNamesTheEntry) {
  // Cut inside the third entry's data.
  Buffer cut(bytes_.begin(), bytes_.end() - 10);
  testing::write_bytes(part_, cut);
  try {
    read_partition_index(part_);
    FAIL();
  } catch (const CorruptionError& e) {
    EXPECT_EQ(e.entry_index(), 2u);
  }
  // Cut inside the second entry's header.
  Buffer cut2(bytes_.begin(), bytes_.begin() + 412 + 1000 + 100);
  testing::write_bytes(part_, cut2);
  try {
    read_partition_index(part_);
    FAIL();
  } catch (const CorruptionError& e) {
    EXPECT_EQ(e.entry_index(), 1u);
  }
}

TEST_F(PartitionCorruptionTest, FlippedDataByteFailsVerification) {
  bytes_[412 + 10] ^= 0xff;
  testing::write_bytes(part_, bytes_);
  EXPECT_NO_THROW(read_partition_index(part_));
  try {
    verify_partition(part_, manifest_, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kCorrupt);
  }
}

TEST_F(PartitionCorruptionTest, UnterminatedNameIsCorrupt) {
  std::fill(bytes_.begin() + 4, bytes_.begin() + 260, 'x');
  testing::write_bytes(part_, bytes_);
  EXPECT_THROW(read_partition_index(part_), CorruptionError);
}

TEST_F(PartitionCorruptionTest, MissingFileIsNotFound) {
  fs::remove(part_);
  try {
    verify_partition(part_, manifest_, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kNotFound);
  }
}

TEST(NormalizePathTest, Cases) {
  EXPECT_EQ(normalize_relative_path("a//b/./c"), "a/b/c");
  EXPECT_EQ(normalize_relative_path("a/b/../c"), "a/c");
  EXPECT_EQ(normalize_relative_path(""), "");
  EXPECT_THROW(normalize_relative_path("../a"), Error);
}

}  // namespace
}  // namespace fanstore
