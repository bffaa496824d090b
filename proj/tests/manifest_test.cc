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

#include <random>
#include <string>

#include "fanstore/error.h"
#include "fanstore/file_meta.h"
#include "fanstore/hash.h"
#include "fanstore/manifest.h"
#include "test_util.h"

namespace fanstore {
namespace {

FileMeta sample_meta(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  FileMeta m;
  m.size_bytes = rng();
  m.mode = S_IFREG | 0640;
  m.uid = static_cast<std::uint32_t>(rng());
  m.gid = static_cast<std::uint32_t>(rng());
  m.atime_sec = static_cast<std::int64_t>(rng() >> 2);
  m.mtime_sec = -static_cast<std::int64_t>(rng() >> 2);
  m.ctime_sec = static_cast<std::int64_t>(rng() >> 2);
  m.atime_nsec = static_cast<std::int64_t>(rng() % 1000000000);
  m.mtime_nsec = static_cast<std::int64_t>(rng() % 1000000000);
  m.ctime_nsec = static_cast<std::int64_t>(rng() % 1000000000);
  m.ino = rng();
  m.dev = rng();
  m.nlink = rng();
  m.rdev = rng();
  m.blksize = rng();
  m.blocks = rng();
  return m;
}

TEST(FileMetaTest, FieldOffsets) {
  FileMeta m;
  m.size_bytes = 0x0102030405060708ULL;
  m.mode = 0x11223344;
  m.blocks = 0xa1a2a3a4a5a6a7a8ULL;
  m.ctime_nsec = 0x55;
  EncodedMeta e = encode_meta(m);
  EXPECT_EQ(e[0], 0x08);
  EXPECT_EQ(e[7], 0x01);
  EXPECT_EQ(e[8], 0x44);
  EXPECT_EQ(e[11], 0x11);
  EXPECT_EQ(e[60], 0x55);
  EXPECT_EQ(e[108], 0xa8);
  EXPECT_EQ(e[115], 0xa1);
  for (std::size_t i = FileMeta::kUsedBytes; i < FileMeta::kEncodedSize; ++i) {
    EXPECT_EQ(e[i], 0) << i;
  }
}

TEST(FileMetaTest, RoundTrip) {
  for (std::uint64_t s = 0; s < 100; ++s) {
    FileMeta m = sample_meta(s);
    EncodedMeta e = encode_meta(m);
    EXPECT_EQ(decode_meta(e.data()), m);
  }
}

TEST(FileMetaTest, RejectsNonZeroPaddingAndBadNanos) {
  EncodedMeta e = encode_meta(FileMeta{});
  e[140] = 1;
  EXPECT_THROW(decode_meta(e.data()), Error);
  FileMeta m;
  m.mtime_nsec = 1000000000;
  EncodedMeta bad = encode_meta(m);
  EXPECT_THROW(decode_meta(bad.data()), Error);
}

TEST(FileMetaTest, Helpers) {
  EXPECT_TRUE(directory_meta().is_directory());
  FileMeta out = output_file_meta(1234);
  EXPECT_TRUE(out.is_regular());
  EXPECT_EQ(out.size_bytes, 1234u);
}

PartitionManifest sample_manifest() {
  PartitionManifest m;
  m.partition_count = 2;
  m.codec = CodecId::kLzss;
  m.partitions = {{0, 2, 1000, 0x0123456789abcdefULL}, {1, 1, 500, 42}};
  m.entries = {{"a b/%x", sample_meta(1), 0, 412, 0},
               {"a b/\x01tab\t", sample_meta(2), 1, 412, 77},
               {"c", sample_meta(3), 0, 900, 0}};
  m.directories = {"", "a b"};
  return m;
}

TEST(ManifestTest, RoundTrip) {
  PartitionManifest m = sample_manifest();
  std::string text = serialize_manifest(m);
  EXPECT_EQ(parse_manifest(text), m);
}

TEST(ManifestTest, GoldenText) {
  PartitionManifest m;
  m.partition_count = 1;
  m.codec = CodecId::kIdentity;
  m.partitions = {{0, 1, 417, 0xfeedULL}};
  m.entries = {{"dir/f 1", FileMeta{}, 0, 412, 0}};
  m.directories = {"", "dir"};
  std::string body =
      "FANSMAN1\n"
      "codec 0\n"
      "partitions 1\n"
      "partition 0 1 417 000000000000feed\n"
      "dir /\n"
      "dir /dir\n"
      "file 0 412 0 " + std::string(288, '0') + " /dir/f%201\n";
  char tail[64];
  std::snprintf(tail, sizeof tail, "end %016llx\n",
                static_cast<unsigned long long>(testing::reference_fnv1a64(body)));
  EXPECT_EQ(serialize_manifest(m), body + tail);
}

TEST(ManifestTest, TamperingIsDetected) {
  std::string text = serialize_manifest(sample_manifest());
  std::string tampered = text;
  tampered[text.find("partition 1") + 10] = '7';
  EXPECT_THROW(parse_manifest(tampered), Error);
  EXPECT_THROW(parse_manifest(text.substr(0, text.size() - 5)), Error);
  EXPECT_THROW(parse_manifest(""), Error);
}

TEST(ManifestTest, UnknownCodecIsRejected) {
  PartitionManifest m = sample_manifest();
  m.codec = static_cast<CodecId>(9);
  EXPECT_THROW(parse_manifest(serialize_manifest(m)), Error);
}

TEST(ManifestTest, EntryPartitionOutOfRange) {
  PartitionManifest m = sample_manifest();
  m.entries[0].partition_id = 5;
  EXPECT_THROW(parse_manifest(serialize_manifest(m)), Error);
}

TEST(ManifestTest, DigestIgnoresNothingSemantic) {
  PartitionManifest a = sample_manifest();
  PartitionManifest b = a;
  EXPECT_EQ(manifest_digest(a), manifest_digest(b));
  b.entries[2].data_offset += 1;
  EXPECT_NE(manifest_digest(a), manifest_digest(b));
}

TEST(ManifestTest, ParentChain) {
  EXPECT_EQ(parent_chain("a/b/c"), (std::vector<std::string>{"", "a", "a/b"}));
  EXPECT_EQ(parent_chain("top"), (std::vector<std::string>{""}));
}

}  // namespace
}  // namespace fanstore
