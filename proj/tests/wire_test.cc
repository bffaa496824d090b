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

#include <random>

#include "fanstore/error.h"
#include "fanstore/wire.h"

namespace fanstore::wire {
namespace {

Frame random_frame(std::mt19937_64& rng) {
  Frame f;
  f.opcode = static_cast<Opcode>(rng() % 8);
  f.request_id = rng();
  f.path.resize(rng() % 300);
  for (char& c : f.path) c = static_cast<char>(rng());
  f.payload.resize(rng() % 2 == 0 ? rng() % 64 : rng() % 70000);
  for (auto& b : f.payload) b = static_cast<std::uint8_t>(rng());
  return f;
}

TEST(WireTest, GoldenFetchRequest) {
  Frame f{Opcode::kFetchFile, 0x0102030405060708ULL, "a/b", {}};
  Bytes expected = {'F', 'A', 'N', 'S', 1, 1, 8, 7, 6, 5, 4, 3, 2, 1,
                    3, 0, 'a', '/', 'b', 0, 0, 0, 0};
  EXPECT_EQ(encode_frame(f), expected);
  EXPECT_EQ(encoded_size(f), expected.size());
}

TEST(WireTest, FuzzedRoundTrip) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 2000; ++i) {
    Frame f = random_frame(rng);
    Bytes b = encode_frame(f);
    ASSERT_EQ(b.size(), encoded_size(f));
    std::size_t consumed = 0;
    auto back = decode_frame(b, &consumed);
    ASSERT_TRUE(back.has_value());
    ASSERT_EQ(*back, f);
    ASSERT_EQ(consumed, b.size());
  }
}

TEST(WireTest, PrefixesAreIncomplete) {
  std::mt19937_64 rng(2);
  Frame f = random_frame(rng);
  Bytes b = encode_frame(f);
  for (std::size_t n = 0; n < b.size(); n += 1 + n / 7) {
    EXPECT_FALSE(decode_frame(ByteView(b).first(n), nullptr).has_value()) << n;
  }
}

TEST(WireTest, BackToBackFrames) {
  Frame a{Opcode::kStatOutput, 1, "x", {}};
  Frame b{Opcode::kCommitOk, 2, "", {9, 9}};
  Bytes buf = encode_frame(a);
  append(buf, encode_frame(b));
  std::size_t used = 0;
  EXPECT_EQ(*decode_frame(buf, &used), a);
  EXPECT_EQ(*decode_frame(ByteView(buf).subspan(used), nullptr), b);
}

TEST(WireTest, MalformedHeadersThrow) {
  Bytes good = encode_frame(Frame{Opcode::kFetchFile, 1, "p", {}});
  auto expect_protocol = [](Bytes b) {
    try {
      decode_frame(b, nullptr);
      ADD_FAILURE();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::kProtocol);
    }
  };
  Bytes bad_magic = good;
  bad_magic[0] = 'X';
  expect_protocol(bad_magic);
  Bytes bad_version = good;
  bad_version[4] = 2;
  expect_protocol(bad_version);
  Bytes bad_op = good;
  bad_op[5] = 42;
  expect_protocol(bad_op);
  Bytes huge = good;
  huge[17] = 0xff;
  huge[18] = 0xff;
  huge[19] = 0xff;
  huge[20] = 0x7f;
  expect_protocol(huge);
}

TEST(WireTest, PayloadCodecs) {
  FileMeta meta;
  meta.size_bytes = 100;
  Bytes stored(40, 7);
  FetchResult r = decode_fetch_payload(encode_fetch_payload(meta, stored));
  EXPECT_EQ(r.meta, meta);
  EXPECT_EQ(r.stored, stored);
  EXPECT_TRUE(r.compressed);
  EXPECT_EQ(encode_fetch_payload(meta, stored).size(), 144u + 8u + 40u);

  OutputRecord rec{meta, 3};
  EXPECT_EQ(encode_output_record(rec).size(), kOutputRecordSize);
  EXPECT_EQ(decode_output_record(encode_output_record(rec)), rec);
  EXPECT_THROW(decode_output_record(Bytes(10)), Error);

  auto [code, msg] = decode_error(encode_error(ErrCode::kNotOwner, "nope"));
  EXPECT_EQ(code, ErrCode::kNotOwner);
  EXPECT_EQ(msg, "nope");
  EXPECT_EQ(wire_to_errc(errc_to_wire(Errc::kAlreadyExists)), Errc::kAlreadyExists);
}

}  // namespace
}  // namespace fanstore::wire
