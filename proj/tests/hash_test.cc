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
#include <set>
#include <string>

#include "fanstore/error.h"
#include "fanstore/hash.h"
#include "fanstore/output_meta.h"
#include "test_util.h"

namespace fanstore {
namespace {

TEST(Fnv1a64Test, KnownVectors) {
  EXPECT_EQ(fnv1a64(std::string_view("")), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64(std::string_view("a")), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(fnv1a64(std::string_view("foobar")), 0x85944171f73967e8ULL);
}

TEST(Fnv1a64Test, IncrementalMatchesOneShot) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    std::string s(rng() % 300, '\0');
    for (char& c : s) c = static_cast<char>(rng());
    std::size_t cut = s.empty() ? 0 : rng() % s.size();
    Fnv1a64 h;
    h.update(std::string_view(s).substr(0, cut));
    h.update(std::string_view(s).substr(cut));
    EXPECT_EQ(h.digest(), testing::reference_fnv1a64(s));
  }
}

TEST(Fnv1a64Test, Hex64) {
  EXPECT_EQ(hex64(0), "0000000000000000");
  EXPECT_EQ(hex64(0xcbf29ce484222325ULL), "cbf29ce484222325");
}

TEST(OwnerOfOutputTest, MatchesReferenceModulo) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 500; ++i) {
    std::string path = "out/" + std::to_string(rng());
    for (std::uint32_t n = 1; n <= 16; ++n) {
      ASSERT_EQ(owner_of_output(path, n), testing::reference_fnv1a64(path) % n);
    }
  }
}

TEST(OwnerOfOutputTest, SingleNodeOwnsEverything) {
  EXPECT_EQ(owner_of_output("anything", 1), 0u);
  EXPECT_EQ(owner_of_output("", 1), 0u);
}

TEST(OutputMetaTableTest, CommitIsWriteOnce) {
  OutputMetaTable table;
  OutputRecord rec;
  rec.meta.size_bytes = 10;
  rec.writer = 2;
  table.commit("ckpt/a", rec);
  EXPECT_EQ(table.lookup("ckpt/a"), rec);
  EXPECT_FALSE(table.lookup("ckpt/b").has_value());
  try {
    table.commit("ckpt/a", rec);
    FAIL() << "second commit accepted";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kAlreadyExists);
  }
  EXPECT_EQ(table.size(), 1u);
}

}  // namespace
}  // namespace fanstore
