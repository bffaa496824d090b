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

#include <map>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "fanstore/error.h"
#include "fanstore/file_cache.h"

namespace fanstore {
namespace {

TEST(FileCacheTest, AcquireInsertRelease) {
  FileCache cache;
  EXPECT_EQ(cache.acquire("a"), nullptr);
  auto c1 = cache.insert("a", Bytes{1, 2, 3});
  EXPECT_EQ(cache.refcount("a"), 1u);
  auto c2 = cache.acquire("a");
  EXPECT_EQ(c1, c2);
  EXPECT_EQ(cache.refcount("a"), 2u);
  EXPECT_EQ(cache.bytes_cached(), 3u);
  EXPECT_FALSE(cache.release("a"));
  EXPECT_TRUE(cache.release("a"));
  EXPECT_FALSE(cache.contains("a"));
  EXPECT_EQ(cache.bytes_cached(), 0u);
  EXPECT_FALSE(cache.release("a"));
  EXPECT_EQ(*c1, (Bytes{1, 2, 3}));  // readers keep their bytes after eviction
}

TEST(FileCacheTest, SecondInsertSharesFirstEntry) {
  FileCache cache;
  auto first = cache.insert("p", Bytes{1});
  auto second = cache.insert("p", Bytes{2});
  EXPECT_EQ(first, second);
  EXPECT_EQ(*second, Bytes{1});
  EXPECT_EQ(cache.refcount("p"), 2u);
}

TEST(FileCacheTest, CapacityIsEnforced) {
  FileCache cache(10);
  cache.insert("a", Bytes(6));
  try {
    cache.insert("b", Bytes(6));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kResourceExhausted);
  }
  cache.release("a");
  EXPECT_NO_THROW(cache.insert("b", Bytes(6)));
}

// Sequential model: a path's count goes up on open, down on close, and the
// entry exists exactly while the count is positive.
TEST(FileCacheTest, ConcurrentInterleavingsMatchModel) {
  FileCache cache;
  constexpr int kThreads = 8;
  constexpr int kOpsPerThread = 1250;
  std::vector<std::thread> threads;
  std::vector<std::string> violations(kThreads);
  for (int t = 0; t < kThreads; ++t) {
    threads.emplace_back([&, t] {
      std::mt19937_64 rng(100 + t);
      std::map<std::string, int> held;  // this thread's model
      for (int op = 0; op < kOpsPerThread; ++op) {
        std::string path = "f" + std::to_string(rng() % 16);
        if (held[path] > 0 && rng() % 2 == 0) {
          cache.release(path);
          --held[path];
        } else {
          auto c = cache.acquire(path);
          if (!c) c = cache.insert(path, Bytes(path.begin(), path.end()));
          if (std::string(c->begin(), c->end()) != path) violations[t] = "wrong content";
          ++held[path];
          if (cache.refcount(path) < static_cast<std::uint64_t>(held[path])) {
            violations[t] = "refcount below this thread's holds";
          }
        }
      }
      for (auto& [path, n] : held) {
        while (n-- > 0) cache.release(path);
      }
    });
  }
  for (auto& th : threads) th.join();
  for (const auto& v : violations) EXPECT_EQ(v, "");
  EXPECT_EQ(cache.entry_count(), 0u);
  EXPECT_EQ(cache.bytes_cached(), 0u);
}

}  // namespace
}  // namespace fanstore
