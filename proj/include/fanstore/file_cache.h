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

#include <array>
#include <atomic>
#include <cstdint>
#include <limits>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <unordered_map>

#include "fanstore/bytes.h"
#include "fanstore/namespace_index.h"

namespace fanstore {

// Whole-file cache keyed by path. An entry lives exactly as long as some
// descriptor on this node holds it: acquire increments the path's counter,
// release decrements it and evicts at zero. There is no other eviction.
class FileCache {
 public:
  using Content = std::shared_ptr<const Bytes>;

  static constexpr std::uint64_t kUnbounded =
      std::numeric_limits<std::uint64_t>::max();

  explicit FileCache(std::uint64_t capacity_bytes = kUnbounded)
      : capacity_(capacity_bytes) {}

  // Bumps the counter of a cached path; nullptr when absent.
  Content acquire(std::string_view path);

  // Inserts freshly loaded content with a counter of one. If another opener
  // inserted the path first, that entry is shared instead and content is
  // dropped. Throws Error(kResourceExhausted) when the insert would exceed
  // the capacity.
  Content insert(std::string_view path, Bytes content);

  // Returns true when this release evicted the entry. Releasing a path that
  // is not cached is a no-op returning false.
  bool release(std::string_view path);

  std::uint64_t refcount(std::string_view path) const;
  bool contains(std::string_view path) const { return refcount(path) > 0; }
  std::size_t entry_count() const;
  std::uint64_t bytes_cached() const { return bytes_.load(); }
  std::uint64_t capacity() const { return capacity_; }

 private:
  static constexpr std::size_t kShards = 32;

  struct Slot {
    Content content;
    std::uint64_t refcount = 0;
  };
  struct Shard {
    mutable std::mutex mu;
    std::unordered_map<std::string, Slot, StringHash, std::equal_to<>> slots;
  };

  Shard& shard_for(std::string_view path) const;

  const std::uint64_t capacity_;
  std::atomic<std::uint64_t> bytes_{0};
  mutable std::array<Shard, kShards> shards_;
};

}  // namespace fanstore
