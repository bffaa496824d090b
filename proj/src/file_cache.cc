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

#include "fanstore/file_cache.h"

#include "fanstore/error.h"

namespace fanstore {

FileCache::Shard& FileCache::shard_for(std::string_view path) const {
  return shards_[StringHash{}(path) % kShards];
}

FileCache::Content FileCache::acquire(std::string_view path) {
  Shard& s = shard_for(path);
  std::lock_guard lock(s.mu);
  auto it = s.slots.find(path);
  if (it == s.slots.end()) return nullptr;
  ++it->second.refcount;
  return it->second.content;
}

FileCache::Content FileCache::insert(std::string_view path, Bytes content) {
  Shard& s = shard_for(path);
  std::lock_guard lock(s.mu);
  auto it = s.slots.find(path);
  if (it != s.slots.end()) {
    ++it->second.refcount;
    return it->second.content;
  }
  const std::uint64_t size = content.size();
  std::uint64_t current = bytes_.load();
  do {
    if (size > capacity_ || current > capacity_ - size) {
      throw Error(Errc::kResourceExhausted,
                  "file cache full: " + std::to_string(current) + " + " +
                      std::to_string(size) + " > " + std::to_string(capacity_));
    }
  } while (!bytes_.compare_exchange_weak(current, current + size));
  auto shared = std::make_shared<const Bytes>(std::move(content));
  s.slots.emplace(std::string(path), Slot{shared, 1});
  return shared;
}

bool FileCache::release(std::string_view path) {
  Shard& s = shard_for(path);
  std::lock_guard lock(s.mu);
  auto it = s.slots.find(path);
  if (it == s.slots.end()) return false;
  if (--it->second.refcount > 0) return false;
  bytes_.fetch_sub(it->second.content->size());
  s.slots.erase(it);
  return true;
}

std::uint64_t FileCache::refcount(std::string_view path) const {
  Shard& s = shard_for(path);
  std::lock_guard lock(s.mu);
  auto it = s.slots.find(path);
  return it == s.slots.end() ? 0 : it->second.refcount;
}

std::size_t FileCache::entry_count() const {
  std::size_t n = 0;
  for (auto& s : shards_) {
    std::lock_guard lock(s.mu);
    n += s.slots.size();
  }
  return n;
}

}  // namespace fanstore
