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

#include <atomic>
#include <cstdint>
#include <mutex>
#include <random>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>

#include "fanstore/bytes.h"
#include "fanstore/file_cache.h"
#include "fanstore/local_store.h"
#include "fanstore/metadata_service.h"
#include "fanstore/peer_link.h"

namespace fanstore {

class DataPlane;

// An open input or output file for reading. Reads are slices of the cached
// content and stay valid until the handle is closed. Destroying an open
// handle closes it.
class ReadHandle {
 public:
  ReadHandle() = default;
  ReadHandle(ReadHandle&& other) noexcept { *this = std::move(other); }
  ReadHandle& operator=(ReadHandle&& other) noexcept;
  ReadHandle(const ReadHandle&) = delete;
  ReadHandle& operator=(const ReadHandle&) = delete;
  ~ReadHandle();

  // Up to length bytes from the cursor; empty at EOF. Advances the cursor.
  ByteView read(std::size_t length);
  // Positional slice; leaves the cursor alone.
  ByteView read_at(std::uint64_t offset, std::size_t length) const;

  const std::string& path() const { return path_; }
  std::uint64_t size() const;
  std::uint64_t cursor() const { return cursor_; }
  bool is_open() const { return content_ != nullptr; }

 private:
  friend class DataPlane;
  ReadHandle(DataPlane* owner, std::string path, FileCache::Content content)
      : owner_(owner), path_(std::move(path)), content_(std::move(content)) {}
  void check_open() const;

  DataPlane* owner_ = nullptr;
  std::string path_;
  FileCache::Content content_;
  std::uint64_t cursor_ = 0;
};

// Buffered output file. Nothing is visible outside this handle until
// DataPlane::close_write commits it.
class WriteHandle {
 public:
  WriteHandle() = default;
  WriteHandle(WriteHandle&& other) noexcept { *this = std::move(other); }
  WriteHandle& operator=(WriteHandle&& other) noexcept {
    path_ = std::move(other.path_);
    buffer_ = std::move(other.buffer_);
    open_ = std::exchange(other.open_, false);
    return *this;
  }

  const std::string& path() const { return path_; }
  std::uint64_t bytes_written() const { return buffer_.size(); }
  bool is_open() const { return open_; }
  const Bytes& buffer() const { return buffer_; }

 private:
  friend class DataPlane;
  explicit WriteHandle(std::string path)
      : path_(std::move(path)), open_(true) {}

  std::string path_;
  Bytes buffer_;
  bool open_ = false;
};

struct DataPlaneStats {
  std::atomic<std::uint64_t> opens{0};
  std::atomic<std::uint64_t> cache_hits{0};
  std::atomic<std::uint64_t> local_loads{0};
  std::atomic<std::uint64_t> remote_fetches{0};
  std::atomic<std::uint64_t> double_closes{0};
  std::atomic<std::uint64_t> commits{0};

  // Opens served without a network fetch.
  double local_hit_fraction() const;
};

struct DataPlaneOptions {
  std::uint64_t cache_capacity = FileCache::kUnbounded;
  std::uint64_t replica_seed = 0x5eed;
};

class DataPlane {
 public:
  DataPlane(MetadataService& metadata, LocalStore& store, PeerLink* peers,
            DataPlaneOptions options = {});

  // Cached content is shared; otherwise the file is extracted from a local
  // partition or replica, or fetched whole from one owner node.
  ReadHandle open_read(std::string_view path);
  ByteView read(ReadHandle& handle, std::size_t length) {
    return handle.read(length);
  }
  ByteView read_at(const ReadHandle& handle, std::uint64_t offset,
                   std::size_t length) {
    return handle.read_at(offset, length);
  }
  // Closing twice counts a double close and is otherwise a no-op.
  void close_read(ReadHandle& handle);

  // Throws Error(kAlreadyExists) for input paths and committed outputs.
  WriteHandle open_write(std::string_view path);
  std::size_t write(WriteHandle& handle, ByteView data);
  // Persists the buffer locally and commits metadata to the hash owner. On
  // failure the output is dropped and nothing becomes visible.
  void close_write(WriteHandle& handle);

  // Peer-facing: stored bytes of a file kept on this node.
  FetchResult serve_fetch(std::string_view path) const;

  const FileCache& cache() const { return cache_; }
  const DataPlaneStats& stats() const { return stats_; }
  MetadataService& metadata() { return metadata_; }
  const LocalStore& store() const { return store_; }

 private:
  friend class ReadHandle;
  void release(const std::string& path);
  Bytes load(std::string_view path);
  Bytes load_input(const FileRecord& record, std::string_view path);
  Bytes fetch_from(NodeId peer, std::string_view path);
  NodeId pick_replica(const FileLocation& location);

  MetadataService& metadata_;
  LocalStore& store_;
  PeerLink* peers_;
  const Codec& codec_;
  FileCache cache_;
  DataPlaneStats stats_;
  std::mutex rng_mu_;
  std::mt19937_64 rng_;
  mutable std::mutex written_mu_;
  std::unordered_map<std::string, FileMeta, StringHash, std::equal_to<>>
      written_;  // committed outputs whose bytes live here
};

}  // namespace fanstore
