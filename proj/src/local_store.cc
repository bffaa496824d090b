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

#include "fanstore/local_store.h"

#include <fcntl.h>

#include "fanstore/error.h"
#include "fanstore/hash.h"
#include "fanstore/partition.h"

namespace fanstore {
namespace fs = std::filesystem;

LocalStore::LocalStore(fs::path root) : root_(std::move(root)) {
  std::error_code ec;
  for (const char* area : {"partitions", "bcast", "out"}) {
    fs::create_directories(root_ / area, ec);
    if (ec) {
      throw Error(Errc::kIo, "cannot create " + (root_ / area).string() +
                                 ": " + ec.message());
    }
  }
}

fs::path LocalStore::partition_path(std::uint32_t partition_id) const {
  return root_ / "partitions" / partition_file_name(partition_id);
}

void LocalStore::attach_partition(std::uint32_t partition_id) {
  partitions_[partition_id] =
      open_file(partition_path(partition_id), O_RDONLY);
}

bool LocalStore::has_partition(std::uint32_t partition_id) const {
  return partitions_.count(partition_id) != 0;
}

Bytes LocalStore::read_partition_bytes(std::uint32_t partition_id,
                                       std::uint64_t offset,
                                       std::uint64_t length) const {
  auto it = partitions_.find(partition_id);
  if (it == partitions_.end()) {
    throw Error(Errc::kNotFound, "partition " + std::to_string(partition_id) +
                                     " is not stored on this node");
  }
  return pread_exact(it->second.get(), offset, length);
}

fs::path LocalStore::hashed_path(std::string_view area,
                                 std::string_view path) const {
  std::string h = hex64(fnv1a64(path));
  return root_ / area / h.substr(0, 2) / h;
}

void LocalStore::put_replica(std::string_view path, ByteView stored) {
  fs::path file = hashed_path("bcast", path);
  std::error_code ec;
  fs::create_directories(file.parent_path(), ec);
  write_file_atomic(file, stored);
  std::lock_guard lock(mu_);
  replicas_[std::string(path)] = std::move(file);
}

bool LocalStore::has_replica(std::string_view path) const {
  std::lock_guard lock(mu_);
  return replicas_.find(path) != replicas_.end();
}

Bytes LocalStore::read_replica(std::string_view path) const {
  fs::path file;
  {
    std::lock_guard lock(mu_);
    auto it = replicas_.find(path);
    if (it == replicas_.end()) {
      throw Error(Errc::kNotFound, "no local replica of " + std::string(path));
    }
    file = it->second;
  }
  return read_file(file);
}

void LocalStore::put_output(std::string_view path, ByteView data) {
  fs::path file;
  {
    std::lock_guard lock(mu_);
    if (outputs_.find(path) != outputs_.end()) {
      throw Error(Errc::kAlreadyExists, std::string(path));
    }
    file = hashed_path("out", path);
    file += "." + std::to_string(output_seq_++);
    outputs_[std::string(path)] = file;
  }
  try {
    std::error_code ec;
    fs::create_directories(file.parent_path(), ec);
    write_file_atomic(file, data);
  } catch (...) {
    std::lock_guard lock(mu_);
    outputs_.erase(std::string(path));
    throw;
  }
}

void LocalStore::drop_output(std::string_view path) {
  fs::path file;
  {
    std::lock_guard lock(mu_);
    auto it = outputs_.find(path);
    if (it == outputs_.end()) return;
    file = it->second;
    outputs_.erase(it);
  }
  std::error_code ec;
  fs::remove(file, ec);
}

bool LocalStore::has_output(std::string_view path) const {
  std::lock_guard lock(mu_);
  return outputs_.find(path) != outputs_.end();
}

Bytes LocalStore::read_output(std::string_view path) const {
  fs::path file;
  {
    std::lock_guard lock(mu_);
    auto it = outputs_.find(path);
    if (it == outputs_.end()) {
      throw Error(Errc::kNotFound, "no local output " + std::string(path));
    }
    file = it->second;
  }
  return read_file(file);
}

}  // namespace fanstore
