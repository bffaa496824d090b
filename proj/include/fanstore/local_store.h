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

#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>

#include "fanstore/bytes.h"
#include "fanstore/io.h"
#include "fanstore/namespace_index.h"

namespace fanstore {

// Node-local storage under one root directory:
//
//   <root>/partitions/part.<id>         partitions, verbatim as packed
//   <root>/bcast/<hh>/<hash16>          stored bytes of broadcast-dir files
//   <root>/out/<hh>/<hash16>.<seq>      output files written on this node
//
// <hash16> is the FNV-1a 64 hex of the dataset path, <hh> its first two
// digits. Partition descriptors stay open for the life of the store.
class LocalStore {
 public:
  explicit LocalStore(std::filesystem::path root);

  const std::filesystem::path& root() const { return root_; }
  std::filesystem::path partition_path(std::uint32_t partition_id) const;

  // Opens an already verified partition for serving.
  void attach_partition(std::uint32_t partition_id);
  bool has_partition(std::uint32_t partition_id) const;

  // Stored bytes of one entry of an attached partition.
  Bytes read_partition_bytes(std::uint32_t partition_id, std::uint64_t offset,
                             std::uint64_t length) const;

  void put_replica(std::string_view path, ByteView stored);
  bool has_replica(std::string_view path) const;
  Bytes read_replica(std::string_view path) const;

  // Persists output content under a fresh file name. Fails with
  // Error(kAlreadyExists) if this node already holds an output for path.
  void put_output(std::string_view path, ByteView data);
  void drop_output(std::string_view path);
  bool has_output(std::string_view path) const;
  Bytes read_output(std::string_view path) const;

 private:
  std::filesystem::path hashed_path(std::string_view area,
                                    std::string_view path) const;

  std::filesystem::path root_;
  std::map<std::uint32_t, UniqueFd> partitions_;  // written only during bootstrap
  mutable std::mutex mu_;
  std::unordered_map<std::string, std::filesystem::path, StringHash,
                     std::equal_to<>>
      replicas_;
  std::unordered_map<std::string, std::filesystem::path, StringHash,
                     std::equal_to<>>
      outputs_;
  std::uint64_t output_seq_ = 0;
};

}  // namespace fanstore
