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
#include <cstdint>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>

#include "fanstore/file_meta.h"
#include "fanstore/namespace_index.h"

namespace fanstore {

// Node that holds the single metadata copy of an output path:
// FNV-1a 64 of the path bytes, modulo node_count.
NodeId owner_of_output(std::string_view path, std::uint32_t node_count);

// Committed output metadata plus the node that keeps the file's bytes.
struct OutputRecord {
  FileMeta meta;
  NodeId writer = 0;

  friend bool operator==(const OutputRecord&, const OutputRecord&) = default;
};

// Output metadata owned by this node. Insert and lookup are individually
// atomic; the table is sharded by path hash so unrelated paths never share a
// lock.
class OutputMetaTable {
 public:
  // Throws Error(kAlreadyExists) when the path was committed before. Outputs
  // are write-once.
  void commit(std::string_view path, const OutputRecord& record);

  std::optional<OutputRecord> lookup(std::string_view path) const;
  std::size_t size() const;

 private:
  static constexpr std::size_t kShards = 16;

  struct Shard {
    mutable std::mutex mu;
    std::unordered_map<std::string, OutputRecord, StringHash, std::equal_to<>>
        entries;
  };

  Shard& shard_for(std::string_view path) const;

  mutable std::array<Shard, kShards> shards_;
};

}  // namespace fanstore
