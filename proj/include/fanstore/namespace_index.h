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
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "fanstore/codec.h"
#include "fanstore/file_meta.h"
#include "fanstore/manifest.h"

namespace fanstore {

using NodeId = std::uint32_t;

// partition id -> nodes holding a copy
using PartitionAssignment = std::vector<std::vector<NodeId>>;

struct FileLocation {
  std::uint32_t partition_id = 0;
  std::vector<NodeId> owner_nodes;
  std::uint64_t data_offset = 0;
  std::uint64_t stored_size = 0;
  std::uint64_t uncompressed_size = 0;
  bool compressed = false;
  // Every node keeps a copy, either because the file sits under a broadcast
  // directory or because the whole dataset is broadcast.
  bool replicated_everywhere = false;

  bool owned_by(NodeId node) const;
};

struct FileRecord {
  FileMeta meta;
  FileLocation location;
};

struct StringHash {
  using is_transparent = void;
  std::size_t operator()(std::string_view s) const {
    return std::hash<std::string_view>{}(s);
  }
};

// Global namespace of input files, identical on every node. Immutable once
// loaded; lookups are safe from any thread.
class NamespaceIndex {
 public:
  const FileRecord* find_file(std::string_view path) const;
  bool is_directory(std::string_view path) const;

  // Sorted child names, or nullptr when path is not a directory.
  const std::vector<std::string>* children(std::string_view dir) const;

  // Throws Error(kNotFound) for unknown paths. Directories get a synthetic
  // directory record.
  FileMeta stat(std::string_view path) const;

  // Throws Error(kNotDirectory) for files, Error(kNotFound) otherwise.
  std::vector<std::string> readdir(std::string_view path) const;

  // FNV-1a 64 over a canonical, sorted serialization of the whole index.
  std::uint64_t digest() const;

  std::size_t file_count() const { return files_.size(); }
  std::size_t directory_count() const { return dirs_.size(); }
  CodecId codec() const { return codec_; }

  // Files sorted by path.
  std::vector<std::string> sorted_file_paths() const;

  const std::unordered_map<std::string, FileRecord, StringHash,
                           std::equal_to<>>&
  files() const {
    return files_;
  }

 private:
  friend NamespaceIndex load_namespace(const PartitionManifest&,
                                       const PartitionAssignment&,
                                       std::span<const std::string>,
                                       std::uint32_t);

  CodecId codec_ = CodecId::kIdentity;
  std::unordered_map<std::string, FileRecord, StringHash, std::equal_to<>>
      files_;
  std::unordered_map<std::string, std::vector<std::string>, StringHash,
                     std::equal_to<>>
      dirs_;
};

// Builds the index for a cluster of node_count nodes. Files under any of the
// replicated_dirs (dataset-relative; "" means everything) are marked
// replicated_everywhere. Throws Error(kInvalidArgument) when the assignment
// does not cover exactly the manifest's partitions or names unknown nodes.
NamespaceIndex load_namespace(const PartitionManifest& manifest,
                              const PartitionAssignment& assignment,
                              std::span<const std::string> replicated_dirs,
                              std::uint32_t node_count);

// True when path equals dir or lies below it.
bool path_under(std::string_view path, std::string_view dir);

}  // namespace fanstore
