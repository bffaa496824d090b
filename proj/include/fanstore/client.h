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
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "fanstore/bytes.h"
#include "fanstore/cluster.h"
#include "fanstore/data_plane.h"
#include "fanstore/file_meta.h"

namespace fanstore {

// Maps application paths under a mount prefix onto dataset-relative paths.
// "/fanstore/u1/train/a.jpg" with prefix "/fanstore/u1" resolves to
// "train/a.jpg"; the prefix itself resolves to "" (the dataset root).
class MountMap {
 public:
  explicit MountMap(std::string mount_prefix);

  // nullopt for paths outside the mount, which pass through to the host.
  std::optional<std::string> resolve(std::string_view path) const;
  // Inverse: the application path of a dataset-relative path.
  std::string to_mount(std::string_view relative) const;

  const std::string& prefix() const { return prefix_; }

 private:
  std::string prefix_;  // no trailing slash
};

enum class OpenMode { kRead, kWrite };

// Client configuration. Environment variables:
//   FANSTORE_MOUNT   mount prefix (default "/fanstore")
//   FANSTORE_NODE    id of the co-located node
//   FANSTORE_CONFIG  cluster config file
// Explicitly set fields win over the environment, which wins over defaults.
struct ClientSettings {
  std::optional<std::string> mount;
  std::optional<NodeId> node;
  std::optional<std::filesystem::path> config;

  static constexpr const char* kDefaultMount = "/fanstore";

  // Fills unset fields from the environment, then from defaults. Throws
  // Error(kInvalidArgument) for a malformed FANSTORE_NODE.
  ClientSettings resolved() const;
};

// POSIX-like call surface over a node. Managed paths go to the node's
// metadata service and data plane; everything else goes to the host
// filesystem. Errors are thrown as Error; errc_to_errno gives the POSIX
// equivalent.
class FileSystem {
 public:
  static constexpr int kFirstDescriptor = 1'000'000;

  FileSystem(Node& node, std::string mount_prefix);
  ~FileSystem();
  FileSystem(const FileSystem&) = delete;
  FileSystem& operator=(const FileSystem&) = delete;

  int open(std::string_view path, OpenMode mode);
  Bytes read(int fd, std::size_t length);
  Bytes pread(int fd, std::uint64_t offset, std::size_t length);
  std::size_t write(int fd, ByteView data);
  void close(int fd);
  FileMeta stat(std::string_view path);
  std::vector<std::string> readdir(std::string_view path);

  // Opens, reads to the end and closes.
  Bytes read_file(std::string_view path);

  const MountMap& mount() const { return mount_; }
  Node& node() { return node_; }
  std::size_t open_descriptors() const;

 private:
  struct Descriptor;
  std::shared_ptr<Descriptor> lookup(int fd) const;

  Node& node_;
  MountMap mount_;
  mutable std::mutex mu_;
  std::unordered_map<int, std::shared_ptr<Descriptor>> table_;
  std::atomic<int> next_fd_{kFirstDescriptor};
};

// A node bootstrapped from client settings together with its facade. The
// manifest is read from the config's dataset_dir.
struct MountedNode {
  std::unique_ptr<Node> node;
  std::unique_ptr<FileSystem> fs;
};
MountedNode mount_from_settings(const ClientSettings& settings,
                                NodeOptions options = {});

}  // namespace fanstore
