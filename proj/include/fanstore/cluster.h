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
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fanstore/data_plane.h"
#include "fanstore/local_store.h"
#include "fanstore/manifest.h"
#include "fanstore/metadata_service.h"
#include "fanstore/namespace_index.h"
#include "fanstore/transport.h"

namespace fanstore {

struct NodeConfig {
  NodeId id = 0;
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;
  std::filesystem::path root;
};

// Static cluster description shared by every node. Stored as JSON:
//
//   {
//     "version": 1,
//     "replication_factor": 1,
//     "replicated_dirs": ["val"],
//     "full_broadcast": false,
//     "dataset_dir": "/shared/packed",        (optional)
//     "manifest_digest": "0123456789abcdef",  (optional)
//     "call_timeout_ms": 30000,               (optional)
//     "nodes": [{"id": 0, "host": "127.0.0.1", "port": 7100,
//                "root": "/local/fanstore0"}, ...]
//   }
//
// dataset_dir is where the packing step left partitions; nodes copy their
// assigned partitions from it into their local root when missing.
struct ClusterConfig {
  static constexpr int kVersion = 1;

  std::vector<NodeConfig> nodes;
  std::uint32_t replication_factor = 1;
  std::vector<std::string> replicated_dirs;
  bool full_broadcast = false;
  std::filesystem::path dataset_dir;
  std::optional<std::uint64_t> manifest_digest;
  std::chrono::milliseconds call_timeout{30'000};

  std::uint32_t node_count() const {
    return static_cast<std::uint32_t>(nodes.size());
  }
  std::vector<Endpoint> endpoints() const;

  // Throws Error(kInvalidArgument) unless ids are dense 0..M-1 and
  // 1 <= replication_factor <= M.
  void validate() const;
};

ClusterConfig parse_cluster_config(std::string_view json_text);
std::string serialize_cluster_config(const ClusterConfig& config);
ClusterConfig load_cluster_config(const std::filesystem::path& path);
void save_cluster_config(const ClusterConfig& config,
                         const std::filesystem::path& path);

// Partition i lands on nodes (i + k * floor(M / R)) mod M for k in [0, R),
// duplicates dropped. Throws Error(kInvalidArgument) when R is 0 or exceeds M.
PartitionAssignment assign_partitions(std::uint32_t partition_count,
                                      std::uint32_t node_count,
                                      std::uint32_t replication_factor);

// Assignment a node uses for the given config: full broadcast puts every
// partition everywhere, otherwise the stride placement above.
PartitionAssignment assignment_for(const ClusterConfig& config,
                                   std::uint32_t partition_count);

struct NodeOptions {
  // Adopt this listening socket instead of binding the configured port.
  int listen_fd = -1;
  std::size_t server_threads = 4;
  std::uint64_t cache_capacity = FileCache::kUnbounded;
  std::chrono::milliseconds connect_timeout{10'000};
  std::chrono::milliseconds bootstrap_timeout{120'000};
};

// One running node: local store, replicated namespace, output metadata,
// data plane and the transport server answering its peers.
class Node {
 public:
  // Loads and verifies the node's partitions, builds the namespace, starts
  // serving, pulls broadcast-directory files from their owners and only then
  // reports ready. Throws on a missing or corrupt partition, a manifest
  // digest mismatch, or an unreachable owner of a broadcast file.
  static std::unique_ptr<Node> bootstrap(const ClusterConfig& config,
                                         NodeId id,
                                         const std::filesystem::path& manifest,
                                         NodeOptions options = {});
  ~Node();
  Node(const Node&) = delete;
  Node& operator=(const Node&) = delete;

  NodeId id() const { return id_; }
  bool ready() const { return ready_.load(); }
  std::uint16_t port() const { return server_->port(); }
  std::uint64_t namespace_digest() const { return index_->digest(); }

  const ClusterConfig& config() const { return config_; }
  const PartitionManifest& manifest() const { return manifest_; }
  const NamespaceIndex& index() const { return *index_; }
  MetadataService& metadata() { return *metadata_; }
  DataPlane& data() { return *data_; }
  PeerPool& peers() { return *peers_; }
  const Server& server() const { return *server_; }
  LocalStore& store() { return *store_; }

  // Polls every other node's readiness probe until all answer or the
  // timeout passes; returns whether all are ready.
  bool wait_for_peers(std::chrono::milliseconds timeout);

  void stop();

 private:
  Node(ClusterConfig config, NodeId id);
  wire::Frame handle(const wire::Frame& request);
  void stage_partitions(const PartitionAssignment& assignment);
  void pull_broadcast_files(std::chrono::steady_clock::time_point deadline);

  ClusterConfig config_;
  NodeId id_;
  PartitionManifest manifest_;
  std::unique_ptr<LocalStore> store_;
  std::shared_ptr<const NamespaceIndex> index_;
  std::unique_ptr<PeerPool> peers_;
  std::unique_ptr<MetadataService> metadata_;
  std::unique_ptr<DataPlane> data_;
  std::atomic<bool> ready_{false};
  std::unique_ptr<Server> server_;
};

// Readiness probe against an arbitrary endpoint.
bool probe_ready(const Endpoint& endpoint,
                 std::chrono::milliseconds timeout = std::chrono::seconds(2));

}  // namespace fanstore
