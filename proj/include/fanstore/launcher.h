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

#include <chrono>
#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "fanstore/cluster.h"
#include "json.hpp"

namespace fanstore {

// A config for `node_count` nodes on 127.0.0.1 with roots
// <base_dir>/node<i>. Ports are left at 0 for the launchers to fill in.
ClusterConfig make_local_config(std::uint32_t node_count,
                                const std::filesystem::path& base_dir,
                                const std::filesystem::path& dataset_dir,
                                std::uint32_t replication_factor = 1,
                                std::vector<std::string> replicated_dirs = {});

// All nodes of a cluster inside the current process, each with its own
// server socket, peer pool and local root. Bootstraps nodes concurrently so
// broadcast pulls between them can complete.
class InProcessCluster {
 public:
  // Ports in `config` are replaced by freshly bound ephemeral ports.
  InProcessCluster(ClusterConfig config,
                   const std::filesystem::path& manifest_path,
                   NodeOptions options = {});
  ~InProcessCluster();

  std::size_t size() const { return nodes_.size(); }
  Node& node(std::size_t i) { return *nodes_.at(i); }
  const ClusterConfig& config() const { return config_; }

  // Sum of data-carrying round trips issued by every node's peer pool.
  std::uint64_t total_data_calls() const;

 private:
  ClusterConfig config_;
  std::vector<std::unique_ptr<Node>> nodes_;
};

// Handle given to the role function running inside one forked node process.
class ProcessContext {
 public:
  Node& node() { return *node_; }
  NodeId rank() const { return node_->id(); }
  std::uint32_t size() const { return node_->config().node_count(); }

  // Blocks until every node process has reached the same barrier. Throws
  // Error(kUnavailable) when another process failed instead.
  void barrier();

 private:
  friend class ForkedCluster;
  ProcessContext(Node* node, int up_fd, int down_fd)
      : node_(node), up_fd_(up_fd), down_fd_(down_fd) {}

  Node* node_;
  int up_fd_;
  int down_fd_;
};

using ProcessRole = std::function<nlohmann::json(ProcessContext&)>;

struct ForkedClusterOptions {
  NodeOptions node;
  std::chrono::milliseconds timeout{std::chrono::minutes(10)};
};

// Runs one OS process per node. Each child bootstraps its node, waits for
// every peer to be ready, passes a start barrier, runs `role` and reports
// the returned JSON. Children keep serving peers until all have reported.
// The calling process must not have other threads running.
class ForkedCluster {
 public:
  // Returns the per-rank results. Throws Error with the first child's
  // message when any child fails, and Error(kUnavailable) on timeout.
  static std::vector<nlohmann::json> run(ClusterConfig config,
                                         const std::filesystem::path& manifest,
                                         const ProcessRole& role,
                                         ForkedClusterOptions options = {});

 private:
  [[noreturn]] static void child_main(const ClusterConfig& config, NodeId id,
                                      const std::filesystem::path& manifest,
                                      const ProcessRole& role,
                                      NodeOptions options, int up_fd,
                                      int down_fd);
};

}  // namespace fanstore
