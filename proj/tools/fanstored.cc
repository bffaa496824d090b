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

// fanstored: runs one node of a cluster until SIGINT or SIGTERM.

#include <signal.h>

#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fanstore/cluster.h"
#include "fanstore/error.h"
#include "fanstore/hash.h"

int main(int argc, char** argv) {
  CLI::App app{"FanStore node daemon"};
  std::string config_path, manifest;
  fanstore::NodeId node_id = 0;
  std::uint32_t replication = 0;
  std::vector<std::string> replicate_dirs;
  bool broadcast = false;
  std::size_t threads = 4;
  app.add_option("--config", config_path, "Cluster config (JSON)")->required();
  app.add_option("--node-id", node_id, "This node's id")->required();
  app.add_option("--manifest", manifest, "Manifest written by fanstore-pack")
      ->required();
  app.add_option("--replication", replication,
                 "Replication factor (overrides the config)");
  app.add_option("--replicate-dir", replicate_dirs,
                 "Directory copied to every node (repeatable, adds to the config)");
  app.add_flag("--broadcast", broadcast, "Replicate the whole dataset everywhere");
  app.add_option("--threads", threads, "Server worker threads");
  CLI11_PARSE(app, argc, argv);

  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);
  signal(SIGPIPE, SIG_IGN);

  try {
    fanstore::ClusterConfig config = fanstore::load_cluster_config(config_path);
    if (replication != 0) config.replication_factor = replication;
    for (auto& d : replicate_dirs) {
      while (!d.empty() && d.front() == '/') d.erase(0, 1);
      config.replicated_dirs.push_back(d);
    }
    if (broadcast) config.full_broadcast = true;
    config.validate();

    fanstore::NodeOptions options;
    options.server_threads = threads;
    auto node = fanstore::Node::bootstrap(config, node_id, manifest, options);
    std::cout << "node " << node_id << " ready on port " << node->port()
              << ", namespace " << fanstore::hex64(node->namespace_digest())
              << ", " << node->index().file_count() << " files" << std::endl;

    int sig = 0;
    sigwait(&signals, &sig);
    std::cout << "node " << node_id << " stopping" << std::endl;
    node->stop();
  } catch (const std::exception& e) {
    std::cerr << "fanstored: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
