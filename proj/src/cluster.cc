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

#include "fanstore/cluster.h"

#include <algorithm>
#include <thread>

#include "fanstore/error.h"
#include "fanstore/hash.h"
#include "fanstore/io.h"
#include "fanstore/partition.h"
#include "json.hpp"

namespace fanstore {
namespace fs = std::filesystem;
using json = nlohmann::json;
using wire::Frame;
using wire::Opcode;

std::vector<Endpoint> ClusterConfig::endpoints() const {
  std::vector<Endpoint> out;
  out.reserve(nodes.size());
  for (const auto& n : nodes) out.push_back(Endpoint{n.host, n.port});
  return out;
}

void ClusterConfig::validate() const {
  if (nodes.empty()) throw Error(Errc::kInvalidArgument, "cluster has no nodes");
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].id != i) {
      throw Error(Errc::kInvalidArgument, "node ids must be dense 0..M-1");
    }
  }
  if (replication_factor < 1 || replication_factor > nodes.size()) {
    throw Error(Errc::kInvalidArgument,
                "replication factor " + std::to_string(replication_factor) +
                    " outside 1.." + std::to_string(nodes.size()));
  }
}

ClusterConfig parse_cluster_config(std::string_view text) {
  ClusterConfig c;
  try {
    json j = json::parse(text);
    int version = j.at("version").get<int>();
    if (version != ClusterConfig::kVersion) {
      throw Error(Errc::kInvalidArgument,
                  "unsupported cluster config version " + std::to_string(version));
    }
    c.replication_factor = j.value("replication_factor", 1u);
    c.replicated_dirs = j.value("replicated_dirs", std::vector<std::string>{});
    for (auto& d : c.replicated_dirs) d = normalize_relative_path(
        std::string_view(d).substr(d.starts_with('/') ? 1 : 0));
    c.full_broadcast = j.value("full_broadcast", false);
    c.dataset_dir = j.value("dataset_dir", std::string{});
    if (j.contains("manifest_digest")) {
      c.manifest_digest = std::stoull(j.at("manifest_digest").get<std::string>(),
                                      nullptr, 16);
    }
    c.call_timeout = std::chrono::milliseconds(j.value("call_timeout_ms", 30'000));
    for (const auto& n : j.at("nodes")) {
      NodeConfig node;
      node.id = n.at("id").get<NodeId>();
      node.host = n.value("host", std::string("127.0.0.1"));
      node.port = n.at("port").get<std::uint16_t>();
      node.root = n.at("root").get<std::string>();
      c.nodes.push_back(std::move(node));
    }
  } catch (const json::exception& e) {
    throw Error(Errc::kInvalidArgument, std::string("cluster config: ") + e.what());
  }
  std::sort(c.nodes.begin(), c.nodes.end(),
            [](const NodeConfig& a, const NodeConfig& b) { return a.id < b.id; });
  c.validate();
  return c;
}

std::string serialize_cluster_config(const ClusterConfig& c) {
  json j;
  j["version"] = ClusterConfig::kVersion;
  j["replication_factor"] = c.replication_factor;
  j["replicated_dirs"] = c.replicated_dirs;
  j["full_broadcast"] = c.full_broadcast;
  if (!c.dataset_dir.empty()) j["dataset_dir"] = c.dataset_dir.string();
  if (c.manifest_digest) j["manifest_digest"] = hex64(*c.manifest_digest);
  j["call_timeout_ms"] = c.call_timeout.count();
  j["nodes"] = json::array();
  for (const auto& n : c.nodes) {
    j["nodes"].push_back(
        {{"id", n.id}, {"host", n.host}, {"port", n.port}, {"root", n.root.string()}});
  }
  return j.dump(2) + "\n";
}

ClusterConfig load_cluster_config(const fs::path& path) {
  return parse_cluster_config(read_text_file(path));
}

void save_cluster_config(const ClusterConfig& config, const fs::path& path) {
  write_file_atomic(path, as_bytes(serialize_cluster_config(config)));
}

PartitionAssignment assign_partitions(std::uint32_t partition_count,
                                      std::uint32_t node_count,
                                      std::uint32_t replication_factor) {
  if (replication_factor < 1 || replication_factor > node_count) {
    throw Error(Errc::kInvalidArgument,
                "replication factor " + std::to_string(replication_factor) +
                    " must be in 1.." + std::to_string(node_count));
  }
  const std::uint32_t stride = node_count / replication_factor;
  PartitionAssignment out(partition_count);
  for (std::uint32_t i = 0; i < partition_count; ++i) {
    for (std::uint32_t k = 0; k < replication_factor; ++k) {
      NodeId n = static_cast<NodeId>(
          (std::uint64_t{i} + std::uint64_t{k} * stride) % node_count);
      if (std::find(out[i].begin(), out[i].end(), n) == out[i].end()) {
        out[i].push_back(n);
      }
    }
  }
  return out;
}

PartitionAssignment assignment_for(const ClusterConfig& config,
                                   std::uint32_t partition_count) {
  if (config.full_broadcast) {
    return assign_partitions(partition_count, config.node_count(),
                             config.node_count());
  }
  return assign_partitions(partition_count, config.node_count(),
                           config.replication_factor);
}

// ---------------------------------------------------------------------------

Node::Node(ClusterConfig config, NodeId id)
    : config_(std::move(config)), id_(id) {}

Node::~Node() { stop(); }

void Node::stop() {
  ready_.store(false);
  if (server_) server_->stop();
  if (peers_) peers_->close_all();
}

std::unique_ptr<Node> Node::bootstrap(const ClusterConfig& config, NodeId id,
                                      const fs::path& manifest_path,
                                      NodeOptions options) {
  config.validate();
  if (id >= config.node_count()) {
    throw Error(Errc::kInvalidArgument, "node id " + std::to_string(id) +
                                            " not in cluster config");
  }
  const auto deadline = std::chrono::steady_clock::now() + options.bootstrap_timeout;
  std::unique_ptr<Node> node(new Node(config, id));

  node->manifest_ = read_manifest(manifest_path);
  if (config.manifest_digest &&
      *config.manifest_digest != manifest_digest(node->manifest_)) {
    throw Error(Errc::kCorrupt, "manifest digest " +
                                    hex64(manifest_digest(node->manifest_)) +
                                    " does not match cluster config " +
                                    hex64(*config.manifest_digest));
  }
  const auto assignment = assignment_for(config, node->manifest_.partition_count);

  node->store_ = std::make_unique<LocalStore>(config.nodes[id].root);
  node->stage_partitions(assignment);

  std::vector<std::string> replicated = config.replicated_dirs;
  node->index_ = std::make_shared<const NamespaceIndex>(load_namespace(
      node->manifest_, assignment, replicated, config.node_count()));

  PeerPoolOptions pool_options;
  pool_options.call_timeout = config.call_timeout;
  pool_options.connect_timeout = options.connect_timeout;
  node->peers_ = std::make_unique<PeerPool>(config.endpoints(), pool_options);
  node->metadata_ = std::make_unique<MetadataService>(
      node->index_, id, config.node_count(), node->peers_.get());
  DataPlaneOptions dp_options;
  dp_options.cache_capacity = options.cache_capacity;
  node->data_ = std::make_unique<DataPlane>(*node->metadata_, *node->store_,
                                            node->peers_.get(), dp_options);

  ServerOptions server_options;
  server_options.host = config.nodes[id].host;
  server_options.port = config.nodes[id].port;
  server_options.listen_fd = options.listen_fd;
  server_options.worker_threads = options.server_threads;
  Node* raw = node.get();
  node->server_ = std::make_unique<Server>(
      server_options, [raw](const Frame& f) { return raw->handle(f); });

  node->pull_broadcast_files(deadline);
  node->ready_.store(true);
  return node;
}

void Node::stage_partitions(const PartitionAssignment& assignment) {
  for (std::uint32_t p = 0; p < assignment.size(); ++p) {
    const auto& owners = assignment[p];
    if (std::find(owners.begin(), owners.end(), id_) == owners.end()) continue;
    fs::path local = store_->partition_path(p);
    if (!fs::exists(local)) {
      if (config_.dataset_dir.empty()) {
        throw Error(Errc::kNotFound, "missing partition file " + local.string());
      }
      fs::path source = config_.dataset_dir / partition_file_name(p);
      std::error_code ec;
      fs::path tmp = local;
      tmp += ".tmp";
      fs::copy_file(source, tmp, fs::copy_options::overwrite_existing, ec);
      if (!ec) fs::rename(tmp, local, ec);
      if (ec) {
        throw Error(Errc::kNotFound, "cannot stage partition " + source.string() +
                                         ": " + ec.message());
      }
    }
    verify_partition(local, manifest_, p);
    store_->attach_partition(p);
  }
}

void Node::pull_broadcast_files(std::chrono::steady_clock::time_point deadline) {
  for (const auto& path : index_->sorted_file_paths()) {
    const FileRecord& rec = *index_->find_file(path);
    const FileLocation& loc = rec.location;
    if (!loc.replicated_everywhere || loc.owned_by(id_)) continue;
    if (store_->has_replica(path)) continue;
    std::size_t attempt = 0;
    while (true) {
      NodeId owner = loc.owner_nodes[attempt % loc.owner_nodes.size()];
      try {
        FetchResult r = peers_->fetch(owner, path);
        if (r.stored.size() != loc.stored_size) {
          throw Error(Errc::kCorrupt, "broadcast copy of " + path + " has " +
                                          std::to_string(r.stored.size()) +
                                          " bytes, expected " +
                                          std::to_string(loc.stored_size));
        }
        store_->put_replica(path, r.stored);
        break;
      } catch (const Error& e) {
        if (!e.retriable() || std::chrono::steady_clock::now() >= deadline) throw;
        ++attempt;
        std::this_thread::sleep_for(std::chrono::milliseconds(50));
      }
    }
  }
}

Frame Node::handle(const Frame& request) {
  switch (request.opcode) {
    case Opcode::kPing: {
      if (!ready_.load()) throw Error(Errc::kNotReady, "node is bootstrapping");
      std::string_view ok = "ready";
      return Frame{Opcode::kPing, request.request_id, {}, Bytes(ok.begin(), ok.end())};
    }
    case Opcode::kFetchFile: {
      FetchResult r = data_->serve_fetch(request.path);
      return Frame{Opcode::kFetchOk, request.request_id, {},
                   wire::encode_fetch_payload(r.meta, r.stored)};
    }
    case Opcode::kStatOutput: {
      auto rec = metadata_->serve_stat_output(request.path);
      return Frame{Opcode::kStatOk, request.request_id, {},
                   rec ? wire::encode_output_record(*rec) : Bytes{}};
    }
    case Opcode::kCommitMeta: {
      metadata_->serve_commit(request.path,
                              wire::decode_output_record(request.payload));
      return Frame{Opcode::kCommitOk, request.request_id, {}, {}};
    }
    default:
      return wire::error_frame(request.request_id, wire::ErrCode::kUnsupported,
                               "opcode is not a request");
  }
}

bool Node::wait_for_peers(std::chrono::milliseconds timeout) {
  auto deadline = std::chrono::steady_clock::now() + timeout;
  for (NodeId peer = 0; peer < config_.node_count(); ++peer) {
    if (peer == id_) continue;
    while (!peers_->ping(peer)) {
      if (std::chrono::steady_clock::now() >= deadline) return false;
      std::this_thread::sleep_for(std::chrono::milliseconds(20));
    }
  }
  return true;
}

bool probe_ready(const Endpoint& endpoint, std::chrono::milliseconds timeout) {
  try {
    auto conn = ClientConnection::connect(endpoint, timeout, wire::kDefaultMaxFrame,
                                          nullptr);
    Frame response = conn->call(Frame{Opcode::kPing, 0, {}, {}}, timeout);
    return response.opcode == Opcode::kPing;
  } catch (const Error&) {
    return false;
  }
}

}  // namespace fanstore
