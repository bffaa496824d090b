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

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fanstore/namespace_index.h"
#include "fanstore/output_meta.h"
#include "fanstore/peer_link.h"

namespace fanstore {

// Per-node metadata: the replicated input index answers locally; output
// paths are routed to their hash owner.
class MetadataService {
 public:
  MetadataService(std::shared_ptr<const NamespaceIndex> index, NodeId self,
                  std::uint32_t node_count, PeerLink* peers);

  // Input files and directories come from the local index. Anything else is
  // treated as an output path and looked up on its owner.
  FileMeta stat(std::string_view path);
  std::vector<std::string> readdir(std::string_view path) const;

  std::optional<OutputRecord> lookup_output(std::string_view path);

  // Forwards to the owner, or inserts locally when this node owns the path.
  void commit_output(std::string_view path, const OutputRecord& record);

  // Peer-facing entry points. Both throw Error(kNotOwner) when this node is
  // not the hash owner of path.
  std::optional<OutputRecord> serve_stat_output(std::string_view path) const;
  void serve_commit(std::string_view path, const OutputRecord& record);

  const NamespaceIndex& index() const { return *index_; }
  const OutputMetaTable& outputs() const { return outputs_; }
  NodeId self() const { return self_; }
  std::uint32_t node_count() const { return node_count_; }

 private:
  void check_owner(std::string_view path) const;

  std::shared_ptr<const NamespaceIndex> index_;
  NodeId self_;
  std::uint32_t node_count_;
  PeerLink* peers_;
  OutputMetaTable outputs_;
};

}  // namespace fanstore
