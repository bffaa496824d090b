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

#include "fanstore/metadata_service.h"

#include "fanstore/error.h"
#include "fanstore/hash.h"

namespace fanstore {

NodeId owner_of_output(std::string_view path, std::uint32_t node_count) {
  if (node_count == 0) {
    throw Error(Errc::kInvalidArgument, "node_count must be >= 1");
  }
  return static_cast<NodeId>(fnv1a64(path) % node_count);
}

OutputMetaTable::Shard& OutputMetaTable::shard_for(std::string_view path) const {
  return shards_[StringHash{}(path) % kShards];
}

void OutputMetaTable::commit(std::string_view path, const OutputRecord& record) {
  Shard& s = shard_for(path);
  std::lock_guard lock(s.mu);
  if (!s.entries.emplace(std::string(path), record).second) {
    throw Error(Errc::kAlreadyExists, std::string(path));
  }
}

std::optional<OutputRecord> OutputMetaTable::lookup(std::string_view path) const {
  Shard& s = shard_for(path);
  std::lock_guard lock(s.mu);
  auto it = s.entries.find(path);
  if (it == s.entries.end()) return std::nullopt;
  return it->second;
}

std::size_t OutputMetaTable::size() const {
  std::size_t n = 0;
  for (auto& s : shards_) {
    std::lock_guard lock(s.mu);
    n += s.entries.size();
  }
  return n;
}

MetadataService::MetadataService(std::shared_ptr<const NamespaceIndex> index,
                                 NodeId self, std::uint32_t node_count,
                                 PeerLink* peers)
    : index_(std::move(index)),
      self_(self),
      node_count_(node_count),
      peers_(peers) {
  if (node_count_ == 0 || self_ >= node_count_) {
    throw Error(Errc::kInvalidArgument, "node id out of range");
  }
}

FileMeta MetadataService::stat(std::string_view path) {
  if (const FileRecord* rec = index_->find_file(path)) return rec->meta;
  if (index_->is_directory(path)) return directory_meta();
  if (auto out = lookup_output(path)) return out->meta;
  throw Error(Errc::kNotFound, std::string(path));
}

std::vector<std::string> MetadataService::readdir(std::string_view path) const {
  return index_->readdir(path);
}

std::optional<OutputRecord> MetadataService::lookup_output(
    std::string_view path) {
  NodeId owner = owner_of_output(path, node_count_);
  if (owner == self_) return outputs_.lookup(path);
  if (peers_ == nullptr) {
    throw Error(Errc::kUnavailable, "no transport to reach node " +
                                        std::to_string(owner));
  }
  return peers_->stat_output(owner, path);
}

void MetadataService::commit_output(std::string_view path,
                                    const OutputRecord& record) {
  NodeId owner = owner_of_output(path, node_count_);
  if (owner == self_) {
    serve_commit(path, record);
    return;
  }
  if (peers_ == nullptr) {
    throw Error(Errc::kUnavailable, "no transport to reach node " +
                                        std::to_string(owner));
  }
  peers_->commit_output(owner, path, record);
}

void MetadataService::check_owner(std::string_view path) const {
  if (owner_of_output(path, node_count_) != self_) {
    throw Error(Errc::kNotOwner, std::string(path) + " is not owned by node " +
                                     std::to_string(self_));
  }
}

std::optional<OutputRecord> MetadataService::serve_stat_output(
    std::string_view path) const {
  check_owner(path);
  return outputs_.lookup(path);
}

void MetadataService::serve_commit(std::string_view path,
                                   const OutputRecord& record) {
  check_owner(path);
  if (index_->find_file(path) != nullptr || index_->is_directory(path)) {
    throw Error(Errc::kAlreadyExists, std::string(path) + " is an input path");
  }
  outputs_.commit(path, record);
}

}  // namespace fanstore
