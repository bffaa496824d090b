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

#include "fanstore/data_plane.h"

#include <algorithm>

#include "fanstore/error.h"
#include "fanstore/partition.h"

namespace fanstore {

double DataPlaneStats::local_hit_fraction() const {
  std::uint64_t remote = remote_fetches.load();
  std::uint64_t local = cache_hits.load() + local_loads.load();
  if (local + remote == 0) return 1.0;
  return static_cast<double>(local) / static_cast<double>(local + remote);
}

ReadHandle& ReadHandle::operator=(ReadHandle&& other) noexcept {
  if (this != &other) {
    if (is_open() && owner_ != nullptr) owner_->close_read(*this);
    owner_ = std::exchange(other.owner_, nullptr);
    path_ = std::move(other.path_);
    content_ = std::move(other.content_);
    cursor_ = std::exchange(other.cursor_, 0);
  }
  return *this;
}

ReadHandle::~ReadHandle() {
  if (is_open() && owner_ != nullptr) owner_->release(path_);
}

void ReadHandle::check_open() const {
  if (!is_open()) {
    throw Error(Errc::kBadDescriptor, "read on a closed handle " + path_);
  }
}

std::uint64_t ReadHandle::size() const {
  check_open();
  return content_->size();
}

ByteView ReadHandle::read(std::size_t length) {
  check_open();
  const Bytes& data = *content_;
  std::uint64_t n = std::min<std::uint64_t>(length, data.size() - cursor_);
  ByteView out(data.data() + cursor_, n);
  cursor_ += n;
  return out;
}

ByteView ReadHandle::read_at(std::uint64_t offset, std::size_t length) const {
  check_open();
  const Bytes& data = *content_;
  if (offset >= data.size()) return {};
  std::uint64_t n = std::min<std::uint64_t>(length, data.size() - offset);
  return ByteView(data.data() + offset, n);
}

DataPlane::DataPlane(MetadataService& metadata, LocalStore& store,
                     PeerLink* peers, DataPlaneOptions options)
    : metadata_(metadata),
      store_(store),
      peers_(peers),
      codec_(CodecRegistry::get(metadata.index().codec())),
      cache_(options.cache_capacity),
      rng_(options.replica_seed ^ metadata.self()) {}

ReadHandle DataPlane::open_read(std::string_view path) {
  stats_.opens.fetch_add(1);
  if (auto content = cache_.acquire(path)) {
    stats_.cache_hits.fetch_add(1);
    return ReadHandle(this, std::string(path), std::move(content));
  }
  Bytes bytes = load(path);
  auto content = cache_.insert(path, std::move(bytes));
  return ReadHandle(this, std::string(path), std::move(content));
}

void DataPlane::close_read(ReadHandle& handle) {
  if (!handle.is_open()) {
    stats_.double_closes.fetch_add(1);
    return;
  }
  handle.content_.reset();
  release(handle.path_);
}

void DataPlane::release(const std::string& path) { cache_.release(path); }

Bytes DataPlane::load(std::string_view path) {
  const NamespaceIndex& index = metadata_.index();
  if (const FileRecord* rec = index.find_file(path)) {
    return load_input(*rec, path);
  }
  if (index.is_directory(path)) {
    throw Error(Errc::kIsDirectory, std::string(path));
  }
  auto out = metadata_.lookup_output(path);
  if (!out) throw Error(Errc::kNotFound, std::string(path));
  if (out->writer == metadata_.self()) {
    stats_.local_loads.fetch_add(1);
    return store_.read_output(path);
  }
  return fetch_from(out->writer, path);
}

Bytes DataPlane::load_input(const FileRecord& rec, std::string_view path) {
  const FileLocation& loc = rec.location;
  const NodeId self = metadata_.self();
  if (loc.owned_by(self) || (loc.replicated_everywhere && store_.has_replica(path))) {
    Bytes stored = loc.owned_by(self)
                       ? store_.read_partition_bytes(loc.partition_id,
                                                     loc.data_offset,
                                                     loc.stored_size)
                       : store_.read_replica(path);
    stats_.local_loads.fetch_add(1);
    return decode_stored(stored, loc.compressed, loc.uncompressed_size, codec_);
  }
  return fetch_from(pick_replica(loc), path);
}

Bytes DataPlane::fetch_from(NodeId peer, std::string_view path) {
  if (peers_ == nullptr) {
    throw Error(Errc::kUnavailable, "no transport for remote file " +
                                        std::string(path));
  }
  stats_.remote_fetches.fetch_add(1);
  FetchResult r = peers_->fetch(peer, path);
  return decode_stored(r.stored, r.compressed, r.meta.size_bytes, codec_);
}

NodeId DataPlane::pick_replica(const FileLocation& loc) {
  std::vector<NodeId> candidates;
  for (NodeId n : loc.owner_nodes) {
    if (n != metadata_.self()) candidates.push_back(n);
  }
  if (candidates.empty()) {
    throw Error(Errc::kUnavailable, "no remote owner for partition " +
                                        std::to_string(loc.partition_id));
  }
  if (candidates.size() == 1) return candidates.front();
  std::lock_guard lock(rng_mu_);
  std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
  return candidates[pick(rng_)];
}

WriteHandle DataPlane::open_write(std::string_view path) {
  const NamespaceIndex& index = metadata_.index();
  if (path.empty() || index.find_file(path) != nullptr ||
      index.is_directory(path)) {
    throw Error(Errc::kAlreadyExists, std::string(path) + " is an input path");
  }
  if (metadata_.lookup_output(path)) {
    throw Error(Errc::kAlreadyExists, std::string(path));
  }
  return WriteHandle(std::string(path));
}

std::size_t DataPlane::write(WriteHandle& handle, ByteView data) {
  if (!handle.is_open()) {
    throw Error(Errc::kBadDescriptor, "write on a closed handle " +
                                          handle.path());
  }
  append(handle.buffer_, data);
  return data.size();
}

void DataPlane::close_write(WriteHandle& handle) {
  if (!handle.is_open()) {
    throw Error(Errc::kBadDescriptor, "close on a closed handle " +
                                          handle.path());
  }
  handle.open_ = false;
  Bytes buffer = std::move(handle.buffer_);
  const std::string& path = handle.path_;
  OutputRecord record{output_file_meta(buffer.size()), metadata_.self()};

  store_.put_output(path, buffer);
  {
    std::lock_guard lock(written_mu_);
    written_[path] = record.meta;
  }
  try {
    metadata_.commit_output(path, record);
  } catch (...) {
    {
      std::lock_guard lock(written_mu_);
      written_.erase(path);
    }
    store_.drop_output(path);
    throw;
  }
  stats_.commits.fetch_add(1);
}

FetchResult DataPlane::serve_fetch(std::string_view path) const {
  const NamespaceIndex& index = metadata_.index();
  const NodeId self = metadata_.self();
  if (const FileRecord* rec = index.find_file(path)) {
    const FileLocation& loc = rec->location;
    FetchResult r;
    r.meta = rec->meta;
    r.compressed = loc.compressed;
    if (loc.owned_by(self)) {
      r.stored = store_.read_partition_bytes(loc.partition_id, loc.data_offset,
                                             loc.stored_size);
      return r;
    }
    if (store_.has_replica(path)) {
      r.stored = store_.read_replica(path);
      return r;
    }
    throw Error(Errc::kNotFound, std::string(path) + " is not stored on node " +
                                     std::to_string(self));
  }
  FileMeta meta;
  {
    std::lock_guard lock(written_mu_);
    auto it = written_.find(path);
    if (it == written_.end()) throw Error(Errc::kNotFound, std::string(path));
    meta = it->second;
  }
  return FetchResult{meta, store_.read_output(path), false};
}

}  // namespace fanstore
