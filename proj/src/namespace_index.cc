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

#include "fanstore/namespace_index.h"

#include <algorithm>
#include <map>
#include <set>

#include "fanstore/error.h"
#include "fanstore/hash.h"

namespace fanstore {
namespace {

std::string_view base_name(std::string_view path) {
  std::size_t slash = path.rfind('/');
  return slash == std::string_view::npos ? path : path.substr(slash + 1);
}

std::string_view parent_of(std::string_view path) {
  std::size_t slash = path.rfind('/');
  return slash == std::string_view::npos ? std::string_view{}
                                         : path.substr(0, slash);
}

}  // namespace

bool FileLocation::owned_by(NodeId node) const {
  return std::find(owner_nodes.begin(), owner_nodes.end(), node) !=
         owner_nodes.end();
}

bool path_under(std::string_view path, std::string_view dir) {
  if (dir.empty()) return true;
  if (path.size() < dir.size() || path.substr(0, dir.size()) != dir) {
    return false;
  }
  return path.size() == dir.size() || path[dir.size()] == '/';
}

const FileRecord* NamespaceIndex::find_file(std::string_view path) const {
  auto it = files_.find(path);
  return it == files_.end() ? nullptr : &it->second;
}

bool NamespaceIndex::is_directory(std::string_view path) const {
  return dirs_.find(path) != dirs_.end();
}

const std::vector<std::string>* NamespaceIndex::children(
    std::string_view dir) const {
  auto it = dirs_.find(dir);
  return it == dirs_.end() ? nullptr : &it->second;
}

FileMeta NamespaceIndex::stat(std::string_view path) const {
  if (const FileRecord* rec = find_file(path)) return rec->meta;
  if (is_directory(path)) return directory_meta();
  throw Error(Errc::kNotFound, std::string(path));
}

std::vector<std::string> NamespaceIndex::readdir(std::string_view path) const {
  if (const auto* kids = children(path)) return *kids;
  if (find_file(path) != nullptr) {
    throw Error(Errc::kNotDirectory, std::string(path));
  }
  throw Error(Errc::kNotFound, std::string(path));
}

std::vector<std::string> NamespaceIndex::sorted_file_paths() const {
  std::vector<std::string> out;
  out.reserve(files_.size());
  for (const auto& [path, _] : files_) out.push_back(path);
  std::sort(out.begin(), out.end());
  return out;
}

std::uint64_t NamespaceIndex::digest() const {
  Fnv1a64 h;
  Bytes buf;
  auto put_string = [&](std::string_view s) {
    append_le<std::uint32_t>(buf, static_cast<std::uint32_t>(s.size()));
    append(buf, as_bytes(s));
  };
  append_le<std::uint32_t>(buf, static_cast<std::uint32_t>(codec_));
  for (const auto& path : sorted_file_paths()) {
    const FileRecord& rec = files_.at(path);
    const FileLocation& loc = rec.location;
    put_string(path);
    append_meta(buf, rec.meta);
    append_le(buf, loc.partition_id);
    append_le<std::uint32_t>(buf,
                             static_cast<std::uint32_t>(loc.owner_nodes.size()));
    for (NodeId n : loc.owner_nodes) append_le(buf, n);
    append_le(buf, loc.data_offset);
    append_le(buf, loc.stored_size);
    append_le(buf, loc.uncompressed_size);
    buf.push_back(loc.compressed ? 1 : 0);
    buf.push_back(loc.replicated_everywhere ? 1 : 0);
    h.update(buf);
    buf.clear();
  }
  std::map<std::string_view, const std::vector<std::string>*> dirs;
  for (const auto& [path, kids] : dirs_) dirs.emplace(path, &kids);
  for (const auto& [path, kids] : dirs) {
    put_string(path);
    append_le<std::uint32_t>(buf, static_cast<std::uint32_t>(kids->size()));
    for (const auto& k : *kids) put_string(k);
    h.update(buf);
    buf.clear();
  }
  return h.digest();
}

NamespaceIndex load_namespace(const PartitionManifest& manifest,
                              const PartitionAssignment& assignment,
                              std::span<const std::string> replicated_dirs,
                              std::uint32_t node_count) {
  if (assignment.size() != manifest.partition_count) {
    throw Error(Errc::kInvalidArgument,
                "assignment covers " + std::to_string(assignment.size()) +
                    " partitions, manifest has " +
                    std::to_string(manifest.partition_count));
  }
  for (std::size_t p = 0; p < assignment.size(); ++p) {
    if (assignment[p].empty()) {
      throw Error(Errc::kInvalidArgument,
                  "partition " + std::to_string(p) + " has no owner");
    }
    for (NodeId n : assignment[p]) {
      if (n >= node_count) {
        throw Error(Errc::kInvalidArgument,
                    "partition " + std::to_string(p) + " assigned to node " +
                        std::to_string(n) + " of " + std::to_string(node_count));
      }
    }
  }

  NamespaceIndex index;
  index.codec_ = manifest.codec;
  std::map<std::string, std::set<std::string>> tree;
  tree[""];
  for (const auto& d : manifest.directories) {
    tree[d];
    if (!d.empty()) tree[std::string(parent_of(d))].insert(std::string(base_name(d)));
  }
  for (const auto& e : manifest.entries) {
    FileLocation loc;
    loc.partition_id = e.partition_id;
    loc.owner_nodes = assignment[e.partition_id];
    loc.data_offset = e.data_offset;
    loc.compressed = e.compressed_size != 0;
    loc.stored_size = loc.compressed ? e.compressed_size : e.meta.size_bytes;
    loc.uncompressed_size = e.meta.size_bytes;
    loc.replicated_everywhere =
        loc.owner_nodes.size() == node_count ||
        std::any_of(replicated_dirs.begin(), replicated_dirs.end(),
                    [&](const std::string& d) { return path_under(e.path, d); });
    if (!index.files_.emplace(e.path, FileRecord{e.meta, std::move(loc)}).second) {
      throw Error(Errc::kInvalidArgument, "duplicate manifest entry " + e.path);
    }
    // Close over parents even if the manifest's directory list is partial.
    std::string_view child = e.path;
    tree[std::string(parent_of(child))].insert(std::string(base_name(child)));
    for (std::string_view dir = parent_of(child); !dir.empty();
         dir = parent_of(dir)) {
      tree[std::string(parent_of(dir))].insert(std::string(base_name(dir)));
      tree[std::string(dir)];
    }
  }
  for (auto& [dir, kids] : tree) {
    if (index.files_.count(dir) != 0) {
      throw Error(Errc::kInvalidArgument,
                  "path is both a file and a directory: " + dir);
    }
    index.dirs_.emplace(dir, std::vector<std::string>(kids.begin(), kids.end()));
  }
  return index;
}

}  // namespace fanstore
