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

#include "fanstore/client.h"

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstdlib>
#include <cstring>
#include <variant>

#include "fanstore/error.h"
#include "fanstore/partition.h"

namespace fanstore {
namespace fs = std::filesystem;

namespace {

[[noreturn]] void throw_host_error(const std::string& what, int err) {
  Errc code;
  switch (err) {
    case ENOENT: code = Errc::kNotFound; break;
    case EEXIST: code = Errc::kAlreadyExists; break;
    case EISDIR: code = Errc::kIsDirectory; break;
    case ENOTDIR: code = Errc::kNotDirectory; break;
    case EBADF: code = Errc::kBadDescriptor; break;
    case EINVAL: code = Errc::kInvalidArgument; break;
    default: code = Errc::kIo; break;
  }
  throw Error(code, what + ": " + std::strerror(err));
}

std::string strip_trailing_slashes(std::string s) {
  while (s.size() > 1 && s.back() == '/') s.pop_back();
  return s;
}

}  // namespace

MountMap::MountMap(std::string mount_prefix)
    : prefix_(strip_trailing_slashes(std::move(mount_prefix))) {
  if (prefix_.empty() || prefix_.front() != '/') {
    throw Error(Errc::kInvalidArgument,
                "mount prefix must be an absolute path: '" + prefix_ + "'");
  }
}

std::optional<std::string> MountMap::resolve(std::string_view path) const {
  if (prefix_ == "/") {
    if (path.empty() || path.front() != '/') return std::nullopt;
    return normalize_relative_path(path.substr(1));
  }
  if (!path.starts_with(prefix_)) return std::nullopt;
  std::string_view rest = path.substr(prefix_.size());
  if (rest.empty()) return std::string();
  if (rest.front() != '/') return std::nullopt;  // "/fanstore2" is not mounted
  while (!rest.empty() && rest.front() == '/') rest.remove_prefix(1);
  while (!rest.empty() && rest.back() == '/') rest.remove_suffix(1);
  if (rest.empty()) return std::string();
  return normalize_relative_path(rest);
}

std::string MountMap::to_mount(std::string_view relative) const {
  if (relative.empty()) return prefix_;
  if (prefix_ == "/") return "/" + std::string(relative);
  return prefix_ + "/" + std::string(relative);
}

ClientSettings ClientSettings::resolved() const {
  ClientSettings out = *this;
  if (!out.mount) {
    const char* v = std::getenv("FANSTORE_MOUNT");
    out.mount = (v != nullptr && *v != '\0') ? v : kDefaultMount;
  }
  if (!out.node) {
    const char* v = std::getenv("FANSTORE_NODE");
    if (v != nullptr && *v != '\0') {
      char* end = nullptr;
      errno = 0;
      unsigned long id = std::strtoul(v, &end, 10);
      if (errno != 0 || end == v || *end != '\0' || id > 0xffffffffUL) {
        throw Error(Errc::kInvalidArgument,
                    std::string("FANSTORE_NODE is not a node id: ") + v);
      }
      out.node = static_cast<NodeId>(id);
    } else {
      out.node = 0;
    }
  }
  if (!out.config) {
    const char* v = std::getenv("FANSTORE_CONFIG");
    if (v != nullptr && *v != '\0') out.config = fs::path(v);
  }
  return out;
}

// ---------------------------------------------------------------------------

struct FileSystem::Descriptor {
  std::variant<ReadHandle, WriteHandle, UniqueFd> handle;
};

FileSystem::FileSystem(Node& node, std::string mount_prefix)
    : node_(node), mount_(std::move(mount_prefix)) {}

FileSystem::~FileSystem() {
  std::lock_guard lock(mu_);
  for (auto& [fd, desc] : table_) {
    if (auto* r = std::get_if<ReadHandle>(&desc->handle)) {
      node_.data().close_read(*r);
    }
  }
  table_.clear();
}

std::shared_ptr<FileSystem::Descriptor> FileSystem::lookup(int fd) const {
  std::lock_guard lock(mu_);
  auto it = table_.find(fd);
  if (it == table_.end()) {
    throw Error(Errc::kBadDescriptor, "descriptor " + std::to_string(fd));
  }
  return it->second;
}

std::size_t FileSystem::open_descriptors() const {
  std::lock_guard lock(mu_);
  return table_.size();
}

int FileSystem::open(std::string_view path, OpenMode mode) {
  auto desc = std::make_shared<Descriptor>();
  if (auto rel = mount_.resolve(path)) {
    if (mode == OpenMode::kRead) {
      desc->handle = node_.data().open_read(*rel);
    } else {
      if (rel->empty()) {
        throw Error(Errc::kIsDirectory, "cannot write the mount root");
      }
      desc->handle = node_.data().open_write(*rel);
    }
  } else {
    std::string host(path);
    int flags = mode == OpenMode::kRead ? O_RDONLY
                                        : (O_WRONLY | O_CREAT | O_TRUNC);
    int fd = ::open(host.c_str(), flags | O_CLOEXEC, 0644);
    if (fd < 0) throw_host_error("open " + host, errno);
    desc->handle = UniqueFd(fd);
  }
  int fd = next_fd_.fetch_add(1);
  std::lock_guard lock(mu_);
  table_.emplace(fd, std::move(desc));
  return fd;
}

Bytes FileSystem::read(int fd, std::size_t length) {
  auto desc = lookup(fd);
  if (auto* r = std::get_if<ReadHandle>(&desc->handle)) {
    ByteView v = r->read(length);
    return Bytes(v.begin(), v.end());
  }
  if (auto* h = std::get_if<UniqueFd>(&desc->handle)) {
    Bytes out(length);
    ssize_t n;
    do {
      n = ::read(h->get(), out.data(), length);
    } while (n < 0 && errno == EINTR);
    if (n < 0) throw_host_error("read", errno);
    out.resize(static_cast<std::size_t>(n));
    return out;
  }
  throw Error(Errc::kBadDescriptor, "descriptor is open for writing");
}

Bytes FileSystem::pread(int fd, std::uint64_t offset, std::size_t length) {
  auto desc = lookup(fd);
  if (auto* r = std::get_if<ReadHandle>(&desc->handle)) {
    ByteView v = r->read_at(offset, length);
    return Bytes(v.begin(), v.end());
  }
  if (auto* h = std::get_if<UniqueFd>(&desc->handle)) {
    Bytes out(length);
    ssize_t n;
    do {
      n = ::pread(h->get(), out.data(), length, static_cast<off_t>(offset));
    } while (n < 0 && errno == EINTR);
    if (n < 0) throw_host_error("pread", errno);
    out.resize(static_cast<std::size_t>(n));
    return out;
  }
  throw Error(Errc::kBadDescriptor, "descriptor is open for writing");
}

std::size_t FileSystem::write(int fd, ByteView data) {
  auto desc = lookup(fd);
  if (auto* w = std::get_if<WriteHandle>(&desc->handle)) {
    return node_.data().write(*w, data);
  }
  if (auto* h = std::get_if<UniqueFd>(&desc->handle)) {
    ssize_t n;
    do {
      n = ::write(h->get(), data.data(), data.size());
    } while (n < 0 && errno == EINTR);
    if (n < 0) throw_host_error("write", errno);
    return static_cast<std::size_t>(n);
  }
  throw Error(Errc::kBadDescriptor, "descriptor is open for reading");
}

void FileSystem::close(int fd) {
  std::shared_ptr<Descriptor> desc;
  {
    std::lock_guard lock(mu_);
    auto it = table_.find(fd);
    if (it == table_.end()) {
      throw Error(Errc::kBadDescriptor, "descriptor " + std::to_string(fd));
    }
    desc = std::move(it->second);
    table_.erase(it);
  }
  if (auto* r = std::get_if<ReadHandle>(&desc->handle)) {
    node_.data().close_read(*r);
  } else if (auto* w = std::get_if<WriteHandle>(&desc->handle)) {
    node_.data().close_write(*w);
  } else {
    auto& h = std::get<UniqueFd>(desc->handle);
    if (::close(h.release()) != 0) throw_host_error("close", errno);
  }
}

FileMeta FileSystem::stat(std::string_view path) {
  if (auto rel = mount_.resolve(path)) return node_.metadata().stat(*rel);
  std::string host(path);
  struct stat st;
  if (::stat(host.c_str(), &st) != 0) throw_host_error("stat " + host, errno);
  return meta_from_stat(st);
}

std::vector<std::string> FileSystem::readdir(std::string_view path) {
  if (auto rel = mount_.resolve(path)) return node_.metadata().readdir(*rel);
  std::string host(path);
  struct stat st;
  if (::stat(host.c_str(), &st) != 0) throw_host_error("readdir " + host, errno);
  if (!S_ISDIR(st.st_mode)) throw_host_error("readdir " + host, ENOTDIR);
  std::vector<std::string> names;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(host, ec)) {
    names.push_back(entry.path().filename().string());
  }
  if (ec) throw_host_error("readdir " + host, ec.value());
  std::sort(names.begin(), names.end());
  return names;
}

Bytes FileSystem::read_file(std::string_view path) {
  int fd = open(path, OpenMode::kRead);
  Bytes out;
  try {
    if (mount_.resolve(path)) {
      auto desc = lookup(fd);
      ByteView v = std::get<ReadHandle>(desc->handle).read_at(0, SIZE_MAX);
      out.assign(v.begin(), v.end());
    } else {
      while (true) {
        Bytes chunk = read(fd, 1 << 20);
        if (chunk.empty()) break;
        append(out, chunk);
      }
    }
  } catch (...) {
    close(fd);
    throw;
  }
  close(fd);
  return out;
}

MountedNode mount_from_settings(const ClientSettings& settings,
                                NodeOptions options) {
  ClientSettings s = settings.resolved();
  if (!s.config) {
    throw Error(Errc::kInvalidArgument,
                "no cluster config given and FANSTORE_CONFIG is unset");
  }
  ClusterConfig config = load_cluster_config(*s.config);
  if (config.dataset_dir.empty()) {
    throw Error(Errc::kInvalidArgument,
                "cluster config has no dataset_dir to read the manifest from");
  }
  MountedNode out;
  out.node = Node::bootstrap(config, *s.node,
                             config.dataset_dir / kManifestFileName, options);
  out.fs = std::make_unique<FileSystem>(*out.node, *s.mount);
  return out;
}

}  // namespace fanstore
