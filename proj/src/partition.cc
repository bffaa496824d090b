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

#include "fanstore/partition.h"

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <algorithm>
#include <set>
#include <unordered_set>

#include "fanstore/error.h"
#include "fanstore/hash.h"
#include "fanstore/io.h"

namespace fanstore {
namespace fs = std::filesystem;

namespace {

// Output side of one partition: tracks the write position and the running
// whole-file digest.
class PartitionWriter {
 public:
  PartitionWriter(const fs::path& path, std::uint32_t entry_count)
      : fd_(open_file(path, O_WRONLY | O_CREAT | O_TRUNC)) {
    std::uint8_t count[kCountFieldSize];
    store_le(count, entry_count);
    emit(ByteView(count, kCountFieldSize));
  }

  // Returns the data offset of the appended entry.
  std::uint64_t append(const std::string& name, const FileMeta& meta,
                       std::uint64_t compressed_size, ByteView data) {
    std::uint8_t header[kEntryHeaderSize] = {};
    std::memcpy(header, name.data(), name.size());
    encode_meta(meta, header + kNameFieldSize);
    store_le(header + kNameFieldSize + FileMeta::kEncodedSize, compressed_size);
    emit(ByteView(header, kEntryHeaderSize));
    std::uint64_t data_offset = offset_;
    emit(data);
    return data_offset;
  }

  std::uint64_t size() const { return offset_; }
  std::uint64_t digest() const { return hash_.digest(); }

 private:
  void emit(ByteView bytes) {
    write_all(fd_.get(), bytes);
    hash_.update(bytes);
    offset_ += bytes.size();
  }

  UniqueFd fd_;
  std::uint64_t offset_ = 0;
  Fnv1a64 hash_;
};

std::string relative_to_root(const std::string& source, const fs::path& root) {
  fs::path p(source);
  if (p.is_absolute()) {
    fs::path rel = p.lexically_normal().lexically_relative(root.lexically_normal());
    if (rel.empty() || *rel.begin() == "..") {
      throw Error(Errc::kInvalidArgument,
                  source + " is not under " + root.string());
    }
    return normalize_relative_path(rel.generic_string());
  }
  return normalize_relative_path(source);
}

}  // namespace

std::string partition_file_name(std::uint32_t partition_id) {
  return "part." + std::to_string(partition_id);
}

std::string normalize_relative_path(std::string_view path) {
  if (!path.empty() && path.front() == '/') {
    throw Error(Errc::kInvalidArgument,
                "expected a relative path: " + std::string(path));
  }
  std::vector<std::string_view> parts;
  std::size_t pos = 0;
  while (pos <= path.size()) {
    std::size_t slash = path.find('/', pos);
    if (slash == std::string_view::npos) slash = path.size();
    std::string_view seg = path.substr(pos, slash - pos);
    pos = slash + 1;
    if (seg.empty() || seg == ".") continue;
    if (seg == "..") {
      if (parts.empty()) {
        throw Error(Errc::kInvalidArgument,
                    "path escapes the dataset root: " + std::string(path));
      }
      parts.pop_back();
      continue;
    }
    parts.push_back(seg);
  }
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out.push_back('/');
    out.append(parts[i]);
  }
  return out;
}

PartitionManifest pack_dataset(std::span<const std::string> file_list,
                               const fs::path& root,
                               std::uint32_t partition_count,
                               const PackOptions& options,
                               const fs::path& out_dir) {
  if (partition_count == 0) {
    throw Error(Errc::kInvalidArgument, "partition_count must be >= 1");
  }
  const CodecId codec_id = options.codec.value_or(CodecId::kIdentity);
  const Codec& codec = CodecRegistry::get(codec_id);
  const int level = options.level.value_or(codec.default_level());
  if (level < codec.min_level() || level > codec.max_level()) {
    throw Error(Errc::kInvalidArgument,
                "level " + std::to_string(level) + " out of range for codec " +
                    std::string(codec.name()));
  }

  // Validate the whole list before touching the destination.
  std::vector<std::string> names;
  names.reserve(file_list.size());
  std::unordered_set<std::string> seen;
  for (const auto& source : file_list) {
    std::string rel = relative_to_root(source, root);
    if (rel.empty()) {
      throw Error(Errc::kInvalidArgument, "empty file path in file list");
    }
    if (rel.size() > kMaxPathLength) {
      throw Error(Errc::kInvalidArgument,
                  "path longer than 255 bytes: " + rel);
    }
    if (!seen.insert(rel).second) {
      throw Error(Errc::kInvalidArgument, "duplicate path in file list: " + rel);
    }
    names.push_back(std::move(rel));
  }

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) {
    throw Error(Errc::kIo, "cannot create " + out_dir.string() + ": " +
                               ec.message());
  }

  const std::size_t n = names.size();
  std::vector<PartitionWriter> writers;
  writers.reserve(partition_count);
  for (std::uint32_t p = 0; p < partition_count; ++p) {
    std::uint32_t count = static_cast<std::uint32_t>(
        n / partition_count + (p < n % partition_count ? 1 : 0));
    writers.emplace_back(out_dir / partition_file_name(p), count);
  }

  PartitionManifest manifest;
  manifest.partition_count = partition_count;
  manifest.codec = codec_id;
  std::set<std::string> dirs{""};

  for (std::size_t i = 0; i < n; ++i) {
    const fs::path source = root / names[i];
    struct stat st;
    if (::stat(source.c_str(), &st) != 0) {
      throw Error(Errc::kNotFound, "cannot stat " + source.string());
    }
    if (!S_ISREG(st.st_mode)) {
      throw Error(Errc::kInvalidArgument,
                  source.string() + " is not a regular file");
    }
    Bytes content = read_file(source);
    FileMeta meta = meta_from_stat(st);
    meta.size_bytes = content.size();
    // Reading the source moves its atime; pin it so repacking is
    // byte-reproducible.
    meta.atime_sec = meta.mtime_sec;
    meta.atime_nsec = meta.mtime_nsec;

    std::uint64_t compressed_size = 0;
    Bytes compressed;
    if (codec_id != CodecId::kIdentity) {
      compressed = codec.compress(content, level);
      if (compressed.size() < content.size()) {
        compressed_size = compressed.size();
      }
    }
    const std::uint32_t pid = static_cast<std::uint32_t>(i % partition_count);
    ByteView stored = compressed_size != 0 ? ByteView(compressed)
                                           : ByteView(content);
    std::uint64_t data_offset =
        writers[pid].append(names[i], meta, compressed_size, stored);

    for (auto& d : parent_chain(names[i])) dirs.insert(std::move(d));
    manifest.entries.push_back(
        ManifestEntry{names[i], meta, pid, data_offset, compressed_size});
  }

  for (std::uint32_t p = 0; p < partition_count; ++p) {
    std::uint32_t count = static_cast<std::uint32_t>(
        n / partition_count + (p < n % partition_count ? 1 : 0));
    manifest.partitions.push_back(
        PartitionInfo{p, count, writers[p].size(), writers[p].digest()});
  }
  manifest.directories.assign(dirs.begin(), dirs.end());
  write_manifest(manifest, out_dir / kManifestFileName);
  return manifest;
}

std::vector<PartitionEntry> read_partition_index(const fs::path& path) {
  UniqueFd fd = open_file(path, O_RDONLY);
  struct stat st;
  if (::fstat(fd.get(), &st) != 0) {
    throw Error(Errc::kIo, "cannot stat " + path.string());
  }
  const std::uint64_t file_size = static_cast<std::uint64_t>(st.st_size);
  if (file_size < kCountFieldSize) {
    throw CorruptionError(0, path.string() + ": missing entry count");
  }
  Bytes count_field = pread_exact(fd.get(), 0, kCountFieldSize);
  const std::uint32_t count = load_le<std::uint32_t>(count_field.data());

  std::vector<PartitionEntry> entries;
  entries.reserve(std::min<std::uint32_t>(count, 1u << 20));
  std::uint64_t offset = kCountFieldSize;
  for (std::uint32_t i = 0; i < count; ++i) {
    if (file_size - offset < kEntryHeaderSize) {
      throw CorruptionError(i, path.string() + ": truncated entry header");
    }
    Bytes header = pread_exact(fd.get(), offset, kEntryHeaderSize);
    const std::uint8_t* name_end = static_cast<const std::uint8_t*>(
        std::memchr(header.data(), 0, kNameFieldSize));
    if (name_end == nullptr) {
      throw CorruptionError(i, "file name is not NUL-terminated");
    }
    PartitionEntry e;
    e.file_name.assign(reinterpret_cast<const char*>(header.data()),
                       name_end - header.data());
    for (const std::uint8_t* p = name_end; p < header.data() + kNameFieldSize;
         ++p) {
      if (*p != 0) throw CorruptionError(i, "file name padding not zero");
    }
    if (e.file_name.empty()) throw CorruptionError(i, "empty file name");
    try {
      e.meta = decode_meta(header.data() + kNameFieldSize);
    } catch (const Error& err) {
      throw CorruptionError(i, err.what());
    }
    e.compressed_size = load_le<std::uint64_t>(
        header.data() + kNameFieldSize + FileMeta::kEncodedSize);
    e.data_offset = offset + kEntryHeaderSize;
    if (file_size - e.data_offset < e.stored_size()) {
      throw CorruptionError(i, path.string() + ": data region of " +
                                   e.file_name + " truncated");
    }
    offset = e.data_offset + e.stored_size();
    entries.push_back(std::move(e));
  }
  return entries;
}

Bytes read_stored_bytes(const fs::path& partition_path,
                        const PartitionEntry& entry) {
  UniqueFd fd = open_file(partition_path, O_RDONLY);
  return pread_exact(fd.get(), entry.data_offset, entry.stored_size());
}

Bytes decode_stored(ByteView stored, bool compressed, std::uint64_t size,
                    const Codec& codec) {
  if (!compressed) {
    if (stored.size() != size) {
      throw Error(Errc::kCorrupt, "stored length " +
                                      std::to_string(stored.size()) +
                                      " != file size " + std::to_string(size));
    }
    return Bytes(stored.begin(), stored.end());
  }
  return codec.decompress(stored, size);
}

Bytes extract_file(const fs::path& partition_path, const PartitionEntry& entry,
                   const Codec& codec) {
  Bytes stored = read_stored_bytes(partition_path, entry);
  return decode_stored(stored, entry.compressed(), entry.meta.size_bytes, codec);
}

void verify_partition(const fs::path& partition_path,
                      const PartitionManifest& manifest,
                      std::uint32_t partition_id) {
  const PartitionInfo& info = manifest.partitions.at(partition_id);
  std::error_code ec;
  auto size = fs::file_size(partition_path, ec);
  if (ec) {
    throw Error(Errc::kNotFound,
                "missing partition file " + partition_path.string());
  }
  if (size != info.byte_size) {
    throw Error(Errc::kCorrupt, partition_path.string() + " has " +
                                    std::to_string(size) + " bytes, manifest " +
                                    std::to_string(info.byte_size));
  }
  auto index = read_partition_index(partition_path);
  std::size_t k = 0;
  for (const auto& e : manifest.entries) {
    if (e.partition_id != partition_id) continue;
    if (k >= index.size() || index[k].file_name != e.path ||
        index[k].data_offset != e.data_offset ||
        index[k].compressed_size != e.compressed_size ||
        !(index[k].meta == e.meta)) {
      throw Error(Errc::kCorrupt, partition_path.string() + " entry " +
                                      std::to_string(k) +
                                      " disagrees with the manifest");
    }
    ++k;
  }
  if (k != index.size() || k != info.entry_count) {
    throw Error(Errc::kCorrupt,
                partition_path.string() + " entry count disagrees with manifest");
  }
  if (file_digest(partition_path) != info.digest) {
    throw Error(Errc::kCorrupt, partition_path.string() + " digest mismatch");
  }
}

}  // namespace fanstore
