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

#include "fanstore/manifest.h"

#include <charconv>
#include <sstream>

#include "fanstore/error.h"
#include "fanstore/hash.h"
#include "fanstore/io.h"

namespace fanstore {
namespace {

constexpr char kHex[] = "0123456789abcdef";

void encode_path(std::string& out, std::string_view path) {
  out.push_back('/');
  for (unsigned char c : path) {
    if (c == '%' || c <= 0x20 || c == 0x7f) {
      out.push_back('%');
      out.push_back(kHex[c >> 4]);
      out.push_back(kHex[c & 0xf]);
    } else {
      out.push_back(static_cast<char>(c));
    }
  }
}

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  return -1;
}

std::string decode_path(std::string_view field) {
  if (field.empty() || field[0] != '/') {
    throw Error(Errc::kCorrupt, "manifest path must start with '/'");
  }
  std::string out;
  for (std::size_t i = 1; i < field.size(); ++i) {
    if (field[i] != '%') {
      out.push_back(field[i]);
      continue;
    }
    if (i + 2 >= field.size()) {
      throw Error(Errc::kCorrupt, "truncated percent escape in manifest path");
    }
    int hi = hex_value(field[i + 1]);
    int lo = hex_value(field[i + 2]);
    if (hi < 0 || lo < 0) {
      throw Error(Errc::kCorrupt, "bad percent escape in manifest path");
    }
    out.push_back(static_cast<char>(hi * 16 + lo));
    i += 2;
  }
  return out;
}

std::string hex_bytes(const std::uint8_t* data, std::size_t n) {
  std::string out;
  out.reserve(n * 2);
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(kHex[data[i] >> 4]);
    out.push_back(kHex[data[i] & 0xf]);
  }
  return out;
}

template <typename T>
T parse_number(std::string_view field, int base = 10) {
  T value{};
  auto [ptr, ec] =
      std::from_chars(field.data(), field.data() + field.size(), value, base);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw Error(Errc::kCorrupt,
                "bad number '" + std::string(field) + "' in manifest");
  }
  return value;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i <= line.size()) {
    std::size_t j = line.find(' ', i);
    if (j == std::string_view::npos) j = line.size();
    out.push_back(line.substr(i, j - i));
    i = j + 1;
  }
  return out;
}

void expect_fields(const std::vector<std::string_view>& f, std::size_t n) {
  if (f.size() != n) {
    throw Error(Errc::kCorrupt, "manifest record '" + std::string(f[0]) +
                                    "' has " + std::to_string(f.size()) +
                                    " fields, expected " + std::to_string(n));
  }
}

std::string serialize_body(const PartitionManifest& m) {
  std::string out;
  out.append(kManifestMagic).push_back('\n');
  out += "codec " + std::to_string(static_cast<std::uint32_t>(m.codec)) + "\n";
  out += "partitions " + std::to_string(m.partition_count) + "\n";
  for (const auto& p : m.partitions) {
    out += "partition " + std::to_string(p.id) + " " +
           std::to_string(p.entry_count) + " " + std::to_string(p.byte_size) +
           " " + hex64(p.digest) + "\n";
  }
  for (const auto& d : m.directories) {
    out += "dir ";
    encode_path(out, d);
    out.push_back('\n');
  }
  for (const auto& e : m.entries) {
    EncodedMeta meta = encode_meta(e.meta);
    out += "file " + std::to_string(e.partition_id) + " " +
           std::to_string(e.data_offset) + " " +
           std::to_string(e.compressed_size) + " " +
           hex_bytes(meta.data(), meta.size()) + " ";
    encode_path(out, e.path);
    out.push_back('\n');
  }
  return out;
}

}  // namespace

std::vector<std::string> parent_chain(std::string_view path) {
  std::vector<std::string> out{""};
  std::size_t pos = 0;
  while (true) {
    std::size_t slash = path.find('/', pos);
    if (slash == std::string_view::npos) break;
    out.emplace_back(path.substr(0, slash));
    pos = slash + 1;
  }
  return out;
}

std::string serialize_manifest(const PartitionManifest& m) {
  std::string body = serialize_body(m);
  body += "end " + hex64(fnv1a64(body)) + "\n";
  return body;
}

std::uint64_t manifest_digest(const PartitionManifest& m) {
  return fnv1a64(serialize_body(m));
}

PartitionManifest parse_manifest(std::string_view text) {
  std::size_t end_at = text.rfind("\nend ");
  if (end_at == std::string_view::npos) {
    throw Error(Errc::kCorrupt, "manifest has no end record");
  }
  std::string_view body = text.substr(0, end_at + 1);
  std::string_view trailer = text.substr(end_at + 1);
  if (!trailer.empty() && trailer.back() == '\n') trailer.remove_suffix(1);
  auto tf = split_fields(trailer);
  expect_fields(tf, 2);
  if (parse_number<std::uint64_t>(tf[1], 16) != fnv1a64(body)) {
    throw Error(Errc::kCorrupt, "manifest checksum mismatch");
  }

  PartitionManifest m;
  bool seen_magic = false;
  bool seen_codec = false;
  bool seen_count = false;
  std::size_t pos = 0;
  while (pos < body.size()) {
    std::size_t nl = body.find('\n', pos);
    std::string_view line = body.substr(pos, nl - pos);
    pos = nl + 1;
    if (!seen_magic) {
      if (line != kManifestMagic) {
        throw Error(Errc::kCorrupt, "bad manifest magic");
      }
      seen_magic = true;
      continue;
    }
    auto f = split_fields(line);
    if (f[0] == "codec") {
      expect_fields(f, 2);
      m.codec = static_cast<CodecId>(parse_number<std::uint32_t>(f[1]));
      CodecRegistry::get(m.codec);  // unknown ids are a hard error at load
      seen_codec = true;
    } else if (f[0] == "partitions") {
      expect_fields(f, 2);
      m.partition_count = parse_number<std::uint32_t>(f[1]);
      seen_count = true;
    } else if (f[0] == "partition") {
      expect_fields(f, 5);
      PartitionInfo p;
      p.id = parse_number<std::uint32_t>(f[1]);
      p.entry_count = parse_number<std::uint32_t>(f[2]);
      p.byte_size = parse_number<std::uint64_t>(f[3]);
      p.digest = parse_number<std::uint64_t>(f[4], 16);
      m.partitions.push_back(p);
    } else if (f[0] == "dir") {
      expect_fields(f, 2);
      m.directories.push_back(decode_path(f[1]));
    } else if (f[0] == "file") {
      expect_fields(f, 6);
      ManifestEntry e;
      e.partition_id = parse_number<std::uint32_t>(f[1]);
      e.data_offset = parse_number<std::uint64_t>(f[2]);
      e.compressed_size = parse_number<std::uint64_t>(f[3]);
      if (f[4].size() != FileMeta::kEncodedSize * 2) {
        throw Error(Errc::kCorrupt, "manifest stat record has wrong length");
      }
      EncodedMeta raw;
      for (std::size_t i = 0; i < raw.size(); ++i) {
        raw[i] = parse_number<std::uint8_t>(f[4].substr(2 * i, 2), 16);
      }
      e.meta = decode_meta(raw.data());
      e.path = decode_path(f[5]);
      m.entries.push_back(std::move(e));
    } else {
      throw Error(Errc::kCorrupt,
                  "unknown manifest record '" + std::string(f[0]) + "'");
    }
  }
  if (!seen_magic || !seen_codec || !seen_count) {
    throw Error(Errc::kCorrupt, "manifest header incomplete");
  }
  if (m.partitions.size() != m.partition_count) {
    throw Error(Errc::kCorrupt, "manifest partition records do not match count");
  }
  for (std::uint32_t i = 0; i < m.partition_count; ++i) {
    if (m.partitions[i].id != i) {
      throw Error(Errc::kCorrupt, "manifest partition ids not dense");
    }
  }
  for (const auto& e : m.entries) {
    if (e.partition_id >= m.partition_count) {
      throw Error(Errc::kCorrupt, "entry " + e.path + " names partition " +
                                      std::to_string(e.partition_id));
    }
  }
  return m;
}

void write_manifest(const PartitionManifest& m,
                    const std::filesystem::path& path) {
  write_file_atomic(path, as_bytes(serialize_manifest(m)));
}

PartitionManifest read_manifest(const std::filesystem::path& path) {
  return parse_manifest(read_text_file(path));
}

}  // namespace fanstore
