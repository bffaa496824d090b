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

#include <sys/stat.h>
#include <sys/time.h>

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

namespace fanstore::testing {

// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::string tmpl =
        (std::filesystem::temp_directory_path() / "fanstore-test-XXXXXX").string();
    if (::mkdtemp(tmpl.data()) == nullptr) std::abort();
    path_ = tmpl;
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& rel) const {
    return path_ / rel;
  }

 private:
  std::filesystem::path path_;
};

// Reference FNV-1a 64, written straight from the published constants and
// kept separate from the library implementation on purpose.
inline std::uint64_t reference_fnv1a64(const void* data, std::size_t n) {
  std::uint64_t h = 14695981039346656037ULL;
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 1099511628211ULL;
  }
  return h;
}
inline std::uint64_t reference_fnv1a64(const std::string& s) {
  return reference_fnv1a64(s.data(), s.size());
}

inline void write_bytes(const std::filesystem::path& p,
                        const std::vector<std::uint8_t>& data) {
  std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char*>(data.data()),
            static_cast<std::streamsize>(data.size()));
}

inline std::vector<std::uint8_t> read_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

// Pins atime/mtime so packed metadata is predictable.
inline void set_times(const std::filesystem::path& p, std::int64_t sec) {
  struct timeval tv[2] = {{sec, 0}, {sec, 0}};
  ::utimes(p.c_str(), tv);
}

// Mixed-content random bytes: runs of random data interleaved with repeats so
// both the raw and the compressed storage paths get exercised.
inline std::vector<std::uint8_t> mixed_content(std::mt19937_64& rng,
                                               std::size_t size) {
  std::vector<std::uint8_t> out;
  out.reserve(size);
  while (out.size() < size) {
    std::size_t run = 1 + rng() % 4096;
    if (rng() % 2 == 0 || out.size() < 8) {
      for (std::size_t i = 0; i < run && out.size() < size; ++i) {
        out.push_back(static_cast<std::uint8_t>(rng()));
      }
    } else {
      std::size_t dist = 1 + rng() % std::min<std::size_t>(out.size(), 60000);
      for (std::size_t i = 0; i < run && out.size() < size; ++i) {
        out.push_back(out[out.size() - dist]);
      }
    }
  }
  return out;
}

}  // namespace fanstore::testing
