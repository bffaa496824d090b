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

#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "fanstore/bytes.h"
#include "fanstore/partition.h"
#include "test_util.h"

namespace fanstore::testing {

// A source tree plus its packed form.
struct PackedDataset {
  std::filesystem::path source;
  std::filesystem::path packed;
  std::map<std::string, Bytes> files;  // relative path -> content
  PartitionManifest manifest;

  std::filesystem::path manifest_path() const {
    return packed / std::string(kManifestFileName);
  }
};

// `count` files spread over nested directories, sizes uniform in
// [0, max_size], content mixing random and repeated runs. Files whose index
// is a multiple of `val_every` go under val/.
inline PackedDataset make_packed_dataset(const std::filesystem::path& base,
                                         std::size_t count, std::size_t max_size,
                                         std::uint32_t partitions,
                                         std::optional<CodecId> codec,
                                         std::uint64_t seed = 1,
                                         std::size_t val_every = 0) {
  PackedDataset ds;
  ds.source = base / "src";
  ds.packed = base / "packed";
  std::mt19937_64 rng(seed);
  std::vector<std::string> list;
  for (std::size_t i = 0; i < count; ++i) {
    std::string rel;
    if (val_every != 0 && i % val_every == 0) {
      rel = "val/v" + std::to_string(i);
    } else {
      rel = "train/c" + std::to_string(rng() % 7) + "/s" + std::to_string(i) + ".bin";
    }
    Bytes content = mixed_content(rng, rng() % (max_size + 1));
    write_bytes(ds.source / rel, content);
    ds.files[rel] = std::move(content);
    list.push_back(rel);
  }
  PackOptions options;
  options.codec = codec;
  ds.manifest = pack_dataset(list, ds.source, partitions, options, ds.packed);
  return ds;
}

}  // namespace fanstore::testing
