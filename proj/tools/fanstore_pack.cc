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

// fanstore-pack: reorganizes a dataset directory into partition files and a
// manifest ready for fanstored.

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fanstore/codec.h"
#include "fanstore/error.h"
#include "fanstore/hash.h"
#include "fanstore/io.h"
#include "fanstore/manifest.h"
#include "fanstore/partition.h"

namespace fs = std::filesystem;

int main(int argc, char** argv) {
  CLI::App app{"Pack a dataset into FanStore partitions"};
  std::string root, out, list, codec = "none";
  std::uint32_t partitions = 1;
  int level = 0;
  app.add_option("--root", root, "Dataset root directory")->required();
  app.add_option("--out", out, "Output directory for part.N and manifest")->required();
  app.add_option("-p,--partitions", partitions, "Number of partitions")
      ->check(CLI::PositiveNumber);
  app.add_option("--list", list,
                 "File with one path per line (default: every regular file "
                 "under --root, sorted)");
  app.add_option("--codec", codec, "none or lzss");
  app.add_option("--level", level, "Codec level (0: codec default)");
  CLI11_PARSE(app, argc, argv);

  try {
    std::vector<std::string> files;
    if (!list.empty()) {
      std::string text = fanstore::read_text_file(list);
      std::size_t start = 0;
      while (start < text.size()) {
        std::size_t nl = text.find('\n', start);
        if (nl == std::string::npos) nl = text.size();
        if (nl > start) files.push_back(text.substr(start, nl - start));
        start = nl + 1;
      }
    } else {
      for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (e.is_regular_file()) {
          files.push_back(fs::relative(e.path(), root).generic_string());
        }
      }
      std::sort(files.begin(), files.end());
    }
    fanstore::PackOptions options;
    const fanstore::Codec& c = fanstore::CodecRegistry::by_name(codec);
    if (c.id() != fanstore::CodecId::kIdentity) options.codec = c.id();
    if (level != 0) options.level = level;
    auto manifest = fanstore::pack_dataset(files, root, partitions, options, out);
    std::uint64_t stored = 0;
    for (const auto& p : manifest.partitions) stored += p.byte_size;
    std::cout << "packed " << manifest.entries.size() << " files into "
              << manifest.partition_count << " partitions (" << stored
              << " bytes, codec " << c.name() << ")\n"
              << "manifest digest "
              << fanstore::hex64(fanstore::manifest_digest(manifest)) << "\n";
  } catch (const std::exception& e) {
    std::cerr << "fanstore-pack: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
