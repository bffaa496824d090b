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

#include <optional>
#include <string_view>

#include "fanstore/bytes.h"
#include "fanstore/file_meta.h"
#include "fanstore/namespace_index.h"
#include "fanstore/output_meta.h"

namespace fanstore {

// A whole file as stored on its owner: no striping, one transfer per file.
struct FetchResult {
  FileMeta meta;
  Bytes stored;
  bool compressed = false;
};

// Node-to-node requests used by the metadata service and the data plane.
// The TCP transport implements it; tests substitute in-memory fakes.
class PeerLink {
 public:
  virtual ~PeerLink() = default;

  // Throws Error(kNotFound) if the peer does not store path,
  // Error(kUnavailable) on timeouts and broken connections.
  virtual FetchResult fetch(NodeId peer, std::string_view path) = 0;

  // nullopt when the owner has no committed record for path.
  virtual std::optional<OutputRecord> stat_output(NodeId peer,
                                                  std::string_view path) = 0;

  // Throws Error(kAlreadyExists) on a second commit of the same path and
  // Error(kNotOwner) when peer is not the hash owner.
  virtual void commit_output(NodeId peer, std::string_view path,
                             const OutputRecord& record) = 0;
};

}  // namespace fanstore
