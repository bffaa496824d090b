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

#include <cstdint>
#include <string>
#include <string_view>

#include "fanstore/bytes.h"

namespace fanstore {

inline constexpr std::uint64_t kFnvOffsetBasis = 0xcbf29ce484222325ULL;
inline constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

// Incremental FNV-1a 64-bit. Used for output ownership, content digests and
// manifest checksums.
class Fnv1a64 {
 public:
  void update(ByteView data) {
    std::uint64_t h = state_;
    for (std::uint8_t b : data) {
      h ^= b;
      h *= kFnvPrime;
    }
    state_ = h;
  }
  void update(std::string_view s) { update(as_bytes(s)); }
  std::uint64_t digest() const { return state_; }

 private:
  std::uint64_t state_ = kFnvOffsetBasis;
};

inline std::uint64_t fnv1a64(ByteView data) {
  Fnv1a64 h;
  h.update(data);
  return h.digest();
}

inline std::uint64_t fnv1a64(std::string_view s) { return fnv1a64(as_bytes(s)); }

// 16 lowercase hex digits.
std::string hex64(std::uint64_t v);

}  // namespace fanstore
