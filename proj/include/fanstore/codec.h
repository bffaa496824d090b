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
#include <string_view>

#include "fanstore/bytes.h"

namespace fanstore {

// Codec ids are recorded once per manifest; every entry of a packed dataset
// uses the same codec.
enum class CodecId : std::uint32_t {
  kIdentity = 0,
  kLzss = 1,
};

// Whole-file lossless compression. Implementations are stateless and
// deterministic: the same input and level always give the same bytes.
class Codec {
 public:
  virtual ~Codec() = default;

  virtual CodecId id() const = 0;
  virtual std::string_view name() const = 0;
  virtual int min_level() const = 0;
  virtual int max_level() const = 0;
  virtual int default_level() const = 0;

  // Throws Error(kInvalidArgument) if level is out of range.
  virtual Bytes compress(ByteView input, int level) const = 0;

  // Throws Error(kCorrupt) on a malformed stream or when the decoded length
  // differs from expected_len.
  virtual Bytes decompress(ByteView input, std::size_t expected_len) const = 0;
};

class CodecRegistry {
 public:
  // Throws Error(kInvalidArgument) for ids that are not registered.
  static const Codec& get(CodecId id);
  static const Codec& get(std::uint32_t raw_id);
  static const Codec& by_name(std::string_view name);
};

// LZSS with a 64 KiB window and unbounded match lengths.
//
// Stream layout: tokens are grouped by eight behind a flag byte whose bits,
// LSB first, mark each token as literal (0) or match (1). A literal is one
// byte. A match is a u16 little-endian distance (1..65535) followed by a
// length byte L giving length L + 4; L == 255 is followed by a LEB128 varint
// that is added to the length. Levels 1..9 bound the hash-chain search depth
// at 2^(level-1) candidates; levels >= 5 also try a one-byte lazy match.
Bytes lzss_compress(ByteView input, int level);
Bytes lzss_decompress(ByteView input, std::size_t expected_len);

}  // namespace fanstore
