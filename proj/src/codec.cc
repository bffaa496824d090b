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

#include "fanstore/codec.h"

#include <algorithm>
#include <string>
#include <vector>

#include "fanstore/error.h"

namespace fanstore {
namespace {

constexpr std::size_t kMinMatch = 4;
constexpr std::size_t kWindow = 1 << 16;
constexpr std::size_t kMaxDistance = kWindow - 1;
constexpr int kHashBits = 16;
constexpr std::uint32_t kNoPos = 0xffffffffu;

inline std::uint32_t hash4(const std::uint8_t* p) {
  std::uint32_t v = load_le<std::uint32_t>(p);
  return (v * 2654435761u) >> (32 - kHashBits);
}

struct Match {
  std::size_t length = 0;
  std::size_t distance = 0;
};

class MatchFinder {
 public:
  MatchFinder(ByteView input, int max_chain)
      : in_(input),
        max_chain_(max_chain),
        head_(std::size_t{1} << kHashBits, kNoPos),
        prev_(kWindow, kNoPos) {}

  void insert(std::size_t pos) {
    if (pos + kMinMatch > in_.size()) return;
    std::uint32_t h = hash4(in_.data() + pos);
    prev_[pos & (kWindow - 1)] = head_[h];
    head_[h] = static_cast<std::uint32_t>(pos);
  }

  Match find(std::size_t pos) const {
    Match best;
    if (pos + kMinMatch > in_.size()) return best;
    const std::uint8_t* cur = in_.data() + pos;
    const std::size_t limit = in_.size() - pos;
    std::uint32_t cand = head_[hash4(cur)];
    for (int chain = 0; chain < max_chain_ && cand != kNoPos; ++chain) {
      std::size_t dist = pos - cand;
      if (dist == 0 || dist > kMaxDistance) break;
      const std::uint8_t* ref = in_.data() + cand;
      if (ref[best.length] == cur[best.length] || best.length == 0) {
        std::size_t n = 0;
        while (n < limit && ref[n] == cur[n]) ++n;
        if (n >= kMinMatch && n > best.length) {
          best.length = n;
          best.distance = dist;
          if (n == limit) break;
        }
      }
      std::uint32_t next = prev_[cand & (kWindow - 1)];
      // Chain links older than the window have been overwritten.
      if (next != kNoPos && next >= cand) break;
      cand = next;
    }
    return best;
  }

 private:
  ByteView in_;
  int max_chain_;
  std::vector<std::uint32_t> head_;
  std::vector<std::uint32_t> prev_;
};

class TokenWriter {
 public:
  explicit TokenWriter(std::size_t reserve) { out_.reserve(reserve); }

  void literal(std::uint8_t b) {
    begin_token(false);
    out_.push_back(b);
  }

  void match(std::size_t distance, std::size_t length) {
    begin_token(true);
    append_le<std::uint16_t>(out_, static_cast<std::uint16_t>(distance));
    std::size_t extra = length - kMinMatch;
    if (extra < 255) {
      out_.push_back(static_cast<std::uint8_t>(extra));
      return;
    }
    out_.push_back(255);
    extra -= 255;
    do {
      std::uint8_t byte = extra & 0x7f;
      extra >>= 7;
      if (extra != 0) byte |= 0x80;
      out_.push_back(byte);
    } while (extra != 0);
  }

  Bytes finish() { return std::move(out_); }

 private:
  void begin_token(bool is_match) {
    if (bit_ == 8) {
      flag_at_ = out_.size();
      out_.push_back(0);
      bit_ = 0;
    }
    if (is_match) out_[flag_at_] |= static_cast<std::uint8_t>(1u << bit_);
    ++bit_;
  }

  Bytes out_;
  std::size_t flag_at_ = 0;
  int bit_ = 8;
};

class IdentityCodec final : public Codec {
 public:
  CodecId id() const override { return CodecId::kIdentity; }
  std::string_view name() const override { return "identity"; }
  int min_level() const override { return 0; }
  int max_level() const override { return 0; }
  int default_level() const override { return 0; }

  Bytes compress(ByteView input, int level) const override {
    if (level != 0) {
      throw Error(Errc::kInvalidArgument, "identity codec takes level 0");
    }
    return Bytes(input.begin(), input.end());
  }

  Bytes decompress(ByteView input, std::size_t expected_len) const override {
    if (input.size() != expected_len) {
      throw Error(Errc::kCorrupt, "identity stream length " +
                                      std::to_string(input.size()) +
                                      " != " + std::to_string(expected_len));
    }
    return Bytes(input.begin(), input.end());
  }
};

class LzssCodec final : public Codec {
 public:
  CodecId id() const override { return CodecId::kLzss; }
  std::string_view name() const override { return "lzss"; }
  int min_level() const override { return 1; }
  int max_level() const override { return 9; }
  int default_level() const override { return 3; }

  Bytes compress(ByteView input, int level) const override {
    return lzss_compress(input, level);
  }
  Bytes decompress(ByteView input, std::size_t expected_len) const override {
    return lzss_decompress(input, expected_len);
  }
};

const IdentityCodec kIdentityCodec;
const LzssCodec kLzssCodec;

}  // namespace

Bytes lzss_compress(ByteView input, int level) {
  if (level < 1 || level > 9) {
    throw Error(Errc::kInvalidArgument,
                "lzss level must be in 1..9, got " + std::to_string(level));
  }
  const int max_chain = 1 << (level - 1);
  const bool lazy = level >= 5;
  MatchFinder finder(input, max_chain);
  TokenWriter out(input.size() / 2 + 16);

  std::size_t pos = 0;
  const std::size_t n = input.size();
  while (pos < n) {
    Match m = finder.find(pos);
    if (m.length >= kMinMatch && lazy && pos + 1 < n) {
      finder.insert(pos);
      Match next = finder.find(pos + 1);
      if (next.length > m.length + 1) {
        out.literal(input[pos]);
        ++pos;
        continue;
      }
      out.match(m.distance, m.length);
      for (std::size_t i = 1; i < m.length; ++i) finder.insert(pos + i);
      pos += m.length;
      continue;
    }
    if (m.length >= kMinMatch) {
      out.match(m.distance, m.length);
      for (std::size_t i = 0; i < m.length; ++i) finder.insert(pos + i);
      pos += m.length;
    } else {
      out.literal(input[pos]);
      finder.insert(pos);
      ++pos;
    }
  }
  return out.finish();
}

Bytes lzss_decompress(ByteView input, std::size_t expected_len) {
  Bytes out;
  out.reserve(expected_len);
  std::size_t ip = 0;
  const std::size_t n = input.size();
  auto need = [&](std::size_t k) {
    if (n - ip < k) throw Error(Errc::kCorrupt, "lzss stream truncated");
  };
  while (ip < n) {
    std::uint8_t flags = input[ip++];
    for (int bit = 0; bit < 8 && ip < n; ++bit) {
      if ((flags & (1u << bit)) == 0) {
        if (out.size() >= expected_len) {
          throw Error(Errc::kCorrupt, "lzss output exceeds expected length");
        }
        out.push_back(input[ip++]);
        continue;
      }
      need(3);
      std::size_t distance = load_le<std::uint16_t>(input.data() + ip);
      ip += 2;
      std::size_t length = std::size_t{input[ip++]} + kMinMatch;
      if (length == 255 + kMinMatch) {
        std::size_t extra = 0;
        int shift = 0;
        while (true) {
          need(1);
          std::uint8_t byte = input[ip++];
          if (shift > 56) throw Error(Errc::kCorrupt, "lzss varint overflow");
          extra |= std::size_t{byte & 0x7fu} << shift;
          shift += 7;
          if ((byte & 0x80) == 0) break;
        }
        length += extra;
      }
      if (distance == 0 || distance > out.size()) {
        throw Error(Errc::kCorrupt, "lzss match distance out of range");
      }
      if (length > expected_len - out.size()) {
        throw Error(Errc::kCorrupt, "lzss output exceeds expected length");
      }
      std::size_t from = out.size() - distance;
      if (distance >= length) {
        out.insert(out.end(), out.begin() + from, out.begin() + from + length);
      } else {
        for (std::size_t i = 0; i < length; ++i) out.push_back(out[from + i]);
      }
    }
  }
  if (out.size() != expected_len) {
    throw Error(Errc::kCorrupt, "lzss decoded " + std::to_string(out.size()) +
                                    " bytes, expected " +
                                    std::to_string(expected_len));
  }
  return out;
}

const Codec& CodecRegistry::get(CodecId id) {
  switch (id) {
    case CodecId::kIdentity:
      return kIdentityCodec;
    case CodecId::kLzss:
      return kLzssCodec;
  }
  throw Error(Errc::kInvalidArgument,
              "unknown codec id " +
                  std::to_string(static_cast<std::uint32_t>(id)));
}

const Codec& CodecRegistry::get(std::uint32_t raw_id) {
  return get(static_cast<CodecId>(raw_id));
}

const Codec& CodecRegistry::by_name(std::string_view name) {
  if (name == kIdentityCodec.name() || name == "none") return kIdentityCodec;
  if (name == kLzssCodec.name()) return kLzssCodec;
  throw Error(Errc::kInvalidArgument,
              "unknown codec '" + std::string(name) + "'");
}

}  // namespace fanstore
