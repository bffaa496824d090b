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
#include <optional>
#include <string>
#include <string_view>

#include "fanstore/bytes.h"
#include "fanstore/error.h"
#include "fanstore/output_meta.h"
#include "fanstore/peer_link.h"

namespace fanstore::wire {

// Frame layout, little-endian:
//
//   0   4  magic "FANS"
//   4   1  version (1)
//   5   1  opcode
//   6   8  request id (responses echo it)
//  14   2  path length
//  16   .  path bytes
//   .   4  payload length
//   .   .  payload bytes
inline constexpr char kMagic[4] = {'F', 'A', 'N', 'S'};
inline constexpr std::uint8_t kVersion = 1;
inline constexpr std::size_t kFixedHeaderSize = 16;
inline constexpr std::size_t kFrameOverhead = kFixedHeaderSize + 4;
inline constexpr std::uint32_t kDefaultMaxFrame = 256u << 20;

enum class Opcode : std::uint8_t {
  kPing = 0,  // readiness probe; answered with kPing + "ready" or ERR 6
  kFetchFile = 1,
  kFetchOk = 2,
  kStatOutput = 3,
  kStatOk = 4,
  kCommitMeta = 5,
  kCommitOk = 6,
  kErr = 7,
};

// Numeric codes carried in ERR payloads: u32 code followed by a UTF-8
// message.
enum class ErrCode : std::uint32_t {
  kMalformed = 1,
  kNotFound = 2,
  kAlreadyExists = 3,
  kInternal = 4,
  kNotOwner = 5,
  kNotReady = 6,
  kTooLarge = 7,
  kUnsupported = 8,
};

struct Frame {
  Opcode opcode = Opcode::kPing;
  std::uint64_t request_id = 0;
  std::string path;
  Bytes payload;

  friend bool operator==(const Frame&, const Frame&) = default;
};

inline std::size_t encoded_size(const Frame& f) {
  return kFrameOverhead + f.path.size() + f.payload.size();
}

// Throws Error(kInvalidArgument) when the path exceeds 65535 bytes or the
// payload exceeds 4 GiB - 1.
Bytes encode_frame(const Frame& frame);

struct FrameHeader {
  bool magic_ok = false;
  std::uint8_t version = 0;
  std::uint8_t opcode = 0;
  std::uint64_t request_id = 0;
  std::uint16_t path_len = 0;
};

FrameHeader decode_fixed_header(const std::uint8_t* in);

// Decodes one complete frame from the front of buf. Returns nullopt when buf
// holds only a prefix of a frame. Throws Error(kProtocol) on a bad magic,
// version or opcode and when the frame would exceed max_frame.
std::optional<Frame> decode_frame(ByteView buf, std::size_t* consumed,
                                  std::uint32_t max_frame = kDefaultMaxFrame);

bool is_known_opcode(std::uint8_t op);

// Payload codecs.
Bytes encode_error(ErrCode code, std::string_view message);
std::pair<ErrCode, std::string> decode_error(ByteView payload);
Frame error_frame(std::uint64_t request_id, ErrCode code,
                  std::string_view message);
ErrCode errc_to_wire(Errc code);
Errc wire_to_errc(ErrCode code);

// FETCH_OK: 144-byte meta, u64 stored length, stored bytes. The data is
// compressed exactly when the stored length is below meta.size_bytes.
Bytes encode_fetch_payload(const FileMeta& meta, ByteView stored);
FetchResult decode_fetch_payload(ByteView payload);

// STAT_OK and COMMIT_META: 144-byte meta then the u32 writer node id.
// STAT_OK with an empty payload means "no such output".
inline constexpr std::size_t kOutputRecordSize = FileMeta::kEncodedSize + 4;
Bytes encode_output_record(const OutputRecord& record);
OutputRecord decode_output_record(ByteView payload);

}  // namespace fanstore::wire
