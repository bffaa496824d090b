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

#include "fanstore/wire.h"

#include <limits>

namespace fanstore::wire {

bool is_known_opcode(std::uint8_t op) {
  return op <= static_cast<std::uint8_t>(Opcode::kErr);
}

Bytes encode_frame(const Frame& f) {
  if (f.path.size() > std::numeric_limits<std::uint16_t>::max()) {
    throw Error(Errc::kInvalidArgument, "frame path too long");
  }
  if (f.payload.size() > std::numeric_limits<std::uint32_t>::max()) {
    throw Error(Errc::kInvalidArgument, "frame payload too large");
  }
  Bytes out;
  out.reserve(encoded_size(f));
  out.insert(out.end(), kMagic, kMagic + 4);
  out.push_back(kVersion);
  out.push_back(static_cast<std::uint8_t>(f.opcode));
  append_le(out, f.request_id);
  append_le(out, static_cast<std::uint16_t>(f.path.size()));
  append(out, as_bytes(f.path));
  append_le(out, static_cast<std::uint32_t>(f.payload.size()));
  append(out, f.payload);
  return out;
}

FrameHeader decode_fixed_header(const std::uint8_t* in) {
  FrameHeader h;
  h.magic_ok = std::memcmp(in, kMagic, 4) == 0;
  h.version = in[4];
  h.opcode = in[5];
  h.request_id = load_le<std::uint64_t>(in + 6);
  h.path_len = load_le<std::uint16_t>(in + 14);
  return h;
}

std::optional<Frame> decode_frame(ByteView buf, std::size_t* consumed,
                                  std::uint32_t max_frame) {
  if (buf.size() < kFixedHeaderSize) return std::nullopt;
  FrameHeader h = decode_fixed_header(buf.data());
  if (!h.magic_ok) throw Error(Errc::kProtocol, "bad frame magic");
  if (h.version != kVersion) {
    throw Error(Errc::kProtocol,
                "unsupported frame version " + std::to_string(h.version));
  }
  if (!is_known_opcode(h.opcode)) {
    throw Error(Errc::kProtocol, "unknown opcode " + std::to_string(h.opcode));
  }
  std::size_t len_at = kFixedHeaderSize + h.path_len;
  if (buf.size() < len_at + 4) return std::nullopt;
  std::uint32_t payload_len = load_le<std::uint32_t>(buf.data() + len_at);
  std::uint64_t total = std::uint64_t{len_at} + 4 + payload_len;
  if (total > max_frame) {
    throw Error(Errc::kProtocol, "frame of " + std::to_string(total) +
                                     " bytes exceeds limit");
  }
  if (buf.size() < total) return std::nullopt;
  Frame f;
  f.opcode = static_cast<Opcode>(h.opcode);
  f.request_id = h.request_id;
  f.path.assign(reinterpret_cast<const char*>(buf.data()) + kFixedHeaderSize,
                h.path_len);
  f.payload.assign(buf.begin() + len_at + 4, buf.begin() + total);
  if (consumed != nullptr) *consumed = static_cast<std::size_t>(total);
  return f;
}

Bytes encode_error(ErrCode code, std::string_view message) {
  Bytes out;
  append_le(out, static_cast<std::uint32_t>(code));
  append(out, as_bytes(message));
  return out;
}

std::pair<ErrCode, std::string> decode_error(ByteView payload) {
  if (payload.size() < 4) {
    throw Error(Errc::kProtocol, "ERR payload shorter than its code");
  }
  return {static_cast<ErrCode>(load_le<std::uint32_t>(payload.data())),
          to_string(payload.subspan(4))};
}

Frame error_frame(std::uint64_t request_id, ErrCode code,
                  std::string_view message) {
  return Frame{Opcode::kErr, request_id, {}, encode_error(code, message)};
}

ErrCode errc_to_wire(Errc code) {
  switch (code) {
    case Errc::kNotFound: return ErrCode::kNotFound;
    case Errc::kAlreadyExists: return ErrCode::kAlreadyExists;
    case Errc::kNotOwner: return ErrCode::kNotOwner;
    case Errc::kNotReady: return ErrCode::kNotReady;
    case Errc::kResourceExhausted: return ErrCode::kTooLarge;
    case Errc::kProtocol: return ErrCode::kMalformed;
    default: return ErrCode::kInternal;
  }
}

Errc wire_to_errc(ErrCode code) {
  switch (code) {
    case ErrCode::kNotFound: return Errc::kNotFound;
    case ErrCode::kAlreadyExists: return Errc::kAlreadyExists;
    case ErrCode::kNotOwner: return Errc::kNotOwner;
    case ErrCode::kNotReady: return Errc::kNotReady;
    case ErrCode::kTooLarge: return Errc::kResourceExhausted;
    case ErrCode::kInternal: return Errc::kIo;
    default: return Errc::kProtocol;
  }
}

Bytes encode_fetch_payload(const FileMeta& meta, ByteView stored) {
  Bytes out;
  out.reserve(FileMeta::kEncodedSize + 8 + stored.size());
  append_meta(out, meta);
  append_le<std::uint64_t>(out, stored.size());
  append(out, stored);
  return out;
}

FetchResult decode_fetch_payload(ByteView payload) {
  constexpr std::size_t kHead = FileMeta::kEncodedSize + 8;
  if (payload.size() < kHead) {
    throw Error(Errc::kProtocol, "FETCH_OK payload too short");
  }
  FetchResult r;
  r.meta = decode_meta(payload.data());
  std::uint64_t stored = load_le<std::uint64_t>(payload.data() + FileMeta::kEncodedSize);
  if (payload.size() - kHead != stored) {
    throw Error(Errc::kProtocol, "FETCH_OK stored length mismatch");
  }
  r.stored.assign(payload.begin() + kHead, payload.end());
  r.compressed = stored != r.meta.size_bytes;
  return r;
}

Bytes encode_output_record(const OutputRecord& record) {
  Bytes out;
  out.reserve(kOutputRecordSize);
  append_meta(out, record.meta);
  append_le(out, record.writer);
  return out;
}

OutputRecord decode_output_record(ByteView payload) {
  if (payload.size() != kOutputRecordSize) {
    throw Error(Errc::kProtocol, "output record must be " +
                                     std::to_string(kOutputRecordSize) +
                                     " bytes");
  }
  return OutputRecord{decode_meta(payload.data()),
                      load_le<NodeId>(payload.data() + FileMeta::kEncodedSize)};
}

}  // namespace fanstore::wire
