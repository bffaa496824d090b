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

#include <stdexcept>
#include <string>
#include <string_view>

namespace fanstore {

// Error categories shared by every layer. The POSIX facade maps them onto
// errno values; the wire protocol maps a subset onto ERR frame codes.
enum class Errc {
  kNotFound,
  kAlreadyExists,
  kIsDirectory,
  kNotDirectory,
  kBadDescriptor,
  kInvalidArgument,
  kCorrupt,
  kIo,
  kUnavailable,  // peer unreachable, timeout, connection reset (retriable)
  kNotOwner,
  kNotReady,
  kResourceExhausted,
  kProtocol,
};

std::string_view errc_name(Errc code);

// POSIX errno equivalent used by the client facade.
int errc_to_errno(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message),
        code_(code) {}

  Errc code() const noexcept { return code_; }
  bool retriable() const noexcept { return code_ == Errc::kUnavailable; }

 private:
  Errc code_;
};

// Raised by partition readers. Carries the index of the entry whose header or
// data region failed validation.
class CorruptionError : public Error {
 public:
  CorruptionError(std::size_t entry_index, const std::string& message)
      : Error(Errc::kCorrupt, "entry " + std::to_string(entry_index) + ": " +
                                  message),
        entry_index_(entry_index) {}

  std::size_t entry_index() const noexcept { return entry_index_; }

 private:
  std::size_t entry_index_;
};

}  // namespace fanstore
