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

#include "fanstore/error.h"

#include <cerrno>

namespace fanstore {

std::string_view errc_name(Errc code) {
  switch (code) {
    case Errc::kNotFound: return "not found";
    case Errc::kAlreadyExists: return "already exists";
    case Errc::kIsDirectory: return "is a directory";
    case Errc::kNotDirectory: return "not a directory";
    case Errc::kBadDescriptor: return "bad descriptor";
    case Errc::kInvalidArgument: return "invalid argument";
    case Errc::kCorrupt: return "corrupt data";
    case Errc::kIo: return "i/o error";
    case Errc::kUnavailable: return "unavailable";
    case Errc::kNotOwner: return "not owner";
    case Errc::kNotReady: return "not ready";
    case Errc::kResourceExhausted: return "resource exhausted";
    case Errc::kProtocol: return "protocol error";
  }
  return "unknown";
}

int errc_to_errno(Errc code) {
  switch (code) {
    case Errc::kNotFound: return ENOENT;
    case Errc::kAlreadyExists: return EEXIST;
    case Errc::kIsDirectory: return EISDIR;
    case Errc::kNotDirectory: return ENOTDIR;
    case Errc::kBadDescriptor: return EBADF;
    case Errc::kInvalidArgument: return EINVAL;
    case Errc::kCorrupt: return EIO;
    case Errc::kIo: return EIO;
    case Errc::kUnavailable: return EHOSTUNREACH;
    case Errc::kNotOwner: return EREMOTE;
    case Errc::kNotReady: return EAGAIN;
    case Errc::kResourceExhausted: return ENOMEM;
    case Errc::kProtocol: return EPROTO;
  }
  return EIO;
}

}  // namespace fanstore
