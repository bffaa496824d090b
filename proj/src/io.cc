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

#include "fanstore/io.h"

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "fanstore/error.h"
#include "fanstore/hash.h"

namespace fanstore {
namespace {

[[noreturn]] void throw_errno(const std::string& what, int err) {
  Errc code = err == ENOENT ? Errc::kNotFound : Errc::kIo;
  throw Error(code, what + ": " + std::strerror(err));
}

}  // namespace

std::string hex64(std::uint64_t v) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = kDigits[v & 0xf];
    v >>= 4;
  }
  return out;
}

void UniqueFd::reset(int fd) {
  if (fd_ >= 0) ::close(fd_);
  fd_ = fd;
}

UniqueFd open_file(const std::filesystem::path& path, int flags, int mode) {
  int fd = ::open(path.c_str(), flags | O_CLOEXEC, mode);
  if (fd < 0) throw_errno("open " + path.string(), errno);
  return UniqueFd(fd);
}

Bytes read_file(const std::filesystem::path& path) {
  UniqueFd fd = open_file(path, O_RDONLY);
  struct stat st;
  if (::fstat(fd.get(), &st) != 0) throw_errno("stat " + path.string(), errno);
  Bytes out(static_cast<std::size_t>(st.st_size));
  std::size_t got = 0;
  while (got < out.size()) {
    ssize_t n = ::read(fd.get(), out.data() + got, out.size() - got);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw_errno("read " + path.string(), errno);
    }
    if (n == 0) break;
    got += static_cast<std::size_t>(n);
  }
  out.resize(got);
  return out;
}

std::string read_text_file(const std::filesystem::path& path) {
  return to_string(read_file(path));
}

void write_all(int fd, ByteView data) {
  std::size_t done = 0;
  while (done < data.size()) {
    ssize_t n = ::write(fd, data.data() + done, data.size() - done);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw_errno("write", errno);
    }
    done += static_cast<std::size_t>(n);
  }
}

void write_file_atomic(const std::filesystem::path& path, ByteView data) {
  auto tmp = path;
  tmp += ".tmp";
  {
    UniqueFd fd = open_file(tmp, O_WRONLY | O_CREAT | O_TRUNC);
    write_all(fd.get(), data);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(Errc::kIo, "rename " + path.string() + ": " + ec.message());
}

Bytes pread_exact(int fd, std::uint64_t offset, std::size_t length) {
  Bytes out(length);
  std::size_t got = 0;
  while (got < length) {
    ssize_t n = ::pread(fd, out.data() + got, length - got,
                        static_cast<off_t>(offset + got));
    if (n < 0) {
      if (errno == EINTR) continue;
      throw_errno("pread", errno);
    }
    if (n == 0) {
      throw Error(Errc::kCorrupt, "short read at offset " +
                                      std::to_string(offset + got));
    }
    got += static_cast<std::size_t>(n);
  }
  return out;
}

void pwrite_all(int fd, std::uint64_t offset, ByteView data) {
  std::size_t done = 0;
  while (done < data.size()) {
    ssize_t n = ::pwrite(fd, data.data() + done, data.size() - done,
                         static_cast<off_t>(offset + done));
    if (n < 0) {
      if (errno == EINTR) continue;
      throw_errno("pwrite", errno);
    }
    done += static_cast<std::size_t>(n);
  }
}

std::uint64_t file_digest(const std::filesystem::path& path) {
  UniqueFd fd = open_file(path, O_RDONLY);
  Fnv1a64 h;
  Bytes buf(1 << 20);
  while (true) {
    ssize_t n = ::read(fd.get(), buf.data(), buf.size());
    if (n < 0) {
      if (errno == EINTR) continue;
      throw_errno("read " + path.string(), errno);
    }
    if (n == 0) break;
    h.update(ByteView(buf.data(), static_cast<std::size_t>(n)));
  }
  return h.digest();
}

}  // namespace fanstore
