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

#include "fanstore/transport.h"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "fanstore/error.h"

namespace fanstore {
namespace {

using wire::Frame;
using wire::Opcode;

// Reads exactly n bytes; false on orderly EOF before the first byte.
bool recv_exact(int fd, std::uint8_t* out, std::size_t n) {
  std::size_t got = 0;
  while (got < n) {
    ssize_t r = ::recv(fd, out + got, n - got, 0);
    if (r < 0) {
      if (errno == EINTR) continue;
      throw Error(Errc::kUnavailable, std::string("recv: ") + std::strerror(errno));
    }
    if (r == 0) {
      if (got == 0) return false;
      throw Error(Errc::kUnavailable, "connection closed mid-frame");
    }
    got += static_cast<std::size_t>(r);
  }
  return true;
}

void send_all(int fd, ByteView data) {
  std::size_t done = 0;
  while (done < data.size()) {
    ssize_t r = ::send(fd, data.data() + done, data.size() - done, MSG_NOSIGNAL);
    if (r < 0) {
      if (errno == EINTR) continue;
      throw Error(Errc::kUnavailable, std::string("send: ") + std::strerror(errno));
    }
    done += static_cast<std::size_t>(r);
  }
}

// A frame read off a stream. When the fixed header parsed but the content is
// invalid, `error` is set and the stream stays aligned on the next frame.
struct StreamFrame {
  Frame frame;
  std::size_t wire_bytes = 0;
  std::optional<std::pair<wire::ErrCode, std::string>> error;
  bool fatal = false;  // stream cannot be resynchronized
};

std::optional<StreamFrame> read_stream_frame(int fd, std::uint32_t max_frame) {
  std::uint8_t fixed[wire::kFixedHeaderSize];
  if (!recv_exact(fd, fixed, sizeof fixed)) return std::nullopt;
  wire::FrameHeader h = wire::decode_fixed_header(fixed);
  StreamFrame out;
  out.frame.request_id = h.request_id;
  out.frame.path.resize(h.path_len);
  if (h.path_len > 0 &&
      !recv_exact(fd, reinterpret_cast<std::uint8_t*>(out.frame.path.data()),
                  h.path_len)) {
    throw Error(Errc::kUnavailable, "connection closed mid-frame");
  }
  std::uint8_t len_field[4];
  if (!recv_exact(fd, len_field, 4)) {
    throw Error(Errc::kUnavailable, "connection closed mid-frame");
  }
  std::uint32_t payload_len = load_le<std::uint32_t>(len_field);
  std::uint64_t total = wire::kFrameOverhead + std::uint64_t{h.path_len} + payload_len;
  out.wire_bytes = static_cast<std::size_t>(total);
  if (total > max_frame) {
    out.error = {wire::ErrCode::kTooLarge,
                 "frame of " + std::to_string(total) + " bytes exceeds limit"};
    out.fatal = true;
    return out;
  }
  out.frame.payload.resize(payload_len);
  if (payload_len > 0 && !recv_exact(fd, out.frame.payload.data(), payload_len)) {
    throw Error(Errc::kUnavailable, "connection closed mid-frame");
  }
  if (!h.magic_ok) {
    out.error = {wire::ErrCode::kMalformed, "bad frame magic"};
  } else if (h.version != wire::kVersion) {
    out.error = {wire::ErrCode::kMalformed,
                 "unsupported frame version " + std::to_string(h.version)};
  } else if (!wire::is_known_opcode(h.opcode)) {
    out.error = {wire::ErrCode::kUnsupported,
                 "unknown opcode " + std::to_string(h.opcode)};
  } else {
    out.frame.opcode = static_cast<Opcode>(h.opcode);
  }
  return out;
}

void set_nodelay(int fd) {
  int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
}

sockaddr_in resolve_ipv4(const std::string& host, std::uint16_t port) {
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) == 1) return addr;
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (::getaddrinfo(host.c_str(), nullptr, &hints, &res) != 0 || res == nullptr) {
    throw Error(Errc::kUnavailable, "cannot resolve host " + host);
  }
  addr.sin_addr = reinterpret_cast<sockaddr_in*>(res->ai_addr)->sin_addr;
  ::freeaddrinfo(res);
  return addr;
}

}  // namespace

UniqueFd listen_tcp(const std::string& host, std::uint16_t port, int backlog) {
  UniqueFd fd(::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0));
  if (!fd.valid()) throw Error(Errc::kIo, std::string("socket: ") + std::strerror(errno));
  int one = 1;
  ::setsockopt(fd.get(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr = resolve_ipv4(host, port);
  if (::bind(fd.get(), reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
    throw Error(Errc::kIo, "bind " + host + ":" + std::to_string(port) + ": " +
                               std::strerror(errno));
  }
  if (::listen(fd.get(), backlog) != 0) {
    throw Error(Errc::kIo, std::string("listen: ") + std::strerror(errno));
  }
  return fd;
}

std::uint16_t local_port(int fd) {
  sockaddr_in addr{};
  socklen_t len = sizeof addr;
  if (::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len) != 0) {
    throw Error(Errc::kIo, std::string("getsockname: ") + std::strerror(errno));
  }
  return ntohs(addr.sin_port);
}

void throw_if_error(const Frame& response) {
  if (response.opcode != Opcode::kErr) return;
  auto [code, message] = wire::decode_error(response.payload);
  throw Error(wire::wire_to_errc(code), message);
}

// ---------------------------------------------------------------------------
// Server

struct Server::Connection {
  UniqueFd fd;
  std::mutex write_mu;
  std::atomic<bool> closed{false};
};

Server::Server(ServerOptions options, FrameHandler handler)
    : options_(std::move(options)), handler_(std::move(handler)) {
  if (options_.listen_fd >= 0) {
    listen_fd_ = UniqueFd(options_.listen_fd);
  } else {
    listen_fd_ = listen_tcp(options_.host, options_.port);
  }
  port_ = local_port(listen_fd_.get());
  std::size_t n = std::max<std::size_t>(1, options_.worker_threads);
  for (std::size_t i = 0; i < n; ++i) workers_.emplace_back([this] { worker_loop(); });
  acceptor_ = std::thread([this] { accept_loop(); });
}

Server::~Server() { stop(); }

void Server::stop() {
  if (stopping_.exchange(true)) return;
  ::shutdown(listen_fd_.get(), SHUT_RDWR);
  if (acceptor_.joinable()) acceptor_.join();
  {
    std::lock_guard lock(conns_mu_);
    for (auto& c : conns_) ::shutdown(c->fd.get(), SHUT_RDWR);
  }
  for (auto& t : readers_) {
    if (t.joinable()) t.join();
  }
  {
    std::lock_guard lock(queue_mu_);
  }
  queue_cv_.notify_all();
  for (auto& t : workers_) {
    if (t.joinable()) t.join();
  }
  listen_fd_.reset();
}

void Server::accept_loop() {
  while (!stopping_.load()) {
    int fd = ::accept4(listen_fd_.get(), nullptr, nullptr, SOCK_CLOEXEC);
    if (fd < 0) {
      if (errno == EINTR || errno == ECONNABORTED) continue;
      if (stopping_.load()) break;
      if (errno == EMFILE || errno == ENFILE) {
        std::this_thread::sleep_for(std::chrono::milliseconds(10));
        continue;
      }
      break;
    }
    set_nodelay(fd);
    auto conn = std::make_shared<Connection>();
    conn->fd = UniqueFd(fd);
    std::lock_guard lock(conns_mu_);
    if (stopping_.load()) break;
    conns_.push_back(conn);
    readers_.emplace_back([this, conn] { read_loop(conn); });
  }
}

void Server::read_loop(std::shared_ptr<Connection> conn) {
  try {
    while (!stopping_.load()) {
      auto sf = read_stream_frame(conn->fd.get(), options_.max_frame);
      if (!sf) break;
      counters_.frames_received.fetch_add(1);
      counters_.bytes_received.fetch_add(sf->wire_bytes);
      if (sf->error) {
        respond(*conn, wire::error_frame(sf->frame.request_id, sf->error->first,
                                         sf->error->second));
        if (sf->fatal) break;
        continue;
      }
      auto request = std::make_shared<Frame>(std::move(sf->frame));
      submit([this, conn, request] {
        Frame response;
        try {
          response = handler_(*request);
        } catch (const Error& e) {
          response = wire::error_frame(request->request_id,
                                       wire::errc_to_wire(e.code()), e.what());
        } catch (const std::exception& e) {
          response = wire::error_frame(request->request_id,
                                       wire::ErrCode::kInternal, e.what());
        }
        response.request_id = request->request_id;
        respond(*conn, response);
      });
    }
  } catch (const Error&) {
    // Peer went away mid-frame; nothing to answer.
  }
  conn->closed.store(true);
  ::shutdown(conn->fd.get(), SHUT_RDWR);
}

void Server::respond(Connection& conn, const Frame& response) {
  Bytes bytes = wire::encode_frame(response);
  std::lock_guard lock(conn.write_mu);
  if (conn.closed.load()) return;
  try {
    send_all(conn.fd.get(), bytes);
    counters_.frames_sent.fetch_add(1);
    counters_.bytes_sent.fetch_add(bytes.size());
  } catch (const Error&) {
    conn.closed.store(true);
  }
}

void Server::submit(std::function<void()> task) {
  {
    std::lock_guard lock(queue_mu_);
    queue_.push_back(std::move(task));
  }
  queue_cv_.notify_one();
}

void Server::worker_loop() {
  while (true) {
    std::function<void()> task;
    {
      std::unique_lock lock(queue_mu_);
      queue_cv_.wait(lock, [this] { return stopping_.load() || !queue_.empty(); });
      if (queue_.empty()) return;
      task = std::move(queue_.front());
      queue_.pop_front();
    }
    task();
  }
}

// ---------------------------------------------------------------------------
// ClientConnection

std::shared_ptr<ClientConnection> ClientConnection::connect(
    const Endpoint& endpoint, std::chrono::milliseconds connect_timeout,
    std::uint32_t max_frame, TransportCounters* counters) {
  sockaddr_in addr = resolve_ipv4(endpoint.host, endpoint.port);
  auto deadline = std::chrono::steady_clock::now() + connect_timeout;
  int last_errno = 0;
  while (true) {
    UniqueFd fd(::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0));
    if (!fd.valid()) {
      throw Error(Errc::kIo, std::string("socket: ") + std::strerror(errno));
    }
    if (::connect(fd.get(), reinterpret_cast<sockaddr*>(&addr), sizeof addr) == 0) {
      set_nodelay(fd.get());
      return std::shared_ptr<ClientConnection>(
          new ClientConnection(std::move(fd), max_frame, counters));
    }
    last_errno = errno;
    if (last_errno != ECONNREFUSED && last_errno != EINTR && last_errno != EAGAIN) {
      break;
    }
    if (std::chrono::steady_clock::now() >= deadline) break;
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }
  throw Error(Errc::kUnavailable, "connect " + endpoint.host + ":" +
                                      std::to_string(endpoint.port) + ": " +
                                      std::strerror(last_errno));
}

ClientConnection::ClientConnection(UniqueFd fd, std::uint32_t max_frame,
                                   TransportCounters* counters)
    : fd_(std::move(fd)), max_frame_(max_frame), counters_(counters) {
  reader_ = std::thread([this] { read_loop(); });
}

ClientConnection::~ClientConnection() {
  broken_.store(true);
  ::shutdown(fd_.get(), SHUT_RDWR);
  if (reader_.joinable()) reader_.join();
  fail_all("connection closed");
}

void ClientConnection::fail_all(const std::string& why) {
  std::unordered_map<std::uint64_t, std::promise<Frame>> pending;
  {
    std::lock_guard lock(pending_mu_);
    pending.swap(pending_);
  }
  for (auto& [id, promise] : pending) {
    promise.set_exception(std::make_exception_ptr(Error(Errc::kUnavailable, why)));
  }
}

void ClientConnection::read_loop() {
  std::string why = "connection closed by peer";
  try {
    while (true) {
      auto sf = read_stream_frame(fd_.get(), max_frame_);
      if (!sf) break;
      if (sf->fatal) {
        why = "oversized response frame";
        break;
      }
      if (counters_ != nullptr) {
        counters_->frames_received.fetch_add(1);
        counters_->bytes_received.fetch_add(sf->wire_bytes);
      }
      if (sf->error) {
        sf->frame.opcode = Opcode::kErr;
        sf->frame.payload = wire::encode_error(sf->error->first, sf->error->second);
      }
      std::promise<Frame> promise;
      {
        std::lock_guard lock(pending_mu_);
        auto it = pending_.find(sf->frame.request_id);
        if (it == pending_.end()) continue;  // caller timed out
        promise = std::move(it->second);
        pending_.erase(it);
      }
      promise.set_value(std::move(sf->frame));
    }
  } catch (const Error& e) {
    why = e.what();
  }
  broken_.store(true);
  fail_all(why);
}

Frame ClientConnection::call(Frame request, std::chrono::milliseconds timeout) {
  if (broken_.load()) throw Error(Errc::kUnavailable, "connection is broken");
  request.request_id = next_id_.fetch_add(1);
  std::future<Frame> response;
  {
    std::lock_guard lock(pending_mu_);
    response = pending_[request.request_id].get_future();
  }
  Bytes bytes = wire::encode_frame(request);
  try {
    std::lock_guard lock(write_mu_);
    send_all(fd_.get(), bytes);
  } catch (const Error&) {
    broken_.store(true);
    std::lock_guard lock(pending_mu_);
    pending_.erase(request.request_id);
    throw;
  }
  if (counters_ != nullptr) {
    counters_->frames_sent.fetch_add(1);
    counters_->bytes_sent.fetch_add(bytes.size());
  }
  if (response.wait_for(timeout) != std::future_status::ready) {
    std::lock_guard lock(pending_mu_);
    if (pending_.erase(request.request_id) != 0) {
      throw Error(Errc::kUnavailable, "request timed out after " +
                                          std::to_string(timeout.count()) + " ms");
    }
  }
  Frame out = response.get();
  if (out.request_id != request.request_id) {
    throw Error(Errc::kProtocol, "response id mismatch");
  }
  return out;
}

// ---------------------------------------------------------------------------
// PeerPool

PeerPool::PeerPool(std::vector<Endpoint> endpoints, PeerPoolOptions options)
    : endpoints_(std::move(endpoints)), options_(options) {
  for (std::size_t i = 0; i < endpoints_.size(); ++i) {
    slots_.push_back(std::make_unique<Slot>());
  }
}

std::shared_ptr<ClientConnection> PeerPool::connection(NodeId peer) {
  if (peer >= slots_.size()) {
    throw Error(Errc::kInvalidArgument, "unknown node " + std::to_string(peer));
  }
  Slot& slot = *slots_[peer];
  std::lock_guard lock(slot.mu);
  if (!slot.conn || slot.conn->broken()) {
    slot.conn = ClientConnection::connect(endpoints_[peer], options_.connect_timeout,
                                          options_.max_frame, &counters_);
  }
  return slot.conn;
}

Frame PeerPool::call(NodeId peer, Frame request) {
  auto conn = connection(peer);
  try {
    return conn->call(request, options_.call_timeout);
  } catch (const Error& e) {
    // A connection that broke before this request was sent is stale (the
    // peer restarted or idled us out); one fresh attempt is safe because the
    // request never reached the peer.
    if (e.code() == Errc::kUnavailable && conn->broken() &&
        std::string_view(e.what()).find("connection is broken") !=
            std::string_view::npos) {
      return connection(peer)->call(std::move(request), options_.call_timeout);
    }
    throw;
  }
}

FetchResult PeerPool::fetch(NodeId peer, std::string_view path) {
  counters_.fetch_calls.fetch_add(1);
  Frame response = call(peer, Frame{Opcode::kFetchFile, 0, std::string(path), {}});
  throw_if_error(response);
  if (response.opcode != Opcode::kFetchOk) {
    throw Error(Errc::kProtocol, "unexpected response to FETCH_FILE");
  }
  return wire::decode_fetch_payload(response.payload);
}

std::optional<OutputRecord> PeerPool::stat_output(NodeId peer,
                                                  std::string_view path) {
  counters_.stat_calls.fetch_add(1);
  Frame response = call(peer, Frame{Opcode::kStatOutput, 0, std::string(path), {}});
  throw_if_error(response);
  if (response.opcode != Opcode::kStatOk) {
    throw Error(Errc::kProtocol, "unexpected response to STAT_OUTPUT");
  }
  if (response.payload.empty()) return std::nullopt;
  return wire::decode_output_record(response.payload);
}

void PeerPool::commit_output(NodeId peer, std::string_view path,
                             const OutputRecord& record) {
  counters_.commit_calls.fetch_add(1);
  Frame response = call(peer, Frame{Opcode::kCommitMeta, 0, std::string(path),
                                    wire::encode_output_record(record)});
  throw_if_error(response);
  if (response.opcode != Opcode::kCommitOk) {
    throw Error(Errc::kProtocol, "unexpected response to COMMIT_META");
  }
}

bool PeerPool::ping(NodeId peer) {
  counters_.ping_calls.fetch_add(1);
  try {
    Frame response = call(peer, Frame{Opcode::kPing, 0, {}, {}});
    return response.opcode == Opcode::kPing;
  } catch (const Error& e) {
    if (e.code() == Errc::kUnavailable) return false;
    throw;
  }
}

void PeerPool::close_all() {
  for (auto& slot : slots_) {
    std::lock_guard lock(slot->mu);
    slot->conn.reset();
  }
}

}  // namespace fanstore
