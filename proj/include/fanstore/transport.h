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

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <future>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "fanstore/io.h"
#include "fanstore/peer_link.h"
#include "fanstore/wire.h"

namespace fanstore {

struct Endpoint {
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;
};

struct TransportCounters {
  std::atomic<std::uint64_t> frames_sent{0};
  std::atomic<std::uint64_t> frames_received{0};
  std::atomic<std::uint64_t> bytes_sent{0};
  std::atomic<std::uint64_t> bytes_received{0};
  std::atomic<std::uint64_t> fetch_calls{0};
  std::atomic<std::uint64_t> stat_calls{0};
  std::atomic<std::uint64_t> commit_calls{0};
  std::atomic<std::uint64_t> ping_calls{0};

  // Fetch, stat and commit round trips; readiness probes excluded.
  std::uint64_t data_calls() const {
    return fetch_calls.load() + stat_calls.load() + commit_calls.load();
  }
};

// Bound, listening IPv4 socket. Port 0 picks an ephemeral port.
UniqueFd listen_tcp(const std::string& host, std::uint16_t port,
                    int backlog = 128);
std::uint16_t local_port(int fd);

// Handlers run on server worker threads and may be invoked concurrently.
// Exceptions of type Error become ERR frames with the mapped code.
using FrameHandler = std::function<wire::Frame(const wire::Frame&)>;

struct ServerOptions {
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;
  // Already listening socket to adopt instead of binding host:port.
  int listen_fd = -1;
  std::size_t worker_threads = 4;
  std::uint32_t max_frame = wire::kDefaultMaxFrame;
};

// Accepts connections and dispatches each request frame to the handler on a
// worker pool. Responses on one connection may complete out of order.
class Server {
 public:
  Server(ServerOptions options, FrameHandler handler);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  void stop();
  std::uint16_t port() const { return port_; }
  const TransportCounters& counters() const { return counters_; }

 private:
  struct Connection;

  void accept_loop();
  void read_loop(std::shared_ptr<Connection> conn);
  void respond(Connection& conn, const wire::Frame& response);
  void worker_loop();
  void submit(std::function<void()> task);

  ServerOptions options_;
  FrameHandler handler_;
  UniqueFd listen_fd_;
  std::uint16_t port_ = 0;
  std::atomic<bool> stopping_{false};
  TransportCounters counters_;

  std::mutex conns_mu_;
  std::vector<std::shared_ptr<Connection>> conns_;
  std::vector<std::thread> readers_;

  std::mutex queue_mu_;
  std::condition_variable queue_cv_;
  std::deque<std::function<void()>> queue_;
  std::vector<std::thread> workers_;
  std::thread acceptor_;
};

// One multiplexed client connection. Many threads may call concurrently;
// responses are matched to callers by request id.
class ClientConnection {
 public:
  // Retries refused connections until connect_timeout elapses, then throws
  // Error(kUnavailable).
  static std::shared_ptr<ClientConnection> connect(
      const Endpoint& endpoint, std::chrono::milliseconds connect_timeout,
      std::uint32_t max_frame, TransportCounters* counters);

  ~ClientConnection();
  ClientConnection(const ClientConnection&) = delete;
  ClientConnection& operator=(const ClientConnection&) = delete;

  // Sends request with a fresh request id and blocks for the matching
  // response. Throws Error(kUnavailable) on timeout or a broken connection.
  wire::Frame call(wire::Frame request, std::chrono::milliseconds timeout);

  bool broken() const { return broken_.load(); }

 private:
  ClientConnection(UniqueFd fd, std::uint32_t max_frame,
                   TransportCounters* counters);
  void read_loop();
  void fail_all(const std::string& why);

  UniqueFd fd_;
  std::uint32_t max_frame_;
  TransportCounters* counters_;
  std::atomic<bool> broken_{false};
  std::atomic<std::uint64_t> next_id_{1};
  std::mutex write_mu_;
  std::mutex pending_mu_;
  std::unordered_map<std::uint64_t, std::promise<wire::Frame>> pending_;
  std::thread reader_;
};

struct PeerPoolOptions {
  std::chrono::milliseconds call_timeout{30'000};
  std::chrono::milliseconds connect_timeout{10'000};
  std::uint32_t max_frame = wire::kDefaultMaxFrame;
};

// Lazily connected, reconnecting client connections to every peer.
class PeerPool final : public PeerLink {
 public:
  PeerPool(std::vector<Endpoint> endpoints, PeerPoolOptions options = {});

  FetchResult fetch(NodeId peer, std::string_view path) override;
  std::optional<OutputRecord> stat_output(NodeId peer,
                                          std::string_view path) override;
  void commit_output(NodeId peer, std::string_view path,
                     const OutputRecord& record) override;

  // True when the peer answers the readiness probe with "ready".
  bool ping(NodeId peer);

  // Raw round trip. ERR responses are returned, not thrown.
  wire::Frame call(NodeId peer, wire::Frame request);

  const TransportCounters& counters() const { return counters_; }
  std::size_t size() const { return endpoints_.size(); }
  void close_all();

 private:
  std::shared_ptr<ClientConnection> connection(NodeId peer);

  struct Slot {
    std::mutex mu;
    std::shared_ptr<ClientConnection> conn;
  };

  std::vector<Endpoint> endpoints_;
  PeerPoolOptions options_;
  std::vector<std::unique_ptr<Slot>> slots_;
  TransportCounters counters_;
};

// Throws the Error corresponding to an ERR frame; returns otherwise.
void throw_if_error(const wire::Frame& response);

}  // namespace fanstore
