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

#include "fanstore/launcher.h"

#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstdio>
#include <exception>
#include <optional>
#include <thread>

#include "fanstore/error.h"

namespace fanstore {
namespace fs = std::filesystem;
using json = nlohmann::json;

// Parent/child protocol, one line per message.
//   child -> parent:  "B" barrier reached, "R <json>" result, "E <text>" failure
//   parent -> child:  "G" barrier released, "A" abort, "X" exit now
namespace {

void write_line(int fd, const std::string& line) {
  std::string buf = line + "\n";
  write_all(fd, as_bytes(buf));
}

// Reads one line, blocking. Returns nullopt at EOF.
std::optional<std::string> read_line(int fd) {
  std::string out;
  char c;
  while (true) {
    ssize_t n = ::read(fd, &c, 1);
    if (n < 0) {
      if (errno == EINTR) continue;
      return std::nullopt;
    }
    if (n == 0) return std::nullopt;
    if (c == '\n') return out;
    out.push_back(c);
  }
}

// Parent side: a child that already exited must not take the parent down.
void send_quiet(int fd, const std::string& line) {
  try {
    write_line(fd, line);
  } catch (const Error&) {
  }
}

std::string one_line(std::string s) {
  for (char& c : s) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return s;
}

}  // namespace

ClusterConfig make_local_config(std::uint32_t node_count,
                                const fs::path& base_dir,
                                const fs::path& dataset_dir,
                                std::uint32_t replication_factor,
                                std::vector<std::string> replicated_dirs) {
  ClusterConfig c;
  c.replication_factor = replication_factor;
  c.replicated_dirs = std::move(replicated_dirs);
  c.dataset_dir = dataset_dir;
  for (std::uint32_t i = 0; i < node_count; ++i) {
    NodeConfig n;
    n.id = i;
    n.root = base_dir / ("node" + std::to_string(i));
    c.nodes.push_back(std::move(n));
  }
  return c;
}

// ---------------------------------------------------------------------------

InProcessCluster::InProcessCluster(ClusterConfig config,
                                   const fs::path& manifest_path,
                                   NodeOptions options)
    : config_(std::move(config)) {
  const std::size_t m = config_.nodes.size();
  std::vector<UniqueFd> listeners;
  for (auto& n : config_.nodes) {
    listeners.push_back(listen_tcp(n.host, 0));
    n.port = local_port(listeners.back().get());
  }
  nodes_.resize(m);
  std::vector<std::exception_ptr> errors(m);
  std::vector<std::thread> threads;
  for (std::size_t i = 0; i < m; ++i) {
    threads.emplace_back([&, i] {
      try {
        NodeOptions o = options;
        o.listen_fd = listeners[i].release();
        nodes_[i] = Node::bootstrap(config_, static_cast<NodeId>(i),
                                    manifest_path, o);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (auto& e : errors) {
    if (e) {
      nodes_.clear();
      std::rethrow_exception(e);
    }
  }
}

InProcessCluster::~InProcessCluster() {
  for (auto& n : nodes_) {
    if (n) n->stop();
  }
}

std::uint64_t InProcessCluster::total_data_calls() const {
  std::uint64_t total = 0;
  for (const auto& n : nodes_) total += n->peers().counters().data_calls();
  return total;
}

// ---------------------------------------------------------------------------

void ProcessContext::barrier() {
  write_line(up_fd_, "B");
  auto reply = read_line(down_fd_);
  if (!reply || *reply != "G") {
    throw Error(Errc::kUnavailable, "barrier aborted: another node failed");
  }
}

void ForkedCluster::child_main(const ClusterConfig& config, NodeId id,
                               const fs::path& manifest, const ProcessRole& role,
                               NodeOptions options, int up_fd, int down_fd) {
  int status = 0;
  std::unique_ptr<Node> node;
  try {
    node = Node::bootstrap(config, id, manifest, options);
    if (!node->wait_for_peers(options.bootstrap_timeout)) {
      throw Error(Errc::kUnavailable, "peers did not become ready");
    }
    ProcessContext ctx(node.get(), up_fd, down_fd);
    ctx.barrier();
    json result = role(ctx);
    write_line(up_fd, "R " + result.dump());
  } catch (const std::exception& e) {
    write_line(up_fd, "E node " + std::to_string(id) + ": " + one_line(e.what()));
    status = 1;
  }
  // Keep serving peers until the parent says everyone is done.
  while (true) {
    auto line = read_line(down_fd);
    if (!line || *line == "X") break;
  }
  node.reset();
  std::fflush(nullptr);
  ::_exit(status);
}

std::vector<json> ForkedCluster::run(ClusterConfig config,
                                     const fs::path& manifest,
                                     const ProcessRole& role,
                                     ForkedClusterOptions options) {
  const std::size_t m = config.nodes.size();
  ::signal(SIGPIPE, SIG_IGN);

  std::vector<UniqueFd> listeners;
  for (auto& n : config.nodes) {
    listeners.push_back(listen_tcp(n.host, 0));
    n.port = local_port(listeners.back().get());
  }

  struct Child {
    pid_t pid = -1;
    UniqueFd up;    // parent reads
    UniqueFd down;  // parent writes
    std::string buffer;
    bool at_barrier = false;
    bool finished = false;
    std::optional<json> result;
  };
  std::vector<Child> children(m);

  std::fflush(nullptr);
  for (std::size_t i = 0; i < m; ++i) {
    int up[2], down[2];
    if (::pipe(up) != 0 || ::pipe(down) != 0) {
      throw Error(Errc::kIo, "pipe failed");
    }
    pid_t pid = ::fork();
    if (pid < 0) throw Error(Errc::kIo, "fork failed");
    if (pid == 0) {
      ::close(up[0]);
      ::close(down[1]);
      for (auto& c : children) {
        c.up.reset();
        c.down.reset();
      }
      NodeOptions node_options = options.node;
      node_options.listen_fd = listeners[i].release();
      for (auto& l : listeners) l.reset();
      child_main(config, static_cast<NodeId>(i), manifest, role, node_options,
                 up[1], down[0]);
    }
    ::close(up[1]);
    ::close(down[0]);
    children[i].pid = pid;
    children[i].up = UniqueFd(up[0]);
    children[i].down = UniqueFd(down[1]);
  }
  listeners.clear();

  const auto deadline = std::chrono::steady_clock::now() + options.timeout;
  std::optional<std::string> failure;
  bool timed_out = false;
  std::size_t finished = 0;

  auto abort_waiters = [&] {
    for (auto& c : children) {
      if (c.at_barrier) {
        c.at_barrier = false;
        send_quiet(c.down.get(), "A");
      }
    }
  };

  while (finished < m) {
    auto now = std::chrono::steady_clock::now();
    if (now >= deadline) {
      timed_out = true;
      break;
    }
    std::vector<pollfd> fds;
    std::vector<std::size_t> who;
    for (std::size_t i = 0; i < m; ++i) {
      if (children[i].finished) continue;
      fds.push_back(pollfd{children[i].up.get(), POLLIN, 0});
      who.push_back(i);
    }
    int wait_ms = static_cast<int>(std::min<std::int64_t>(
        1000, std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now)
                  .count()));
    int rc = ::poll(fds.data(), fds.size(), wait_ms);
    if (rc < 0) {
      if (errno == EINTR) continue;
      throw Error(Errc::kIo, "poll failed");
    }
    for (std::size_t k = 0; k < fds.size(); ++k) {
      if ((fds[k].revents & (POLLIN | POLLHUP | POLLERR)) == 0) continue;
      Child& c = children[who[k]];
      char buf[65536];
      ssize_t n = ::read(c.up.get(), buf, sizeof buf);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) {
        if (!failure) {
          failure = "node " + std::to_string(who[k]) + " exited unexpectedly";
        }
        c.finished = true;
        c.at_barrier = false;
        ++finished;
        abort_waiters();
        continue;
      }
      c.buffer.append(buf, static_cast<std::size_t>(n));
      std::size_t nl;
      while (!c.finished && (nl = c.buffer.find('\n')) != std::string::npos) {
        std::string line = c.buffer.substr(0, nl);
        c.buffer.erase(0, nl + 1);
        if (line == "B") {
          c.at_barrier = true;
          if (failure) {
            abort_waiters();
            continue;
          }
          bool all = true;
          for (const auto& other : children) all = all && other.at_barrier;
          if (all) {
            for (auto& other : children) {
              other.at_barrier = false;
              send_quiet(other.down.get(), "G");
            }
          }
        } else if (line.starts_with("R ")) {
          c.result = json::parse(line.substr(2));
          c.finished = true;
          ++finished;
        } else {
          if (!failure) failure = line.starts_with("E ") ? line.substr(2) : line;
          c.finished = true;
          ++finished;
          abort_waiters();
        }
      }
    }
  }

  for (auto& c : children) {
    if (timed_out) {
      ::kill(c.pid, SIGKILL);
    } else {
      send_quiet(c.down.get(), "X");
    }
  }
  for (auto& c : children) {
    int status = 0;
    while (::waitpid(c.pid, &status, 0) < 0 && errno == EINTR) {
    }
  }
  if (timed_out) {
    throw Error(Errc::kUnavailable, "cluster run exceeded its timeout");
  }
  if (failure) throw Error(Errc::kUnavailable, *failure);
  std::vector<json> out;
  for (auto& c : children) out.push_back(std::move(*c.result));
  return out;
}

}  // namespace fanstore
