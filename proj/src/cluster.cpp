#include "blaze/cluster.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <mutex>
#include <string_view>
#include <thread>
#include <vector>

namespace blaze {

namespace {

bool is_peer_loss(const std::exception_ptr& e) {
  try {
    std::rethrow_exception(e);
  } catch (const TransportError&) {
    return true;
  } catch (...) {
    return false;
  }
}

std::string run_threads(const LocalClusterOptions& options, const std::function<std::string(Context&)>& job) {
  auto hub = make_in_process_hub(options.workers);
  std::vector<std::exception_ptr> errors(options.workers);
  std::string result;
  std::vector<std::thread> threads;
  threads.reserve(options.workers);
  for (int rank = 0; rank < options.workers; ++rank) {
    threads.emplace_back([&, rank] {
      try {
        ClusterConfig cfg;
        cfg.backend = Backend::in_process;
        cfg.rank = rank;
        cfg.size = options.workers;
        cfg.threads_per_worker = options.threads;
        cfg.hub = hub;
        auto ctx = init(cfg);
        std::string out = job(*ctx);
        if (rank == 0) result = std::move(out);
      } catch (...) {
        errors[rank] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  // Peer-loss errors are usually a consequence of a failure elsewhere.
  for (auto& e : errors) {
    if (e && !is_peer_loss(e)) std::rethrow_exception(e);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return result;
}

int bind_loopback(int& port) {
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) throw TransportError(std::string("socket: ") + std::strerror(errno));
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = 0;
  if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0 || ::listen(fd, 128) != 0) {
    ::close(fd);
    throw TransportError(std::string("cannot bind loopback listener: ") + std::strerror(errno));
  }
  socklen_t len = sizeof(addr);
  ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
  port = ntohs(addr.sin_port);
  return fd;
}

void write_fd(int fd, std::string_view s) {
  while (!s.empty()) {
    const ssize_t w = ::write(fd, s.data(), s.size());
    if (w < 0) {
      if (errno == EINTR) continue;
      return;
    }
    s.remove_prefix(static_cast<std::size_t>(w));
  }
}

std::string read_fd(int fd) {
  std::string out;
  char buf[4096];
  for (;;) {
    const ssize_t r = ::read(fd, buf, sizeof(buf));
    if (r < 0 && errno == EINTR) continue;
    if (r <= 0) break;
    out.append(buf, static_cast<std::size_t>(r));
  }
  return out;
}

std::string run_forked(const LocalClusterOptions& options, const std::function<std::string(Context&)>& job) {
  const int n = options.workers;
  std::vector<int> listeners(n, -1);
  std::vector<std::string> peers(n);
  for (int r = 0; r < n; ++r) {
    int port = 0;
    listeners[r] = bind_loopback(port);
    peers[r] = "127.0.0.1:" + std::to_string(port);
  }

  std::fflush(nullptr);
  std::vector<pid_t> pids(n, -1);
  std::vector<int> pipes(n, -1);
  for (int r = 0; r < n; ++r) {
    int fds[2];
    if (::pipe(fds) != 0) throw Error(std::string("pipe: ") + std::strerror(errno));
    const pid_t pid = ::fork();
    if (pid < 0) throw TransportError(std::string("worker spawn failed: ") + std::strerror(errno));
    if (pid == 0) {
      ::close(fds[0]);
      for (int i = 0; i < n; ++i) {
        if (i != r) ::close(listeners[i]);
      }
      int status = 0;
      std::string message;
      try {
        ClusterConfig cfg;
        cfg.backend = Backend::sockets;
        cfg.rank = r;
        cfg.threads_per_worker = options.threads;
        cfg.peers = peers;
        cfg.connect_timeout = options.connect_timeout;
        cfg.listen_fd = listeners[r];
        std::string out;
        {
          auto ctx = init(cfg);
          ::close(listeners[r]);
          out = job(*ctx);
        }
        message = "O" + out;
      } catch (const std::exception& e) {
        status = 1;
        message = std::string(is_peer_loss(std::current_exception()) ? "T" : "E") + e.what();
      } catch (...) {
        status = 1;
        message = "Eunknown exception";
      }
      write_fd(fds[1], message);
      ::close(fds[1]);
      std::fflush(nullptr);
      std::_Exit(status);
    }
    ::close(fds[1]);
    pids[r] = pid;
    pipes[r] = fds[0];
  }
  for (int fd : listeners) ::close(fd);

  std::vector<std::string> messages(n);
  for (int r = 0; r < n; ++r) {
    messages[r] = read_fd(pipes[r]);
    ::close(pipes[r]);
  }
  std::string first_failure, first_peer_loss;
  for (int r = 0; r < n; ++r) {
    int status = 0;
    while (::waitpid(pids[r], &status, 0) < 0 && errno == EINTR) {
    }
    const bool ok = WIFEXITED(status) && WEXITSTATUS(status) == 0 && !messages[r].empty() && messages[r][0] == 'O';
    if (ok) continue;
    std::string what = messages[r].empty() ? "worker died without reporting (status " + std::to_string(status) + ")"
                                           : messages[r].substr(1);
    std::string line = "worker rank " + std::to_string(r) + " failed: " + what;
    if (!messages[r].empty() && messages[r][0] == 'T') {
      if (first_peer_loss.empty()) first_peer_loss = line;
    } else if (first_failure.empty()) {
      first_failure = line;
    }
  }
  if (!first_failure.empty()) throw Error(first_failure);
  if (!first_peer_loss.empty()) throw TransportError(first_peer_loss);
  return messages[0].substr(1);
}

}  // namespace

Backend backend_from_env() {
  const char* v = std::getenv("BLAZE_BACKEND");
  if (v == nullptr || *v == '\0') return Backend::in_process;
  const std::string_view s(v);
  if (s == "threads") return Backend::in_process;
  if (s == "sockets") return Backend::sockets;
  throw ConfigError("BLAZE_BACKEND must be 'threads' or 'sockets', got '" + std::string(s) + "'");
}

std::string run_local_cluster(const LocalClusterOptions& options, const std::function<std::string(Context&)>& job) {
  if (options.workers < 1) throw ConfigError("worker count must be at least 1");
  if (options.threads < 1) throw ConfigError("thread count must be at least 1");
  const Backend backend = options.backend.value_or(backend_from_env());
  if (backend == Backend::in_process) return run_threads(options, job);
  return run_forked(options, job);
}

}  // namespace blaze
