// Stream-socket backend. Every pair of ranks shares one TCP connection; the
// higher rank connects to the lower one. Frames on the wire:
//   [u64 LE payload_len][varint tag][payload bytes]

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <sys/uio.h>
#include <unistd.h>

#include <cerrno>
#include <condition_variable>
#include <cstring>
#include <memory>
#include <mutex>
#include <thread>

#include "blaze/transport.hpp"
#include "mailbox.hpp"

namespace blaze {

namespace {

constexpr std::uint32_t kHandshakeMagic = 0x425a4531;  // "BZE1"
constexpr std::size_t kReadChunk = 1 << 16;

using Clock = std::chrono::steady_clock;

struct HostPort {
  std::string host;
  std::string port;
};

HostPort parse_peer(const std::string& peer) {
  const auto colon = peer.rfind(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == peer.size()) {
    throw ConfigError("peer '" + peer + "' is not of the form host:port");
  }
  return {peer.substr(0, colon), peer.substr(colon + 1)};
}

std::string errno_text() { return std::strerror(errno); }

void write_all(int fd, const std::uint8_t* data, std::size_t n) {
  while (n > 0) {
    const ssize_t w = ::send(fd, data, n, MSG_NOSIGNAL);
    if (w < 0) {
      if (errno == EINTR) continue;
      throw TransportError("socket write failed: " + errno_text());
    }
    data += w;
    n -= static_cast<std::size_t>(w);
  }
}

// Returns false on orderly EOF before any byte was read.
bool read_exact(int fd, std::uint8_t* data, std::size_t n) {
  std::size_t got = 0;
  while (got < n) {
    const ssize_t r = ::recv(fd, data + got, n - got, 0);
    if (r == 0) {
      if (got == 0) return false;
      throw TransportError("connection closed mid-message");
    }
    if (r < 0) {
      if (errno == EINTR) continue;
      throw TransportError("socket read failed: " + errno_text());
    }
    got += static_cast<std::size_t>(r);
  }
  return true;
}

void put_u32(std::uint8_t* out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out[i] = static_cast<std::uint8_t>(v >> (8 * i));
}

std::uint32_t get_u32(const std::uint8_t* in) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in[i]) << (8 * i);
  return v;
}

int connect_with_retry(const HostPort& hp, Clock::time_point deadline) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  for (;;) {
    addrinfo* res = nullptr;
    if (::getaddrinfo(hp.host.c_str(), hp.port.c_str(), &hints, &res) == 0) {
      for (addrinfo* ai = res; ai != nullptr; ai = ai->ai_next) {
        const int fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
        if (fd < 0) continue;
        if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) {
          ::freeaddrinfo(res);
          return fd;
        }
        ::close(fd);
      }
      ::freeaddrinfo(res);
    }
    if (Clock::now() >= deadline) return -1;
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }
}

int listen_on(const HostPort& hp) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  hints.ai_flags = AI_PASSIVE;
  addrinfo* res = nullptr;
  if (const int rc = ::getaddrinfo(hp.host.c_str(), hp.port.c_str(), &hints, &res); rc != 0) {
    throw ConfigError("cannot resolve " + hp.host + ":" + hp.port + ": " + ::gai_strerror(rc));
  }
  std::string last_error = "no usable address";
  for (addrinfo* ai = res; ai != nullptr; ai = ai->ai_next) {
    const int fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (fd < 0) continue;
    const int one = 1;
    ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    if (::bind(fd, ai->ai_addr, ai->ai_addrlen) == 0 && ::listen(fd, 128) == 0) {
      ::freeaddrinfo(res);
      return fd;
    }
    last_error = errno_text();
    ::close(fd);
  }
  ::freeaddrinfo(res);
  throw TransportError("cannot listen on " + hp.host + ":" + hp.port + ": " + last_error);
}

class SocketTransport final : public Transport {
 public:
  SocketTransport(int rank, const std::vector<std::string>& peers, std::chrono::milliseconds timeout,
                  int listen_fd)
      : rank_(rank),
        size_(static_cast<int>(peers.size())),
        peers_(peers),
        fds_(peers.size(), -1),
        write_mu_(peers.size()),
        inbox_(static_cast<int>(peers.size())) {
    std::vector<HostPort> addrs;
    addrs.reserve(peers.size());
    for (const auto& p : peers) addrs.push_back(parse_peer(p));

    const auto deadline = Clock::now() + timeout;
    const bool own_listener = listen_fd < 0;
    if (size_ > 1 && own_listener) listen_fd = listen_on(addrs[rank_]);
    try {
      connect_lower(addrs, deadline);
      accept_higher(listen_fd, deadline);
    } catch (...) {
      if (own_listener && listen_fd >= 0) ::close(listen_fd);
      for (int fd : fds_) {
        if (fd >= 0) ::close(fd);
      }
      throw;
    }
    if (own_listener && listen_fd >= 0) ::close(listen_fd);

    for (int peer = 0; peer < size_; ++peer) {
      if (peer == rank_) continue;
      const int one = 1;
      ::setsockopt(fds_[peer], IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
      readers_.emplace_back([this, peer] { reader_loop(peer); });
    }
  }

  ~SocketTransport() override {
    for (int peer = 0; peer < size_; ++peer) {
      if (fds_[peer] >= 0) ::shutdown(fds_[peer], SHUT_WR);
    }
    {
      std::unique_lock lock(exit_mu_);
      const bool drained = exit_cv_.wait_for(lock, std::chrono::seconds(10),
                                             [&] { return readers_done_ == static_cast<int>(readers_.size()); });
      if (!drained) {
        for (int fd : fds_) {
          if (fd >= 0) ::shutdown(fd, SHUT_RDWR);
        }
      }
    }
    for (auto& t : readers_) t.join();
    for (int fd : fds_) {
      if (fd >= 0) ::close(fd);
    }
  }

  int rank() const noexcept override { return rank_; }
  int size() const noexcept override { return size_; }
  Backend backend() const noexcept override { return Backend::sockets; }

  void send(int dest, std::uint64_t tag, Bytes payload) override {
    if (dest == rank_) {
      inbox_.push(rank_, tag, std::move(payload));
      return;
    }
    std::uint8_t header[8 + WireBuffer::kMaxVarintBytes];
    const std::uint64_t len = payload.size();
    for (int i = 0; i < 8; ++i) header[i] = static_cast<std::uint8_t>(len >> (8 * i));
    std::size_t hlen = 8;
    std::uint64_t t = tag;
    while (t >= 0x80) {
      header[hlen++] = static_cast<std::uint8_t>(t | 0x80);
      t >>= 7;
    }
    header[hlen++] = static_cast<std::uint8_t>(t);

    std::lock_guard lock(write_mu_[dest]);
    iovec iov[2] = {{header, hlen}, {payload.data(), payload.size()}};
    std::size_t total = hlen + payload.size();
    int first = 0;
    while (total > 0) {
      msghdr msg{};
      msg.msg_iov = iov + first;
      msg.msg_iovlen = 2 - first;
      const ssize_t w = ::sendmsg(fds_[dest], &msg, MSG_NOSIGNAL);
      if (w < 0) {
        if (errno == EINTR) continue;
        throw TransportError("send to rank " + std::to_string(dest) + " failed: " + errno_text());
      }
      total -= static_cast<std::size_t>(w);
      std::size_t adv = static_cast<std::size_t>(w);
      while (first < 2 && adv >= iov[first].iov_len) {
        adv -= iov[first].iov_len;
        ++first;
      }
      if (first < 2) {
        iov[first].iov_base = static_cast<std::uint8_t*>(iov[first].iov_base) + adv;
        iov[first].iov_len -= adv;
      }
    }
  }

  Bytes recv(int src, std::uint64_t tag) override { return inbox_.pop(src, tag); }

 private:
  void handshake_out(int fd) {
    std::uint8_t hs[12];
    put_u32(hs, kHandshakeMagic);
    put_u32(hs + 4, static_cast<std::uint32_t>(rank_));
    put_u32(hs + 8, static_cast<std::uint32_t>(size_));
    write_all(fd, hs, sizeof(hs));
  }

  void connect_lower(const std::vector<HostPort>& addrs, Clock::time_point deadline) {
    for (int peer = 0; peer < rank_; ++peer) {
      const int fd = connect_with_retry(addrs[peer], deadline);
      if (fd < 0) {
        throw TransportError("startup failure: peer rank " + std::to_string(peer) + " at " + peers_[peer] +
                             " unreachable");
      }
      fds_[peer] = fd;
      handshake_out(fd);
    }
  }

  void accept_higher(int listen_fd, Clock::time_point deadline) {
    int expected = size_ - 1 - rank_;
    while (expected > 0) {
      const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now()).count();
      pollfd pfd{listen_fd, POLLIN, 0};
      const int rc = left > 0 ? ::poll(&pfd, 1, static_cast<int>(left)) : 0;
      if (rc < 0 && errno == EINTR) continue;
      if (rc <= 0) {
        std::string missing;
        for (int peer = rank_ + 1; peer < size_; ++peer) {
          if (fds_[peer] < 0) missing += (missing.empty() ? "" : ", ") + std::string("rank ") +
                                         std::to_string(peer) + " at " + peers_[peer];
        }
        throw TransportError("startup failure: peer " + missing + " unreachable");
      }
      const int fd = ::accept(listen_fd, nullptr, nullptr);
      if (fd < 0) {
        if (errno == EINTR) continue;
        throw TransportError("accept failed: " + errno_text());
      }
      std::uint8_t hs[12];
      if (!read_exact(fd, hs, sizeof(hs)) || get_u32(hs) != kHandshakeMagic) {
        ::close(fd);
        continue;
      }
      const auto peer = static_cast<int>(get_u32(hs + 4));
      const auto peer_size = static_cast<int>(get_u32(hs + 8));
      if (peer_size != size_) {
        ::close(fd);
        throw ConfigError("peer rank " + std::to_string(peer) + " reports cluster size " +
                          std::to_string(peer_size) + ", expected " + std::to_string(size_));
      }
      if (peer <= rank_ || peer >= size_ || fds_[peer] >= 0) {
        ::close(fd);
        throw ConfigError("duplicate rank " + std::to_string(peer) + " in cluster");
      }
      fds_[peer] = fd;
      --expected;
    }
  }

  void reader_loop(int peer) {
    const int fd = fds_[peer];
    std::string reason = "connection closed";
    try {
      Bytes buf(kReadChunk);
      std::size_t begin = 0, end = 0;
      // Pulls at least `need` buffered bytes; false on EOF at a frame boundary.
      auto fill = [&](std::size_t need) -> bool {
        if (end - begin >= need) return true;
        if (begin > 0) {
          std::memmove(buf.data(), buf.data() + begin, end - begin);
          end -= begin;
          begin = 0;
        }
        if (buf.size() < need) buf.resize(need);
        while (end < need) {
          const ssize_t r = ::recv(fd, buf.data() + end, buf.size() - end, 0);
          if (r == 0) {
            if (end == 0) return false;
            throw TransportError("connection closed mid-frame");
          }
          if (r < 0) {
            if (errno == EINTR) continue;
            throw TransportError("socket read failed: " + errno_text());
          }
          end += static_cast<std::size_t>(r);
        }
        return true;
      };
      for (;;) {
        if (!fill(8)) break;
        std::uint64_t len = 0;
        for (int i = 0; i < 8; ++i) len |= static_cast<std::uint64_t>(buf[begin + i]) << (8 * i);
        begin += 8;
        std::uint64_t tag = 0;
        for (int i = 0;; ++i) {
          if (i >= WireBuffer::kMaxVarintBytes) throw TransportError("malformed frame tag");
          if (!fill(1)) throw TransportError("connection closed mid-frame");
          const std::uint8_t b = buf[begin++];
          tag |= static_cast<std::uint64_t>(b & 0x7f) << (7 * i);
          if ((b & 0x80) == 0) break;
        }
        Bytes payload(len);
        const std::size_t buffered = std::min<std::size_t>(end - begin, len);
        std::memcpy(payload.data(), buf.data() + begin, buffered);
        begin += buffered;
        if (buffered < len) read_exact_or_throw(fd, payload.data() + buffered, len - buffered);
        inbox_.push(peer, tag, std::move(payload));
      }
    } catch (const std::exception& e) {
      reason = e.what();
    }
    inbox_.close(peer, reason);
    {
      std::lock_guard lock(exit_mu_);
      ++readers_done_;
    }
    exit_cv_.notify_all();
  }

  static void read_exact_or_throw(int fd, std::uint8_t* data, std::size_t n) {
    if (!read_exact(fd, data, n)) throw TransportError("connection closed mid-frame");
  }

  int rank_;
  int size_;
  std::vector<std::string> peers_;
  std::vector<int> fds_;
  std::vector<std::mutex> write_mu_;
  detail::Mailbox inbox_;
  std::vector<std::thread> readers_;
  std::mutex exit_mu_;
  std::condition_variable exit_cv_;
  int readers_done_ = 0;
};

}  // namespace

std::unique_ptr<Transport> make_socket_transport(int rank, const std::vector<std::string>& peers,
                                                 std::chrono::milliseconds connect_timeout, int listen_fd) {
  if (peers.empty()) throw ConfigError("socket backend needs a non-empty peer list");
  if (rank < 0 || rank >= static_cast<int>(peers.size())) {
    throw ConfigError("rank " + std::to_string(rank) + " out of range for peer list of " +
                      std::to_string(peers.size()));
  }
  for (std::size_t i = 0; i < peers.size(); ++i) {
    for (std::size_t j = i + 1; j < peers.size(); ++j) {
      if (peers[i] == peers[j]) throw ConfigError("peer address " + peers[i] + " listed twice");
    }
  }
  return std::make_unique<SocketTransport>(rank, peers, connect_timeout, listen_fd);
}

}  // namespace blaze
