#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "blaze/error.hpp"
#include "blaze/thread_pool.hpp"
#include "blaze/wire.hpp"

namespace blaze {

enum class Backend { in_process, sockets };

const char* to_string(Backend b) noexcept;

struct Envelope {
  std::uint64_t tag = 0;
  Bytes payload;
};

// Tags at or above this value are used by the collectives.
inline constexpr std::uint64_t kReservedTagBase = std::uint64_t{1} << 40;

// Point-to-point byte messaging between ranks. Delivery is reliable and FIFO
// per (source, tag). send/recv may be called from any thread.
class Transport {
 public:
  virtual ~Transport() = default;

  virtual int rank() const noexcept = 0;
  virtual int size() const noexcept = 0;
  virtual Backend backend() const noexcept = 0;

  virtual void send(int dest, std::uint64_t tag, Bytes payload) = 0;
  // Blocks until a message from (src, tag) arrives. Throws TransportError once
  // src is gone and nothing from it is queued.
  virtual Bytes recv(int src, std::uint64_t tag) = 0;
};

class InProcessHub;

struct ClusterConfig {
  Backend backend = Backend::in_process;
  int rank = 0;
  // Worker count for the in-process backend; ignored for sockets, where the
  // peer list length is the size.
  int size = 1;
  int threads_per_worker = 1;
  // host:port of every rank, indexed by rank (sockets backend).
  std::vector<std::string> peers;
  std::chrono::milliseconds connect_timeout{30000};
  // Already listening socket for this rank; when -1 the transport binds
  // peers[rank] itself.
  int listen_fd = -1;
  // Shared mailbox set joining the ranks of an in-process cluster. Created on
  // demand for size 1.
  std::shared_ptr<InProcessHub> hub;
};

std::shared_ptr<InProcessHub> make_in_process_hub(int size);
std::unique_ptr<Transport> make_in_process_transport(std::shared_ptr<InProcessHub> hub, int rank);
std::unique_ptr<Transport> make_socket_transport(int rank, const std::vector<std::string>& peers,
                                                 std::chrono::milliseconds connect_timeout, int listen_fd);

struct CollectiveStats {
  // Rounds in which rank 0 received a partial result during the last tree_reduce.
  int last_tree_rounds = 0;
  // Payload bytes exchanged with other ranks (self-delivery excluded).
  std::uint64_t bytes_sent = 0;
  std::uint64_t bytes_received = 0;
};

// Per-worker handle: rank, transport, and the worker's thread team.
//
// Collectives (barrier, all_to_all, tree_reduce, broadcast, ...) are called by
// exactly one thread per worker, in the same order on every worker.
class Context {
 public:
  Context(std::unique_ptr<Transport> transport, int threads_per_worker);
  ~Context();

  Context(const Context&) = delete;
  Context& operator=(const Context&) = delete;

  int rank() const noexcept { return transport_->rank(); }
  int size() const noexcept { return transport_->size(); }
  int threads() const noexcept { return pool_.size(); }
  Backend backend() const noexcept { return transport_->backend(); }

  void send(int dest, Envelope env);
  Envelope recv(int src, std::uint64_t tag);

  void barrier();

  // outgoing[j] goes to rank j; returns what every rank addressed to us.
  std::vector<Bytes> all_to_all(std::vector<Bytes> outgoing);
  // Same exchange, handing each incoming payload to on_receive(src, bytes) as
  // soon as it is received. The self entry is delivered first.
  void all_to_all(std::vector<Bytes> outgoing, const std::function<void(int, Bytes)>& on_receive);

  using Merge = std::function<Bytes(Bytes, Bytes)>;
  // Binomial-tree reduction. Rank 0 returns the merge of every worker's
  // payload; other ranks return an empty payload.
  Bytes tree_reduce(Bytes local, const Merge& merge);
  // Rank 0's payload, delivered to every rank.
  Bytes broadcast(Bytes payload);
  Bytes all_reduce(Bytes local, const Merge& merge) { return broadcast(tree_reduce(std::move(local), merge)); }
  std::vector<Bytes> all_gather(const Bytes& local);

  template <class T, class Op>
  T all_reduce_value(const T& local, Op op) {
    WireBuffer mine;
    Codec<T>::encode(mine, local);
    Bytes out = all_reduce(mine.release(), [&](Bytes a, Bytes b) {
      WireBuffer wa(std::move(a)), wb(std::move(b));
      T x = Codec<T>::decode(wa);
      T y = Codec<T>::decode(wb);
      WireBuffer res;
      Codec<T>::encode(res, op(x, y));
      return res.release();
    });
    WireBuffer r(std::move(out));
    return Codec<T>::decode(r);
  }

  // Agreement step after a local phase. If any worker failed, every worker
  // throws: the failing worker rethrows its own exception, the others raise
  // JobError naming the lowest failing rank.
  void check_job(std::exception_ptr local_failure);

  ThreadPool& pool() noexcept { return pool_; }
  void parallel(const std::function<void(int)>& fn) { pool_.run(fn); }
  void seed_random(std::uint64_t seed) { pool_.seed_random(seed); }

  CollectiveStats stats() const noexcept;

 private:
  std::unique_ptr<Transport> transport_;
  ThreadPool pool_;
  int last_tree_rounds_ = 0;
  std::atomic<std::uint64_t> bytes_sent_{0};
  std::atomic<std::uint64_t> bytes_received_{0};
  std::uint64_t barrier_epoch_ = 0;

  void account_sent(int dest, std::size_t n);
  void account_received(int src, std::size_t n);
};

// Validates the configuration and connects to every peer. A barrier right
// after init succeeds on all workers.
std::unique_ptr<Context> init(const ClusterConfig& config);

}  // namespace blaze
