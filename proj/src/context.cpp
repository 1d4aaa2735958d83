#include <exception>
#include <string>

#include "blaze/transport.hpp"

namespace blaze {

namespace {

constexpr std::uint64_t kTagAllToAll = kReservedTagBase + 1;
constexpr std::uint64_t kTagReduce = kReservedTagBase + 2;
constexpr std::uint64_t kTagBroadcast = kReservedTagBase + 3;
constexpr std::uint64_t kTagBarrier = kReservedTagBase + 0x100;  // + round

std::string describe(std::exception_ptr e) {
  try {
    std::rethrow_exception(e);
  } catch (const std::exception& ex) {
    return ex.what();
  } catch (...) {
    return "unknown exception";
  }
}

}  // namespace

const char* to_string(Backend b) noexcept {
  switch (b) {
    case Backend::in_process:
      return "threads";
    case Backend::sockets:
      return "sockets";
  }
  return "?";
}

Context::Context(std::unique_ptr<Transport> transport, int threads_per_worker)
    : transport_(std::move(transport)), pool_(threads_per_worker, transport_->rank()) {}

Context::~Context() = default;

CollectiveStats Context::stats() const noexcept {
  return {last_tree_rounds_, bytes_sent_.load(), bytes_received_.load()};
}

void Context::account_sent(int dest, std::size_t n) {
  if (dest != rank()) bytes_sent_.fetch_add(n, std::memory_order_relaxed);
}

void Context::account_received(int src, std::size_t n) {
  if (src != rank()) bytes_received_.fetch_add(n, std::memory_order_relaxed);
}

void Context::send(int dest, Envelope env) {
  if (dest < 0 || dest >= size()) throw TransportError("send to invalid rank " + std::to_string(dest));
  account_sent(dest, env.payload.size());
  transport_->send(dest, env.tag, std::move(env.payload));
}

Envelope Context::recv(int src, std::uint64_t tag) {
  if (src < 0 || src >= size()) throw TransportError("recv from invalid rank " + std::to_string(src));
  Bytes payload = transport_->recv(src, tag);
  account_received(src, payload.size());
  return {tag, std::move(payload)};
}

void Context::barrier() {
  // Dissemination barrier: ceil(log2 size) rounds.
  const int n = size();
  const int me = rank();
  int round = 0;
  for (int dist = 1; dist < n; dist <<= 1, ++round) {
    send((me + dist) % n, {kTagBarrier + static_cast<std::uint64_t>(round), {}});
    recv((me - dist + n) % n, kTagBarrier + static_cast<std::uint64_t>(round));
  }
  ++barrier_epoch_;
}

std::vector<Bytes> Context::all_to_all(std::vector<Bytes> outgoing) {
  std::vector<Bytes> incoming(size());
  all_to_all(std::move(outgoing), [&](int src, Bytes b) { incoming[src] = std::move(b); });
  return incoming;
}

void Context::all_to_all(std::vector<Bytes> outgoing, const std::function<void(int, Bytes)>& on_receive) {
  const int n = size();
  const int me = rank();
  if (static_cast<int>(outgoing.size()) != n) {
    throw TransportError("all_to_all needs " + std::to_string(n) + " outgoing entries, got " +
                         std::to_string(outgoing.size()));
  }
  for (int i = 1; i < n; ++i) {
    const int dest = (me + i) % n;
    send(dest, {kTagAllToAll, std::move(outgoing[dest])});
  }
  on_receive(me, std::move(outgoing[me]));
  for (int i = 1; i < n; ++i) {
    const int src = (me - i + n) % n;
    on_receive(src, recv(src, kTagAllToAll).payload);
  }
}

Bytes Context::tree_reduce(Bytes local, const Merge& merge) {
  const int n = size();
  const int me = rank();
  int rounds = 0;
  for (int step = 1; step < n; step <<= 1) {
    if (me % (2 * step) == step) {
      send(me - step, {kTagReduce, std::move(local)});
      local.clear();
      break;
    }
    if (me % (2 * step) == 0 && me + step < n) {
      local = merge(std::move(local), recv(me + step, kTagReduce).payload);
      ++rounds;
    }
  }
  if (me == 0) last_tree_rounds_ = rounds;
  return me == 0 ? std::move(local) : Bytes{};
}

Bytes Context::broadcast(Bytes payload) {
  const int n = size();
  const int me = rank();
  int top = 1;
  while (top < n) top <<= 1;
  for (int step = top >> 1; step >= 1; step >>= 1) {
    if (me % (2 * step) == 0 && me + step < n) {
      send(me + step, {kTagBroadcast, payload});
    } else if (me % (2 * step) == step) {
      payload = recv(me - step, kTagBroadcast).payload;
    }
  }
  return payload;
}

std::vector<Bytes> Context::all_gather(const Bytes& local) {
  std::vector<Bytes> out(size(), local);
  return all_to_all(std::move(out));
}

void Context::check_job(std::exception_ptr local_failure) {
  WireBuffer mine;
  mine.put_varint(local_failure ? static_cast<std::uint64_t>(rank()) : static_cast<std::uint64_t>(size()));
  mine.put_str(local_failure ? describe(local_failure) : std::string());
  Bytes agreed = all_reduce(mine.release(), [](Bytes a, Bytes b) {
    WireBuffer wa(a), wb(b);
    return wa.get_varint() <= wb.get_varint() ? a : b;
  });
  WireBuffer result(std::move(agreed));
  const auto failed = static_cast<int>(result.get_varint());
  if (local_failure) std::rethrow_exception(local_failure);
  if (failed < size()) {
    throw JobError("job aborted: worker rank " + std::to_string(failed) + " failed: " + result.get_str());
  }
}

std::unique_ptr<Context> init(const ClusterConfig& config) {
  if (config.threads_per_worker < 1) {
    throw ConfigError("threads_per_worker must be at least 1, got " + std::to_string(config.threads_per_worker));
  }
  std::unique_ptr<Transport> transport;
  if (config.backend == Backend::in_process) {
    if (config.rank < 0 || config.rank >= config.size) {
      throw ConfigError("rank " + std::to_string(config.rank) + " out of range for cluster of size " +
                        std::to_string(config.size));
    }
    auto hub = config.hub;
    if (!hub) {
      if (config.size != 1) throw ConfigError("in-process cluster of size > 1 needs a shared hub");
      hub = make_in_process_hub(1);
    }
    transport = make_in_process_transport(std::move(hub), config.rank);
  } else {
    transport = make_socket_transport(config.rank, config.peers, config.connect_timeout, config.listen_fd);
  }
  return std::make_unique<Context>(std::move(transport), config.threads_per_worker);
}

}  // namespace blaze
