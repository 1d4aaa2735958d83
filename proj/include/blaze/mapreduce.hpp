#pragma once

// In-memory MapReduce with eager reduction.
//
//   mapreduce<K, V>(input, mapper, reducer, target);
//
// input   DistRange (mapper(value, emit)), DistVector (mapper(index, value,
//         emit)) or DistHashMap (mapper(key, value, emit)).
// reducer "sum", "prod", "min", "max", or a callable (V& existing, const V& new).
// target  DistHashMap<K, V>, DistVector<V> (K is the global index), or a
//         std::vector<V> replicated on every worker (K is the index). The
//         target is not cleared; results are reduced into it.
//
// Emitted pairs are reduced immediately into a per-thread cache, overflow
// goes to a sharded node-local table, and only the locally reduced pairs are
// shuffled. Vector targets of at most dense_threshold slots skip hashing
// entirely: each thread reduces into its own array, and the arrays are merged
// by tree reduction, first across threads and then across workers.
//
// The call is collective and must be issued by the controller thread of
// every worker.

#include <algorithm>
#include <barrier>
#include <concepts>
#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <exception>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <type_traits>
#include <unordered_map>
#include <utility>
#include <vector>

#include "blaze/detail/region.hpp"
#include "blaze/detail/sharded_table.hpp"
#include "blaze/detail/thread_cache.hpp"
#include "blaze/dist_hash_map.hpp"
#include "blaze/dist_range.hpp"
#include "blaze/dist_vector.hpp"
#include "blaze/error.hpp"
#include "blaze/reducers.hpp"
#include "blaze/transport.hpp"
#include "blaze/wire.hpp"

#ifndef BLAZE_CHECK_CONTRACTS
#ifdef NDEBUG
#define BLAZE_CHECK_CONTRACTS 0
#else
#define BLAZE_CHECK_CONTRACTS 1
#endif
#endif

namespace blaze {

// Per-worker counters of one MapReduce job.
struct JobStats {
  std::uint64_t pairs_emitted = 0;
  std::uint64_t cache_evictions = 0;
  // Locally reduced pairs leaving the worker's node table, for all destinations.
  std::uint64_t pairs_shuffled = 0;
  // Shuffle payload bytes exchanged with other workers.
  std::uint64_t wire_bytes_out = 0;
  std::uint64_t wire_bytes_in = 0;
  std::uint64_t reduce_calls = 0;
  bool dense_path = false;

  JobStats& operator+=(const JobStats& o) {
    pairs_emitted += o.pairs_emitted;
    cache_evictions += o.cache_evictions;
    pairs_shuffled += o.pairs_shuffled;
    wire_bytes_out += o.wire_bytes_out;
    wire_bytes_in += o.wire_bytes_in;
    reduce_calls += o.reduce_calls;
    return *this;
  }
};

inline constexpr std::size_t kDefaultDenseThreshold = std::size_t{1} << 14;

struct MapReduceOptions {
  // Largest std::vector target reduced through per-thread dense arrays.
  std::size_t dense_threshold = kDefaultDenseThreshold;
  // Stats of this worker for the job, when non-null.
  JobStats* stats = nullptr;
};

namespace detail {

// Key representation accepted by emit without constructing K.
template <class K>
struct KeyArgOf {
  using type = K;
};
template <>
struct KeyArgOf<std::string> {
  using type = std::string_view;
};

template <class Target>
struct TargetTraits;

template <class K, class V>
struct TargetTraits<DistHashMap<K, V>> {
  using key = K;
  using value = V;
};

template <class V>
struct TargetTraits<DistVector<V>> {
  using key = std::size_t;
  using value = V;
};

template <class V, class A>
struct TargetTraits<std::vector<V, A>> {
  using key = std::size_t;
  using value = V;
};

template <class Reduce>
struct CountingReduce {
  Reduce* reduce;
  std::uint64_t calls = 0;
  template <class V>
  void operator()(V& a, const V& b) {
    ++calls;
    (*reduce)(a, b);
  }
};

// Thread-level counters, padded to avoid false sharing.
struct alignas(64) ThreadStats {
  std::uint64_t emitted = 0;
  std::uint64_t evictions = 0;
  std::uint64_t reduce_calls = 0;
};

// Calls the mapper once per element thread `tid` owns. Each call gets its own
// emit handle; using a handle after its call returned is a contract
// violation, detected when BLAZE_CHECK_CONTRACTS is on.
template <class Input, class Mapper, class Emit>
void run_mapper(const Input& input, int tid, int threads, Mapper& mapper, Emit& emit) {
  if constexpr (BLAZE_CHECK_CONTRACTS) {
    std::uint64_t seq = 0, current = 0;
    input.visit_thread(tid, threads, [&](auto&&... args) {
      const std::uint64_t mine = ++seq;
      current = mine;
      const auto bound = [&emit, &current, mine](auto&& key, auto&& value) {
        if (current != mine) throw ContractViolation("emit called outside of the mapper invocation it was passed to");
        emit(std::forward<decltype(key)>(key), std::forward<decltype(value)>(value));
      };
      mapper(args..., bound);
      current = 0;
    });
  } else {
    input.visit_thread(tid, threads, [&](auto&&... args) { mapper(args..., emit); });
  }
}

template <class K>
[[noreturn, gnu::cold, gnu::noinline]] void throw_key_out_of_range(K key, std::size_t limit) {
  throw JobError("emitted key " + std::to_string(key) + " is out of range [0, " + std::to_string(limit) + ")");
}

template <class K>
std::size_t checked_index(const K& key, std::size_t limit) {
  static_assert(std::is_integral_v<K> && !std::is_same_v<K, bool>, "vector targets need an integral key");
  if constexpr (std::is_signed_v<K>) {
    if (key < 0) [[unlikely]] throw_key_out_of_range(key, limit);
  }
  const auto idx = static_cast<std::size_t>(key);
  if (idx >= limit) [[unlikely]] throw_key_out_of_range(key, limit);
  return idx;
}

// ----------------------------------------------------------------------------
// Dense path

template <class V>
struct DenseArray {
  std::vector<V> values;
  std::vector<std::uint8_t> present;
  explicit DenseArray(std::size_t n) : values(n), present(n, 0) {}

  template <class Reduce>
  void merge(std::size_t i, const V& v, Reduce& reduce) {
    if (present[i]) {
      reduce(values[i], v);
    } else {
      values[i] = v;
      present[i] = 1;
    }
  }
};

template <class V>
Bytes encode_dense(const DenseArray<V>& a) {
  WireBuffer b;
  std::uint64_t n = 0;
  for (auto p : a.present) n += p;
  b.put_varint(n);
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    if (!a.present[i]) continue;
    b.put_varint(i);
    Codec<V>::encode(b, a.values[i]);
  }
  return b.release();
}

template <class V, class Reduce>
void decode_dense_into(Bytes bytes, DenseArray<V>& a, Reduce& reduce) {
  WireBuffer b(std::move(bytes));
  const std::uint64_t n = b.get_varint();
  for (std::uint64_t j = 0; j < n; ++j) {
    const std::size_t at = b.cursor();
    const std::uint64_t i = b.get_varint();
    if (i >= a.values.size()) throw DecodeError("dense slot " + std::to_string(i) + " out of range", at);
    V v = Codec<V>::decode(b);
    a.merge(static_cast<std::size_t>(i), v, reduce);
  }
}

template <class K, class V, class Input, class Mapper, class Reduce>
JobStats run_dense(const Input& input, Mapper& mapper, Reduce& reduce, std::vector<V>& target) {
  Context& ctx = input.context();
  const int threads = ctx.threads();
  const std::size_t range = target.size();
  std::vector<std::optional<DenseArray<V>>> arrays(threads);
  std::vector<ThreadStats> tstats(threads);
  std::barrier sync(threads);

  run_checked(ctx, [&](int tid) {
    auto& arr = arrays[tid].emplace(range);
    auto& ts = tstats[tid];
    CountingReduce<Reduce> counted{&reduce};
    std::exception_ptr failure;
    // The emit path is the whole cost of a dense job, so it keeps its counter
    // in a local and leaves reduce calls to be derived afterwards: every emit
    // but the first one per slot is a reduction.
    std::uint64_t emitted = 0;
    try {
      auto emit = [&](auto&& key, auto&& value) {
        ++emitted;
        const std::size_t i = checked_index(key, range);
        if (arr.present[i]) {
          if constexpr (std::is_same_v<std::decay_t<decltype(value)>, V>) {
            reduce(arr.values[i], value);
          } else {
            reduce(arr.values[i], static_cast<const V&>(V(std::forward<decltype(value)>(value))));
          }
        } else {
          arr.values[i] = V(std::forward<decltype(value)>(value));
          arr.present[i] = 1;
        }
      };
      run_mapper(input, tid, threads, mapper, emit);
    } catch (...) {
      failure = std::current_exception();
    }
    ts.emitted = emitted;
    std::uint64_t filled = 0;
    for (auto p : arr.present) filled += p;
    counted.calls = emitted - filled;
    // Pairwise tree merge across threads. Every thread reaches every barrier
    // phase, even after a local failure.
    for (int step = 1; step < threads; step <<= 1) {
      sync.arrive_and_wait();
      if (!failure && tid % (2 * step) == 0 && tid + step < threads) {
        try {
          auto& other = *arrays[tid + step];
          for (std::size_t i = 0; i < range; ++i) {
            if (other.present[i]) arr.merge(i, other.values[i], counted);
          }
        } catch (...) {
          failure = std::current_exception();
        }
      }
    }
    ts.reduce_calls = counted.calls;
    if (failure) std::rethrow_exception(failure);
  });

  JobStats stats;
  stats.dense_path = true;
  for (const auto& ts : tstats) {
    stats.pairs_emitted += ts.emitted;
    stats.reduce_calls += ts.reduce_calls;
  }
  CountingReduce<Reduce> counted{&reduce};
  DenseArray<V>& local = *arrays[0];
  if (ctx.size() > 1) {
    const auto before = ctx.stats();
    Bytes merged = ctx.all_reduce(encode_dense(local), [&](Bytes a, Bytes b) {
      DenseArray<V> acc(range);
      decode_dense_into(std::move(a), acc, counted);
      decode_dense_into(std::move(b), acc, counted);
      return encode_dense(acc);
    });
    const auto after = ctx.stats();
    stats.wire_bytes_out = after.bytes_sent - before.bytes_sent;
    stats.wire_bytes_in = after.bytes_received - before.bytes_received;
    DenseArray<V> all(range);
    decode_dense_into(std::move(merged), all, counted);
    for (std::size_t i = 0; i < range; ++i) {
      if (all.present[i]) counted(target[i], all.values[i]);
    }
  } else {
    for (std::size_t i = 0; i < range; ++i) {
      if (local.present[i]) counted(target[i], local.values[i]);
    }
  }
  stats.reduce_calls += counted.calls;
  return stats;
}

// ----------------------------------------------------------------------------
// Generic path

template <class K, class V>
using NodeTable = ShardedTable<K, V>;

// A shuffle batch is [varint pair count][pairs]. Decodes one from `src`, handing each pair to sink(K&&, V&&).
// Malformed input raises JobError naming the source and byte offset.
template <class K, class V, class Sink>
void decode_batch(Bytes bytes, int src, Sink&& sink) {
  WireBuffer b(std::move(bytes));
  try {
    const std::uint64_t n = b.get_varint();
    for (std::uint64_t i = 0; i < n; ++i) {
      auto [k, v] = decode_pair<K, V>(b);
      sink(std::move(k), std::move(v));
    }
    if (!b.exhausted()) throw DecodeError("trailing bytes after shuffle batch", b.cursor());
  } catch (const DecodeError& e) {
    throw JobError("shuffle batch from rank " + std::to_string(src) + " is corrupt: " + e.what());
  }
}

// Blocking queue feeding received batches to decoder threads.
class BatchQueue {
 public:
  void push(int src, Bytes b) {
    {
      std::lock_guard lock(mu_);
      items_.emplace_back(src, std::move(b));
    }
    cv_.notify_one();
  }
  void close() {
    {
      std::lock_guard lock(mu_);
      closed_ = true;
    }
    cv_.notify_all();
  }
  bool pop(int& src, Bytes& b) {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return closed_ || !items_.empty(); });
    if (items_.empty()) return false;
    src = items_.front().first;
    b = std::move(items_.front().second);
    items_.pop_front();
    return true;
  }

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<std::pair<int, Bytes>> items_;
  bool closed_ = false;
};

// Where locally reduced pairs go.
template <class K, class V>
struct HashMapSink {
  DistHashMap<K, V>* target;
  int owner(std::uint64_t hash, const K&) const {
    return static_cast<int>(hash % static_cast<std::uint64_t>(target->context().size()));
  }
  template <class Reduce>
  void merge_local(int shard, K&& k, V&& v, Reduce& reduce) {
    auto& s = target->table().shard(shard);
    std::lock_guard lock(s.mu);
    ShardedTable<K, V>::merge_unlocked(s, std::move(k), std::move(v), reduce);
  }
  template <class Reduce>
  void merge_incoming(K&& k, V&& v, Reduce& reduce) {
    target->table().merge(key_hash(k), std::move(k), std::move(v), reduce);
  }
};

template <class V>
struct VectorSink {
  static constexpr int kStripes = 256;
  DistVector<V>* target;
  std::mutex* stripes;

  int owner(std::uint64_t, std::size_t index) const { return target->owner(index); }
  template <class Reduce>
  void merge_local(int, std::size_t&& index, V&& v, Reduce& reduce) {
    // Node-table keys are unique, so no other thread touches this slot now.
    reduce(target->local()[index - target->offset()], v);
  }
  template <class Reduce>
  void merge_incoming(std::size_t&& index, V&& v, Reduce& reduce) {
    const std::size_t lo = target->offset();
    if (index < lo || index >= lo + target->local_size()) {
      throw JobError("shuffled index " + std::to_string(index) + " is not owned by rank " +
                     std::to_string(target->context().rank()));
    }
    std::lock_guard lock(stripes[index % kStripes]);
    reduce(target->local()[index - lo], v);
  }
};

// Thread-cache map phase shared by every generic-path target. Leaves the
// locally reduced pairs in `node`.
template <class K, class V, class Input, class Mapper, class Reduce, class Check>
void run_local_phase(const Input& input, Mapper& mapper, Reduce& reduce, NodeTable<K, V>& node,
                     std::vector<ThreadStats>& tstats, Check&& check_key) {
  Context& ctx = input.context();
  const int threads = ctx.threads();
  using KeyArg = typename KeyArgOf<K>::type;
  std::barrier sync(threads);

  run_checked(ctx, [&](int tid) {
    auto& ts = tstats[tid];
    CountingReduce<Reduce> counted{&reduce};
    std::exception_ptr failure;
    {
      ThreadCache<K, V> cache;
      auto evict = [&](std::uint64_t hash, K&& k, V&& v) { node.merge(hash, std::move(k), std::move(v), counted); };
      try {
        auto emit = [&](auto&& key, auto&& value) {
          ++ts.emitted;
          V val(std::forward<decltype(value)>(value));
          if constexpr (std::is_convertible_v<decltype(key), KeyArg> && !std::is_same_v<KeyArg, K>) {
            const KeyArg k = key;
            check_key(k);
            cache.emit(key_hash(k), k, std::move(val), counted, evict);
          } else {
            check_key(key);
            K k = static_cast<K>(key);
            const std::uint64_t h = key_hash(k);
            cache.emit(h, std::move(k), std::move(val), counted, evict);
          }
        };
        run_mapper(input, tid, threads, mapper, emit);
      } catch (...) {
        failure = std::current_exception();
      }
      ts.evictions = cache.evictions();
      // Drain into the node table once every thread has finished mapping.
      sync.arrive_and_wait();
      if (!failure) {
        try {
          cache.drain([&](std::uint64_t hash, K&& k, V&& v) { node.merge(hash, std::move(k), std::move(v), counted); });
        } catch (...) {
          failure = std::current_exception();
        }
      }
    }
    ts.reduce_calls += counted.calls;
    if (failure) std::rethrow_exception(failure);
  });
}

// Partitions the node table by owner, exchanges batches, and reduces what
// arrives into the target while later batches are still being received.
template <class K, class V, class Reduce, class Sink>
void shuffle(Context& ctx, NodeTable<K, V>& node, Reduce& reduce, Sink& sink, JobStats& stats,
             std::vector<ThreadStats>& tstats) {
  const int threads = ctx.threads();
  const int workers = ctx.size();
  const int me = ctx.rank();
  std::vector<std::vector<WireBuffer>> bufs(threads, std::vector<WireBuffer>(workers));
  std::vector<std::vector<std::uint64_t>> counts(threads, std::vector<std::uint64_t>(workers, 0));

  run_checked(ctx, [&](int tid) {
    CountingReduce<Reduce> counted{&reduce};
    for (int s = tid; s < NodeTable<K, V>::kShards; s += threads) {
      auto& map = node.shard(s).map;
      for (auto it = map.begin(); it != map.end();) {
        auto nh = map.extract(it++);
        const std::uint64_t h = key_hash(nh.key());
        const int dest = sink.owner(h, nh.key());
        ++counts[tid][dest];
        if (dest == me) {
          sink.merge_local(s, std::move(nh.key()), std::move(nh.mapped()), counted);
        } else {
          encode_pair<K, V>(bufs[tid][dest], nh.key(), nh.mapped());
        }
      }
    }
    tstats[tid].reduce_calls += counted.calls;
  });

  std::vector<Bytes> outgoing(workers);
  for (int d = 0; d < workers; ++d) {
    std::uint64_t n = 0;
    std::size_t bytes = 0;
    for (int t = 0; t < threads; ++t) {
      n += counts[t][d];
      bytes += bufs[t][d].size();
    }
    stats.pairs_shuffled += n;
    if (d == me) continue;
    WireBuffer batch;
    batch.reserve(bytes + WireBuffer::kMaxVarintBytes);
    batch.put_varint(n);
    for (int t = 0; t < threads; ++t) {
      batch.put_raw(bufs[t][d].bytes());
      bufs[t][d].clear();
    }
    outgoing[d] = batch.release();
    stats.wire_bytes_out += outgoing[d].size();
  }

  BatchQueue queue;
  std::uint64_t bytes_in = 0;
  run_checked(ctx, [&](int tid) {
    CountingReduce<Reduce> counted{&reduce};
    std::exception_ptr failure;
    if (tid == 0) {
      try {
        ctx.all_to_all(std::move(outgoing), [&](int src, Bytes b) {
          if (src == me) return;
          bytes_in += b.size();
          queue.push(src, std::move(b));
        });
      } catch (...) {
        failure = std::current_exception();
      }
      queue.close();
    }
    int src = 0;
    Bytes b;
    while (queue.pop(src, b)) {
      if (failure) continue;
      try {
        decode_batch<K, V>(std::move(b), src,
                           [&](K&& k, V&& v) { sink.merge_incoming(std::move(k), std::move(v), counted); });
      } catch (...) {
        failure = std::current_exception();
      }
    }
    tstats[tid].reduce_calls += counted.calls;
    if (failure) std::rethrow_exception(failure);
  });
  stats.wire_bytes_in = bytes_in;
}

template <class K, class V>
Bytes encode_table(const std::unordered_map<K, V, KeyHash<K>>& m) {
  WireBuffer b;
  b.put_varint(m.size());
  for (const auto& [k, v] : m) encode_pair<K, V>(b, k, v);
  return b.release();
}

template <class K, class V, class Reduce>
void decode_table_into(Bytes bytes, int src, std::unordered_map<K, V, KeyHash<K>>& m, Reduce& reduce) {
  decode_batch<K, V>(std::move(bytes), src, [&](K&& k, V&& v) {
    auto it = m.find(k);
    if (it == m.end()) {
      m.emplace(std::move(k), std::move(v));
    } else {
      reduce(it->second, v);
    }
  });
}

inline void sum_thread_stats(JobStats& stats, const std::vector<ThreadStats>& tstats) {
  for (const auto& ts : tstats) {
    stats.pairs_emitted += ts.emitted;
    stats.cache_evictions += ts.evictions;
    stats.reduce_calls += ts.reduce_calls;
  }
}

template <class K, class V, class Input, class Mapper, class Reduce>
JobStats run_generic(const Input& input, Mapper& mapper, Reduce& reduce, DistHashMap<K, V>& target) {
  Context& ctx = input.context();
  JobStats stats;
  std::vector<ThreadStats> tstats(ctx.threads());
  NodeTable<K, V> node;
  run_local_phase<K, V>(input, mapper, reduce, node, tstats, [](const auto&) {});
  HashMapSink<K, V> sink{&target};
  shuffle<K, V>(ctx, node, reduce, sink, stats, tstats);
  sum_thread_stats(stats, tstats);
  return stats;
}

template <class K, class V, class Input, class Mapper, class Reduce>
JobStats run_generic(const Input& input, Mapper& mapper, Reduce& reduce, DistVector<V>& target) {
  Context& ctx = input.context();
  JobStats stats;
  std::vector<ThreadStats> tstats(ctx.threads());
  NodeTable<std::size_t, V> node;
  const std::size_t limit = target.size();
  run_local_phase<std::size_t, V>(input, mapper, reduce, node, tstats,
                                  [limit](const auto& k) { checked_index(k, limit); });
  std::vector<std::mutex> stripes(VectorSink<V>::kStripes);
  VectorSink<V> sink{&target, stripes.data()};
  shuffle<std::size_t, V>(ctx, node, reduce, sink, stats, tstats);
  sum_thread_stats(stats, tstats);
  return stats;
}

// Replicated vector target too large for the dense path: reduce the node
// tables across workers and apply the result everywhere.
template <class K, class V, class Input, class Mapper, class Reduce>
JobStats run_generic(const Input& input, Mapper& mapper, Reduce& reduce, std::vector<V>& target) {
  Context& ctx = input.context();
  JobStats stats;
  std::vector<ThreadStats> tstats(ctx.threads());
  NodeTable<std::size_t, V> node;
  const std::size_t limit = target.size();
  run_local_phase<std::size_t, V>(input, mapper, reduce, node, tstats,
                                  [limit](const auto& k) { checked_index(k, limit); });
  sum_thread_stats(stats, tstats);
  stats.pairs_shuffled = node.size();

  CountingReduce<Reduce> counted{&reduce};
  if (ctx.size() == 1) {
    for (int s = 0; s < NodeTable<std::size_t, V>::kShards; ++s) {
      for (auto& [k, v] : node.shard(s).map) counted(target[k], v);
    }
  } else {
    std::unordered_map<std::size_t, V, KeyHash<std::size_t>> local;
    local.reserve(node.size());
    for (int s = 0; s < NodeTable<std::size_t, V>::kShards; ++s) {
      for (auto& [k, v] : node.shard(s).map) local.emplace(k, std::move(v));
    }
    node.clear();
    const auto before = ctx.stats();
    Bytes merged = ctx.all_reduce(encode_table(local), [&](Bytes a, Bytes b) {
      std::unordered_map<std::size_t, V, KeyHash<std::size_t>> acc;
      decode_table_into(std::move(a), ctx.rank(), acc, counted);
      decode_table_into(std::move(b), ctx.rank(), acc, counted);
      return encode_table(acc);
    });
    const auto after = ctx.stats();
    stats.wire_bytes_out = after.bytes_sent - before.bytes_sent;
    stats.wire_bytes_in = after.bytes_received - before.bytes_received;
    decode_batch<std::size_t, V>(std::move(merged), 0, [&](std::size_t&& k, V&& v) {
      counted(target[checked_index(k, limit)], v);
    });
  }
  stats.reduce_calls += counted.calls;
  return stats;
}

template <class K, class V, class Input, class Mapper, class Reduce, class Target>
JobStats dispatch(const Input& input, Mapper& mapper, Reduce& reduce, Target& target,
                  const MapReduceOptions& options) {
  JobStats stats;
  if constexpr (requires { typename Target::allocator_type; target.front(); }) {
    stats = target.size() <= options.dense_threshold ? run_dense<K, V>(input, mapper, reduce, target)
                                                     : run_generic<K, V>(input, mapper, reduce, target);
  } else {
    stats = run_generic<K, V>(input, mapper, reduce, target);
  }
  // Agree on completion so a failure while reducing incoming data surfaces on
  // every worker.
  input.context().check_job(nullptr);
  if (options.stats) *options.stats = stats;
  return stats;
}

}  // namespace detail

// See the file comment. K and V default to the target's key and value types.
template <class K = void, class V = void, class Input, class Mapper, class Reducer, class Target>
JobStats mapreduce(const Input& input, Mapper&& mapper, Reducer&& reducer, Target& target,
                   const MapReduceOptions& options = {}) {
  using Key = std::conditional_t<std::is_void_v<K>, typename detail::TargetTraits<Target>::key, K>;
  using Value = std::conditional_t<std::is_void_v<V>, typename detail::TargetTraits<Target>::value, V>;
  static_assert(std::is_same_v<Value, typename detail::TargetTraits<Target>::value>,
                "emitted value type must match the target's value type");
  if constexpr (std::is_convertible_v<Reducer, std::string_view>) {
    return reducers::with_builtin(std::string_view(reducer), [&](auto builtin) {
      return detail::dispatch<Key, Value>(input, mapper, builtin, target, options);
    });
  } else {
    return detail::dispatch<Key, Value>(input, mapper, reducer, target, options);
  }
}

// Forces the dense small-key-range plan. target.size() must not exceed
// options.dense_threshold.
template <class K = std::size_t, class V = void, class Input, class Mapper, class Reducer, class T, class A>
JobStats mapreduce_dense(const Input& input, Mapper&& mapper, Reducer&& reducer, std::vector<T, A>& target,
                         const MapReduceOptions& options = {}) {
  if (target.size() > options.dense_threshold) {
    throw UsageError("dense MapReduce target has " + std::to_string(target.size()) + " slots, above the threshold of " +
                     std::to_string(options.dense_threshold));
  }
  return mapreduce<K, T>(input, std::forward<Mapper>(mapper), std::forward<Reducer>(reducer), target, options);
}

}  // namespace blaze
