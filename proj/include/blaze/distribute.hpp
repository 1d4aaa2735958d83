#pragma once

// Conversions between standard containers and distributed containers.

#include <unordered_map>
#include <vector>

#include "blaze/detail/partition.hpp"
#include "blaze/dist_hash_map.hpp"
#include "blaze/dist_vector.hpp"
#include "blaze/transport.hpp"
#include "blaze/wire.hpp"

namespace blaze {

// Splits rank 0's `data` into contiguous ceil(n / workers) blocks; other ranks
// pass anything (ignored). Collective.
template <class V>
DistVector<V> distribute(Context& ctx, const std::vector<V>& data) {
  const int n = ctx.size();
  std::vector<Bytes> outgoing(n);
  std::vector<V> mine;
  if (ctx.rank() == 0) {
    for (int r = 0; r < n; ++r) {
      const auto [lo, hi] = detail::block_range(data.size(), r, n);
      if (r == 0) {
        mine.assign(data.begin() + lo, data.begin() + hi);
        continue;
      }
      WireBuffer b;
      b.put_varint(hi - lo);
      for (std::size_t i = lo; i < hi; ++i) Codec<V>::encode(b, data[i]);
      outgoing[r] = b.release();
    }
  }
  auto incoming = ctx.all_to_all(std::move(outgoing));
  if (ctx.rank() != 0) {
    WireBuffer b(std::move(incoming[0]));
    const std::uint64_t count = b.get_varint();
    mine.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) mine.push_back(Codec<V>::decode(b));
  }
  return DistVector<V>(ctx, std::move(mine));
}

// Places each of rank 0's entries on its owner rank. Collective.
template <class Map>
DistHashMap<typename Map::key_type, typename Map::mapped_type> distribute(Context& ctx, const Map& data) {
  using K = typename Map::key_type;
  using V = typename Map::mapped_type;
  DistHashMap<K, V> out(ctx);
  const int n = ctx.size();
  std::vector<Bytes> outgoing(n);
  if (ctx.rank() == 0) {
    std::vector<WireBuffer> bufs(n);
    std::vector<std::uint64_t> counts(n, 0);
    for (const auto& [k, v] : data) {
      const int dest = out.owner(k);
      if (dest == 0) {
        out.put_local(k, v);
      } else {
        encode_pair<K, V>(bufs[dest], k, v);
        ++counts[dest];
      }
    }
    for (int r = 1; r < n; ++r) {
      WireBuffer b;
      b.put_varint(counts[r]);
      b.put_raw(bufs[r].bytes());
      outgoing[r] = b.release();
    }
  }
  auto incoming = ctx.all_to_all(std::move(outgoing));
  if (ctx.rank() != 0) {
    WireBuffer b(std::move(incoming[0]));
    const std::uint64_t count = b.get_varint();
    for (std::uint64_t i = 0; i < count; ++i) {
      auto [k, v] = decode_pair<K, V>(b);
      out.put_local(std::move(k), std::move(v));
    }
  }
  return out;
}

// Full logical vector at rank 0, empty elsewhere. Collective.
template <class V>
std::vector<V> collect(const DistVector<V>& vec) {
  Context& ctx = vec.context();
  const int n = ctx.size();
  std::vector<Bytes> outgoing(n);
  if (ctx.rank() != 0) {
    WireBuffer b;
    b.put_varint(vec.local_size());
    for (const auto& x : vec.local()) Codec<V>::encode(b, x);
    outgoing[0] = b.release();
  }
  auto incoming = ctx.all_to_all(std::move(outgoing));
  std::vector<V> out;
  if (ctx.rank() == 0) {
    out.reserve(vec.size());
    out.insert(out.end(), vec.local().begin(), vec.local().end());
    for (int r = 1; r < n; ++r) {
      WireBuffer b(std::move(incoming[r]));
      const std::uint64_t count = b.get_varint();
      for (std::uint64_t i = 0; i < count; ++i) out.push_back(Codec<V>::decode(b));
    }
  }
  return out;
}

// Union of all entries at rank 0, empty elsewhere. Collective.
template <class K, class V>
std::unordered_map<K, V> collect(const DistHashMap<K, V>& map) {
  Context& ctx = map.context();
  const int n = ctx.size();
  std::vector<Bytes> outgoing(n);
  if (ctx.rank() != 0) {
    WireBuffer b;
    b.put_varint(map.local_size());
    map.for_each_local([&](const K& k, const V& v) { encode_pair<K, V>(b, k, v); });
    outgoing[0] = b.release();
  }
  auto incoming = ctx.all_to_all(std::move(outgoing));
  std::unordered_map<K, V> out;
  if (ctx.rank() == 0) {
    map.for_each_local([&](const K& k, const V& v) { out.emplace(k, v); });
    for (int r = 1; r < n; ++r) {
      WireBuffer b(std::move(incoming[r]));
      const std::uint64_t count = b.get_varint();
      for (std::uint64_t i = 0; i < count; ++i) {
        auto [k, v] = decode_pair<K, V>(b);
        out.emplace(std::move(k), std::move(v));
      }
    }
  }
  return out;
}

}  // namespace blaze
