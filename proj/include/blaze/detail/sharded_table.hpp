#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <mutex>
#include <unordered_map>
#include <utility>

#include "blaze/wire.hpp"

namespace blaze::detail {

// Hash map split into 256 independently locked shards. Shard choice uses the
// top byte of mix64(key_hash), so keys that share an owner rank still spread.
template <class K, class V>
class ShardedTable {
 public:
  static constexpr int kShards = 256;
  using Map = std::unordered_map<K, V, KeyHash<K>, std::equal_to<>>;

  static int shard_of(std::uint64_t hash) noexcept { return static_cast<int>(mix64(hash) >> 56); }

  struct Shard {
    std::mutex mu;
    Map map;
  };

  Shard& shard(int i) noexcept { return shards_[i]; }
  const Shard& shard(int i) const noexcept { return shards_[i]; }

  // Locked merge of (k, v): inserts when absent, reduces otherwise.
  template <class Reduce>
  void merge(std::uint64_t hash, K&& k, V&& v, Reduce& reduce) {
    Shard& s = shards_[shard_of(hash)];
    std::lock_guard lock(s.mu);
    merge_unlocked(s, std::move(k), std::move(v), reduce);
  }

  template <class Reduce>
  static void merge_unlocked(Shard& s, K&& k, V&& v, Reduce& reduce) {
    auto it = s.map.find(k);
    if (it == s.map.end()) {
      s.map.emplace(std::move(k), std::move(v));
    } else {
      reduce(it->second, v);
    }
  }

  std::size_t size() const {
    std::size_t n = 0;
    for (const auto& s : shards_) n += s.map.size();
    return n;
  }

  void clear() {
    for (auto& s : shards_) s.map.clear();
  }

 private:
  std::array<Shard, kShards> shards_;
};

}  // namespace blaze::detail
