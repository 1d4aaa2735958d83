#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>

#include "blaze/detail/region.hpp"
#include "blaze/detail/sharded_table.hpp"
#include "blaze/transport.hpp"
#include "blaze/wire.hpp"

namespace blaze {

// Key/value store partitioned by owner(k) = key_hash(k) mod workers.
template <class K, class V>
class DistHashMap {
 public:
  using key_type = K;
  using mapped_type = V;
  using Table = detail::ShardedTable<K, V>;

  explicit DistHashMap(Context& ctx) : ctx_(&ctx), table_(std::make_unique<Table>()) {}

  Context& context() const noexcept { return *ctx_; }

  int owner(const K& k) const { return static_cast<int>(key_hash(k) % static_cast<std::uint64_t>(ctx_->size())); }

  std::size_t local_size() const { return table_->size(); }

  // Global number of keys. Collective.
  std::size_t size() const {
    return ctx_->all_reduce_value(static_cast<std::uint64_t>(local_size()),
                                  [](std::uint64_t a, std::uint64_t b) { return a + b; });
  }

  // Value for k if this worker holds it.
  const V* find_local(const K& k) const {
    const auto& s = table_->shard(Table::shard_of(key_hash(k)));
    const auto it = s.map.find(k);
    return it == s.map.end() ? nullptr : &it->second;
  }

  // Stores (k, v) locally, overwriting. k must be owned by this worker.
  void put_local(K k, V v) {
    auto& s = table_->shard(Table::shard_of(key_hash(k)));
    std::lock_guard lock(s.mu);
    s.map.insert_or_assign(std::move(k), std::move(v));
  }

  void clear_local() { table_->clear(); }

  // f(key, value&) over the shards thread tid owns.
  template <class F>
  void visit_thread(int tid, int threads, F&& f) {
    for (int s = tid; s < Table::kShards; s += threads) {
      for (auto& [k, v] : table_->shard(s).map) f(k, v);
    }
  }

  template <class F>
  void visit_thread(int tid, int threads, F&& f) const {
    for (int s = tid; s < Table::kShards; s += threads) {
      for (const auto& [k, v] : table_->shard(s).map) f(k, v);
    }
  }

  // Serial pass over local entries.
  template <class F>
  void for_each_local(F&& f) const {
    for (int s = 0; s < Table::kShards; ++s) {
      for (const auto& [k, v] : table_->shard(s).map) f(k, v);
    }
  }

  // fn(key, value&) once per entry, in parallel. Collective.
  template <class Fn>
  void foreach(Fn&& fn) {
    detail::run_checked(*ctx_, [&](int tid) { visit_thread(tid, ctx_->threads(), fn); });
  }

  Table& table() noexcept { return *table_; }
  const Table& table() const noexcept { return *table_; }

 private:
  Context* ctx_;
  std::unique_ptr<Table> table_;
};

}  // namespace blaze
