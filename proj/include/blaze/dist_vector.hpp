#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

#include "blaze/detail/partition.hpp"
#include "blaze/detail/region.hpp"
#include "blaze/transport.hpp"
#include "blaze/wire.hpp"

namespace blaze {

// Array partitioned across workers: concatenating the shards in rank order
// gives the logical vector.
template <class V>
class DistVector {
 public:
  using value_type = V;

  explicit DistVector(Context& ctx) : ctx_(&ctx), offsets_(ctx.size() + 1, 0) {}

  // Adopts `shard` as this worker's part. Collective: learns every shard size.
  DistVector(Context& ctx, std::vector<V> shard) : ctx_(&ctx), shard_(std::move(shard)) { sync_offsets(); }

  Context& context() const noexcept { return *ctx_; }

  std::size_t size() const noexcept { return offsets_.back(); }
  std::size_t local_size() const noexcept { return shard_.size(); }
  // Global index of local()[0].
  std::size_t offset() const noexcept { return offsets_[ctx_->rank()]; }
  // offsets()[r] is the first global index on rank r; offsets().back() == size().
  const std::vector<std::size_t>& offsets() const noexcept { return offsets_; }

  std::vector<V>& local() noexcept { return shard_; }
  const std::vector<V>& local() const noexcept { return shard_; }

  int owner(std::size_t index) const {
    const auto it = std::upper_bound(offsets_.begin(), offsets_.end(), index);
    return static_cast<int>(it - offsets_.begin()) - 1;
  }

  // Replaces the local shard. Collective, like the constructor.
  void assign_local(std::vector<V> shard) {
    shard_ = std::move(shard);
    sync_offsets();
  }

  // f(global index, value&) over the elements thread tid owns.
  template <class F>
  void visit_thread(int tid, int threads, F&& f) {
    const std::size_t base = offset();
    detail::for_thread_chunks(shard_.size(), tid, threads, [&](std::size_t i) { f(base + i, shard_[i]); });
  }

  template <class F>
  void visit_thread(int tid, int threads, F&& f) const {
    const std::size_t base = offset();
    detail::for_thread_chunks(shard_.size(), tid, threads,
                              [&](std::size_t i) { f(base + i, static_cast<const V&>(shard_[i])); });
  }

  // fn(global index, value&) once per element, in parallel. Collective.
  template <class Fn>
  void foreach(Fn&& fn) {
    detail::run_checked(*ctx_, [&](int tid) { visit_thread(tid, ctx_->threads(), fn); });
  }

  template <class Fn>
  void foreach(Fn&& fn) const {
    detail::run_checked(*ctx_, [&](int tid) { visit_thread(tid, ctx_->threads(), fn); });
  }

 private:
  void sync_offsets() {
    WireBuffer mine;
    mine.put_varint(shard_.size());
    const auto all = ctx_->all_gather(mine.bytes());
    offsets_.assign(all.size() + 1, 0);
    for (std::size_t r = 0; r < all.size(); ++r) {
      WireBuffer b(all[r]);
      offsets_[r + 1] = offsets_[r] + b.get_varint();
    }
  }

  Context* ctx_;
  std::vector<V> shard_;
  std::vector<std::size_t> offsets_;
};

}  // namespace blaze
