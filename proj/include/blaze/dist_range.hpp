#pragma once

#include <concepts>
#include <cstddef>

#include "blaze/detail/partition.hpp"
#include "blaze/detail/region.hpp"
#include "blaze/error.hpp"
#include "blaze/transport.hpp"

namespace blaze {

// The values start, start + step, ... strictly below end. Only the bounds are
// stored; each worker owns a contiguous block of element indices.
template <std::integral V>
class DistRange {
 public:
  DistRange(Context& ctx, V start, V end, V step = 1) : ctx_(&ctx), start_(start), end_(end), step_(step) {
    if (step <= 0) throw UsageError("DistRange step must be positive");
  }

  V start() const noexcept { return start_; }
  V end() const noexcept { return end_; }
  V step() const noexcept { return step_; }
  Context& context() const noexcept { return *ctx_; }

  std::size_t size() const noexcept {
    if (end_ <= start_) return 0;
    const auto span = static_cast<std::size_t>(end_ - start_);
    const auto st = static_cast<std::size_t>(step_);
    return (span + st - 1) / st;
  }

  V at(std::size_t index) const noexcept { return static_cast<V>(start_ + static_cast<V>(index) * step_); }

  // Global element indices [first, second) owned by this worker.
  std::pair<std::size_t, std::size_t> local_range() const {
    return detail::block_range(size(), ctx_->rank(), ctx_->size());
  }

  // f(value) for each element owned by thread tid of this worker.
  template <class F>
  void visit_thread(int tid, int threads, F&& f) const {
    const auto [lo, hi] = local_range();
    detail::for_thread_chunks(hi - lo, tid, threads, [&](std::size_t i) { f(at(lo + i)); });
  }

  // fn(value) once per element, on the worker's threads. Collective.
  template <class Fn>
  void foreach(Fn&& fn) const {
    detail::run_checked(*ctx_, [&](int tid) { visit_thread(tid, ctx_->threads(), fn); });
  }

 private:
  Context* ctx_;
  V start_;
  V end_;
  V step_;
};

}  // namespace blaze
