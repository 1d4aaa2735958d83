#pragma once

// Distributed top-k selection.
//
// Each thread keeps a bounded heap of its k best elements (worst on top), the
// thread results are merged pairwise, and workers combine their lists with a
// tree reduction. Expected time is O(n + k log k) on randomly ordered input:
// after the heap fills, an element displaces the top only O(k log(n / k))
// times in expectation. The worst case (input sorted ascending by priority)
// is O(n log k). Space is O(k) per thread.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "blaze/detail/region.hpp"
#include "blaze/dist_vector.hpp"
#include "blaze/wire.hpp"

namespace blaze {

struct TopkStats {
  // Largest number of candidate elements held at once by this worker (thread
  // heaps plus merge buffers).
  std::size_t peak_aux_elements = 0;
};

namespace detail {

template <class V>
struct Ranked {
  std::uint64_t index;
  V value;
};

// Strict total order: compare first, then lower global index (which orders by
// rank, then local index).
template <class V, class Compare>
struct RankedBefore {
  const Compare* compare;
  bool operator()(const Ranked<V>& a, const Ranked<V>& b) const {
    if ((*compare)(a.value, b.value)) return true;
    if ((*compare)(b.value, a.value)) return false;
    return a.index < b.index;
  }
};

template <class V, class Before>
std::vector<Ranked<V>> merge_truncated(std::vector<Ranked<V>> a, std::vector<Ranked<V>> b, std::size_t k,
                                       const Before& before) {
  std::vector<Ranked<V>> out;
  out.reserve(std::min(k, a.size() + b.size()));
  auto ia = a.begin(), ib = b.begin();
  while (out.size() < k && (ia != a.end() || ib != b.end())) {
    if (ib == b.end() || (ia != a.end() && !before(*ib, *ia))) {
      out.push_back(std::move(*ia++));
    } else {
      out.push_back(std::move(*ib++));
    }
  }
  return out;
}

template <class V>
Bytes encode_ranked(const std::vector<Ranked<V>>& list) {
  WireBuffer b;
  b.put_varint(list.size());
  for (const auto& r : list) {
    b.put_varint(r.index);
    Codec<V>::encode(b, r.value);
  }
  return b.release();
}

template <class V>
std::vector<Ranked<V>> decode_ranked(Bytes bytes) {
  WireBuffer b(std::move(bytes));
  const std::uint64_t n = b.get_varint();
  std::vector<Ranked<V>> out;
  out.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    const std::uint64_t index = b.get_varint();
    out.push_back({index, Codec<V>::decode(b)});
  }
  return out;
}

}  // namespace detail

// The k elements ranked first by `compare` (compare(a, b) true when a ranks
// ahead of b), in rank order, with (global index) breaking ties. Paired with
// each element's global index. Every worker receives the result. Collective.
template <class V, class Compare = std::greater<V>>
std::vector<std::pair<std::size_t, V>> topk_indexed(const DistVector<V>& vec, std::size_t k,
                                                    Compare compare = Compare{}, TopkStats* stats = nullptr) {
  using Entry = detail::Ranked<V>;
  Context& ctx = vec.context();
  const detail::RankedBefore<V, Compare> before{&compare};
  const int threads = ctx.threads();
  std::vector<std::vector<Entry>> heaps(threads);

  if (k > 0) {
    detail::run_checked(ctx, [&](int tid) {
      auto& heap = heaps[tid];
      heap.reserve(std::min(k, vec.local_size()));
      vec.visit_thread(tid, threads, [&](std::size_t index, const V& value) {
        if (heap.size() < k) {
          heap.push_back({index, value});
          std::push_heap(heap.begin(), heap.end(), before);
        } else if (const Entry& worst = heap.front();
                   compare(value, worst.value) || (!compare(worst.value, value) && index < worst.index)) {
          std::pop_heap(heap.begin(), heap.end(), before);
          heap.back() = {index, value};
          std::push_heap(heap.begin(), heap.end(), before);
        }
      });
      std::sort_heap(heap.begin(), heap.end(), before);
    });
  } else {
    ctx.check_job(nullptr);
  }

  std::size_t held = 0;
  for (const auto& h : heaps) held += h.size();
  std::size_t peak = held;
  // Pairwise merge of the sorted thread lists.
  for (int step = 1; step < threads; step <<= 1) {
    for (int t = 0; t + step < threads; t += 2 * step) {
      const std::size_t before_merge = heaps[t].size() + heaps[t + step].size();
      peak = std::max(peak, held + std::min(k, before_merge));
      heaps[t] = detail::merge_truncated(std::move(heaps[t]), std::move(heaps[t + step]), k, before);
      heaps[t + step] = {};
      held = held - before_merge + heaps[t].size();
    }
  }

  Bytes merged = ctx.all_reduce(detail::encode_ranked(heaps[0]), [&](Bytes a, Bytes b) {
    auto la = detail::decode_ranked<V>(std::move(a));
    auto lb = detail::decode_ranked<V>(std::move(b));
    const std::size_t inputs = la.size() + lb.size();
    auto m = detail::merge_truncated(std::move(la), std::move(lb), k, before);
    peak = std::max(peak, inputs + m.size());
    return detail::encode_ranked(m);
  });
  if (stats) stats->peak_aux_elements = peak;

  std::vector<std::pair<std::size_t, V>> out;
  for (auto& e : detail::decode_ranked<V>(std::move(merged))) out.emplace_back(e.index, std::move(e.value));
  return out;
}

template <class V, class Compare = std::greater<V>>
std::vector<V> topk(const DistVector<V>& vec, std::size_t k, Compare compare = Compare{}, TopkStats* stats = nullptr) {
  std::vector<V> out;
  for (auto& [index, value] : topk_indexed(vec, k, std::move(compare), stats)) out.push_back(std::move(value));
  return out;
}

}  // namespace blaze
