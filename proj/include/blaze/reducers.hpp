#pragma once

// Built-in reducers. A reducer merges a new value into an existing one:
//   void operator()(V& existing, const V& incoming) const;
// It must be associative and commutative: eager reduction and the shuffle
// merge partial results in no fixed order.

#include <algorithm>
#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <vector>

#include "blaze/error.hpp"

namespace blaze::reducers {

namespace detail {

template <class T, class Op>
void elementwise_compound(std::vector<T>& a, const std::vector<T>& b, Op op);
template <class T, std::size_t N, class Op>
void elementwise_compound(std::array<T, N>& a, const std::array<T, N>& b, Op op);
template <class A, class B, class Op>
void elementwise_compound(std::pair<A, B>& a, const std::pair<A, B>& b, Op op);

template <class V, class Op>
void elementwise(V& a, const V& b, Op op) {
  if constexpr (std::is_arithmetic_v<V>) {
    op(a, b);
  } else {
    elementwise_compound(a, b, op);
  }
}

template <class T, class Op>
void elementwise_compound(std::vector<T>& a, const std::vector<T>& b, Op op) {
  if (a.empty()) {
    a = b;
    return;
  }
  if (b.empty()) return;
  if (a.size() != b.size()) {
    throw JobError("reducer applied to vectors of different lengths " + std::to_string(a.size()) + " and " +
                   std::to_string(b.size()));
  }
  for (std::size_t i = 0; i < a.size(); ++i) elementwise(a[i], b[i], op);
}

template <class T, std::size_t N, class Op>
void elementwise_compound(std::array<T, N>& a, const std::array<T, N>& b, Op op) {
  for (std::size_t i = 0; i < N; ++i) elementwise(a[i], b[i], op);
}

template <class A, class B, class Op>
void elementwise_compound(std::pair<A, B>& a, const std::pair<A, B>& b, Op op) {
  elementwise(a.first, b.first, op);
  elementwise(a.second, b.second, op);
}

}  // namespace detail

struct Sum {
  static constexpr std::string_view name = "sum";
  template <class V>
  void operator()(V& a, const V& b) const {
    detail::elementwise(a, b, [](auto& x, const auto& y) { x += y; });
  }
};

struct Prod {
  static constexpr std::string_view name = "prod";
  template <class V>
  void operator()(V& a, const V& b) const {
    detail::elementwise(a, b, [](auto& x, const auto& y) { x *= y; });
  }
};

struct Min {
  static constexpr std::string_view name = "min";
  template <class V>
  void operator()(V& a, const V& b) const {
    detail::elementwise(a, b, [](auto& x, const auto& y) {
      if (y < x) x = y;
    });
  }
};

struct Max {
  static constexpr std::string_view name = "max";
  template <class V>
  void operator()(V& a, const V& b) const {
    detail::elementwise(a, b, [](auto& x, const auto& y) {
      if (x < y) x = y;
    });
  }
};

// Calls f with the built-in reducer called `name`.
template <class F>
decltype(auto) with_builtin(std::string_view name, F&& f) {
  if (name == Sum::name) return f(Sum{});
  if (name == Prod::name) return f(Prod{});
  if (name == Min::name) return f(Min{});
  if (name == Max::name) return f(Max{});
  throw UsageError("unknown reducer '" + std::string(name) + "' (expected sum, prod, min, or max)");
}

}  // namespace blaze::reducers
