#pragma once

#include <cstddef>
#include <cstdint>
#include <type_traits>
#include <utility>
#include <vector>

#include "blaze/wire.hpp"

namespace blaze::detail {

// Per-thread open-addressing table absorbing emits without synchronization.
// Linear probing is bounded; when every probed slot holds another key, the
// pair in the home slot is evicted to the node-local table and the slot is
// handed to the new key. Frequent keys therefore tend to stay resident.
template <class K, class V>
class ThreadCache {
 public:
  static constexpr std::size_t kCapacity = std::size_t{1} << 16;
  static constexpr int kProbes = 4;

  struct Slot {
    std::uint64_t hash = 0;
    K key{};
    V value{};
    bool used = false;
  };

  ThreadCache() : slots_(kCapacity) {}

  // Reduces (key, value) into the cache. `evict(hash, K&&, V&&)` receives
  // displaced pairs.
  template <class KeyArg, class ValueArg, class Reduce, class Evict>
  void emit(std::uint64_t hash, KeyArg&& key, ValueArg&& value, Reduce& reduce, Evict&& evict) {
    const std::size_t home = static_cast<std::size_t>(mix64(hash)) & (kCapacity - 1);
    for (int p = 0; p < kProbes; ++p) {
      Slot& s = slots_[(home + p) & (kCapacity - 1)];
      if (!s.used) {
        fill(s, hash, std::forward<KeyArg>(key), std::forward<ValueArg>(value));
        ++occupied_;
        return;
      }
      if (s.hash == hash && s.key == key) {
        if constexpr (std::is_same_v<std::decay_t<ValueArg>, V>) {
          reduce(s.value, value);
        } else {
          reduce(s.value, static_cast<const V&>(V(std::forward<ValueArg>(value))));
        }
        return;
      }
    }
    Slot& victim = slots_[home];
    ++evictions_;
    evict(victim.hash, std::move(victim.key), std::move(victim.value));
    fill(victim, hash, std::forward<KeyArg>(key), std::forward<ValueArg>(value));
  }

  // Hands every resident pair to f(hash, K&&, V&&) and empties the cache.
  template <class F>
  void drain(F&& f) {
    for (auto& s : slots_) {
      if (!s.used) continue;
      f(s.hash, std::move(s.key), std::move(s.value));
      s.used = false;
    }
    occupied_ = 0;
  }

  const V* find(const K& key) const {
    const std::uint64_t hash = key_hash(key);
    const std::size_t home = static_cast<std::size_t>(mix64(hash)) & (kCapacity - 1);
    for (int p = 0; p < kProbes; ++p) {
      const Slot& s = slots_[(home + p) & (kCapacity - 1)];
      if (s.used && s.hash == hash && s.key == key) return &s.value;
    }
    return nullptr;
  }

  std::size_t occupied() const noexcept { return occupied_; }
  std::uint64_t evictions() const noexcept { return evictions_; }

 private:
  template <class KeyArg, class ValueArg>
  static void fill(Slot& s, std::uint64_t hash, KeyArg&& key, ValueArg&& value) {
    s.hash = hash;
    if constexpr (std::is_same_v<std::decay_t<KeyArg>, K>) {
      s.key = std::forward<KeyArg>(key);
    } else {
      s.key = K(std::forward<KeyArg>(key));
    }
    s.value = V(std::forward<ValueArg>(value));
    s.used = true;
  }

  std::vector<Slot> slots_;
  std::size_t occupied_ = 0;
  std::uint64_t evictions_ = 0;
};

}  // namespace blaze::detail
