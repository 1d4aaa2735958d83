#pragma once

// Compact tag-free binary codec. Fields are written back to back in a fixed
// order with no field tags or wire types; see docs/wire-format.md.

#include <array>
#include <bit>
#include <concepts>
#include <cstdint>
#include <cstring>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <type_traits>
#include <utility>
#include <vector>

#include "blaze/error.hpp"

namespace blaze {

using Bytes = std::vector<std::uint8_t>;

class WireBuffer {
 public:
  static constexpr int kMaxVarintBytes = 10;

  WireBuffer() = default;
  explicit WireBuffer(Bytes bytes) : bytes_(std::move(bytes)) {}

  void put_varint(std::uint64_t v) {
    std::uint8_t tmp[kMaxVarintBytes];
    int n = 0;
    while (v >= 0x80) {
      tmp[n++] = static_cast<std::uint8_t>(v | 0x80);
      v >>= 7;
    }
    tmp[n++] = static_cast<std::uint8_t>(v);
    bytes_.insert(bytes_.end(), tmp, tmp + n);
  }

  std::uint64_t get_varint() {
    const std::size_t start = cursor_;
    std::uint64_t result = 0;
    for (int i = 0; i < kMaxVarintBytes; ++i) {
      if (cursor_ >= bytes_.size()) {
        throw DecodeError("truncated varint", start);
      }
      const std::uint8_t b = bytes_[cursor_++];
      // The tenth byte may only contribute the single remaining high bit.
      if (i == kMaxVarintBytes - 1 && b > 1) {
        throw DecodeError("varint overflows 64 bits", start);
      }
      result |= static_cast<std::uint64_t>(b & 0x7f) << (7 * i);
      if ((b & 0x80) == 0) return result;
    }
    throw DecodeError("varint longer than 10 bytes", start);
  }

  void put_zigzag(std::int64_t v) {
    put_varint((static_cast<std::uint64_t>(v) << 1) ^ static_cast<std::uint64_t>(v >> 63));
  }

  std::int64_t get_zigzag() {
    const std::uint64_t u = get_varint();
    return static_cast<std::int64_t>((u >> 1) ^ (~(u & 1) + 1));
  }

  void put_f64(double v) { put_fixed(std::bit_cast<std::uint64_t>(v)); }
  double get_f64() { return std::bit_cast<double>(get_fixed<std::uint64_t>()); }
  void put_f32(float v) { put_fixed(std::bit_cast<std::uint32_t>(v)); }
  float get_f32() { return std::bit_cast<float>(get_fixed<std::uint32_t>()); }

  void put_str(std::string_view s) {
    put_varint(s.size());
    bytes_.insert(bytes_.end(), s.begin(), s.end());
  }

  std::string get_str() {
    const std::size_t start = cursor_;
    const std::uint64_t n = get_varint();
    if (n > remaining()) {
      throw DecodeError("string length " + std::to_string(n) + " exceeds remaining bytes", start);
    }
    std::string s(reinterpret_cast<const char*>(bytes_.data() + cursor_), n);
    cursor_ += n;
    return s;
  }

  void put_raw(std::span<const std::uint8_t> raw) { bytes_.insert(bytes_.end(), raw.begin(), raw.end()); }

  std::span<const std::uint8_t> get_raw(std::size_t n) {
    if (n > remaining()) throw DecodeError("truncated raw block", cursor_);
    std::span<const std::uint8_t> out(bytes_.data() + cursor_, n);
    cursor_ += n;
    return out;
  }

  const Bytes& bytes() const noexcept { return bytes_; }
  Bytes release() noexcept {
    cursor_ = 0;
    return std::exchange(bytes_, {});
  }

  std::size_t size() const noexcept { return bytes_.size(); }
  std::size_t cursor() const noexcept { return cursor_; }
  std::size_t remaining() const noexcept { return bytes_.size() - cursor_; }
  bool exhausted() const noexcept { return cursor_ >= bytes_.size(); }
  void reserve(std::size_t n) { bytes_.reserve(n); }
  void clear() noexcept {
    bytes_.clear();
    cursor_ = 0;
  }

 private:
  template <class U>
  void put_fixed(U bits) {
    std::uint8_t tmp[sizeof(U)];
    for (std::size_t i = 0; i < sizeof(U); ++i) tmp[i] = static_cast<std::uint8_t>(bits >> (8 * i));
    bytes_.insert(bytes_.end(), tmp, tmp + sizeof(U));
  }

  template <class U>
  U get_fixed() {
    if (remaining() < sizeof(U)) throw DecodeError("truncated fixed-width value", cursor_);
    U bits = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) bits |= static_cast<U>(bytes_[cursor_ + i]) << (8 * i);
    cursor_ += sizeof(U);
    return bits;
  }

  Bytes bytes_;
  std::size_t cursor_ = 0;
};

// Number of bytes put_varint(v) writes.
constexpr std::size_t varint_size(std::uint64_t v) noexcept {
  std::size_t n = 1;
  while (v >= 0x80) {
    v >>= 7;
    ++n;
  }
  return n;
}

// ---------------------------------------------------------------------------
// FNV-1a, the partitioning hash. Fixed constants so every worker agrees.

struct Fnv1a {
  static constexpr std::uint64_t kOffset = 0xcbf29ce484222325ULL;
  static constexpr std::uint64_t kPrime = 0x100000001b3ULL;

  std::uint64_t state = kOffset;

  void update(std::uint8_t b) noexcept {
    state ^= b;
    state *= kPrime;
  }
  void update(std::span<const std::uint8_t> bytes) noexcept {
    for (auto b : bytes) update(b);
  }
  void update(std::string_view s) noexcept {
    for (char c : s) update(static_cast<std::uint8_t>(c));
  }
  void update_varint(std::uint64_t v) noexcept {
    while (v >= 0x80) {
      update(static_cast<std::uint8_t>(v | 0x80));
      v >>= 7;
    }
    update(static_cast<std::uint8_t>(v));
  }
};

inline std::uint64_t fnv1a(std::span<const std::uint8_t> bytes) noexcept {
  Fnv1a h;
  h.update(bytes);
  return h.state;
}

// Bit finalizer used to derive in-process slot/shard indices from a key hash.
// Owner ranks use the raw hash; local tables use the mixed bits.
constexpr std::uint64_t mix64(std::uint64_t h) noexcept {
  h ^= h >> 33;
  h *= 0xff51afd7ed558ccdULL;
  h ^= h >> 33;
  h *= 0xc4ceb9fe1a85ec53ULL;
  h ^= h >> 33;
  return h;
}

// ---------------------------------------------------------------------------
// Codecs. Specialize Codec<T> for a custom type, or give the type members
//   void serialize(WireBuffer&) const;
//   static T parse(WireBuffer&);
// and optionally `std::uint64_t hash() const` when it is used as a key.

template <class T>
struct Codec;

template <class T>
concept SelfSerializable = requires(const T& t, WireBuffer& b) {
  t.serialize(b);
  { T::parse(b) } -> std::same_as<T>;
};

template <class T>
concept Encodable = requires(const T& t, WireBuffer& b) {
  Codec<T>::encode(b, t);
  { Codec<T>::decode(b) } -> std::same_as<T>;
};

template <>
struct Codec<bool> {
  static void encode(WireBuffer& b, bool v) { b.put_varint(v ? 1 : 0); }
  static bool decode(WireBuffer& b) {
    const std::size_t at = b.cursor();
    const auto v = b.get_varint();
    if (v > 1) throw DecodeError("invalid bool", at);
    return v == 1;
  }
  static std::uint64_t hash(bool v) noexcept {
    Fnv1a h;
    h.update_varint(v ? 1 : 0);
    return h.state;
  }
};

template <class T>
  requires(std::unsigned_integral<T> && !std::same_as<T, bool>)
struct Codec<T> {
  static void encode(WireBuffer& b, T v) { b.put_varint(v); }
  static T decode(WireBuffer& b) {
    const std::size_t at = b.cursor();
    const std::uint64_t v = b.get_varint();
    if constexpr (sizeof(T) < sizeof(std::uint64_t)) {
      if (v > std::numeric_limits<T>::max()) throw DecodeError("unsigned value out of range", at);
    }
    return static_cast<T>(v);
  }
  static std::uint64_t hash(T v) noexcept {
    Fnv1a h;
    h.update_varint(v);
    return h.state;
  }
};

template <class T>
  requires std::signed_integral<T>
struct Codec<T> {
  static void encode(WireBuffer& b, T v) { b.put_zigzag(v); }
  static T decode(WireBuffer& b) {
    const std::size_t at = b.cursor();
    const std::int64_t v = b.get_zigzag();
    if constexpr (sizeof(T) < sizeof(std::int64_t)) {
      if (v < std::numeric_limits<T>::min() || v > std::numeric_limits<T>::max()) {
        throw DecodeError("signed value out of range", at);
      }
    }
    return static_cast<T>(v);
  }
  static std::uint64_t hash(T v) noexcept {
    const auto s = static_cast<std::int64_t>(v);
    Fnv1a h;
    h.update_varint((static_cast<std::uint64_t>(s) << 1) ^ static_cast<std::uint64_t>(s >> 63));
    return h.state;
  }
};

template <>
struct Codec<double> {
  static void encode(WireBuffer& b, double v) { b.put_f64(v); }
  static double decode(WireBuffer& b) { return b.get_f64(); }
};

template <>
struct Codec<float> {
  static void encode(WireBuffer& b, float v) { b.put_f32(v); }
  static float decode(WireBuffer& b) { return b.get_f32(); }
};

template <>
struct Codec<std::string> {
  static void encode(WireBuffer& b, std::string_view v) { b.put_str(v); }
  static std::string decode(WireBuffer& b) { return b.get_str(); }
  static std::uint64_t hash(std::string_view v) noexcept {
    Fnv1a h;
    h.update_varint(v.size());
    h.update(v);
    return h.state;
  }
};

template <Encodable A, Encodable B>
struct Codec<std::pair<A, B>> {
  static void encode(WireBuffer& b, const std::pair<A, B>& v) {
    Codec<A>::encode(b, v.first);
    Codec<B>::encode(b, v.second);
  }
  static std::pair<A, B> decode(WireBuffer& b) {
    A first = Codec<A>::decode(b);
    B second = Codec<B>::decode(b);
    return {std::move(first), std::move(second)};
  }
};

template <Encodable... Ts>
struct Codec<std::tuple<Ts...>> {
  static void encode(WireBuffer& b, const std::tuple<Ts...>& v) {
    std::apply([&](const auto&... xs) { (Codec<std::decay_t<decltype(xs)>>::encode(b, xs), ...); }, v);
  }
  static std::tuple<Ts...> decode(WireBuffer& b) {
    // Braced init guarantees left-to-right evaluation.
    return std::tuple<Ts...>{Codec<Ts>::decode(b)...};
  }
};

template <Encodable T>
struct Codec<std::vector<T>> {
  static void encode(WireBuffer& b, const std::vector<T>& v) {
    b.put_varint(v.size());
    for (const auto& x : v) Codec<T>::encode(b, x);
  }
  static std::vector<T> decode(WireBuffer& b) {
    const std::size_t at = b.cursor();
    const std::uint64_t n = b.get_varint();
    // Every element takes at least one byte; reject lengths that cannot fit.
    if (n > b.remaining()) throw DecodeError("sequence length exceeds remaining bytes", at);
    std::vector<T> out;
    out.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) out.push_back(Codec<T>::decode(b));
    return out;
  }
};

template <Encodable T, std::size_t N>
struct Codec<std::array<T, N>> {
  static void encode(WireBuffer& b, const std::array<T, N>& v) {
    for (const auto& x : v) Codec<T>::encode(b, x);
  }
  static std::array<T, N> decode(WireBuffer& b) {
    std::array<T, N> out{};
    for (auto& x : out) x = Codec<T>::decode(b);
    return out;
  }
};

template <SelfSerializable T>
struct Codec<T> {
  static void encode(WireBuffer& b, const T& v) { v.serialize(b); }
  static T decode(WireBuffer& b) { return T::parse(b); }
};

template <class T, class U>
void encode(WireBuffer& b, const U& v) {
  Codec<T>::encode(b, v);
}

template <class T>
T decode(WireBuffer& b) {
  return Codec<T>::decode(b);
}

// Key and value bytes back to back with no separator.
template <class K, class V>
void encode_pair(WireBuffer& b, const K& k, const V& v) {
  Codec<K>::encode(b, k);
  Codec<V>::encode(b, v);
}

template <class K, class V>
std::pair<K, V> decode_pair(WireBuffer& b) {
  K k = Codec<K>::decode(b);
  V v = Codec<V>::decode(b);
  return {std::move(k), std::move(v)};
}

// ---------------------------------------------------------------------------
// Key hashing. Deterministic across processes and runs.

namespace detail {

template <class K>
concept HasCodecHash = requires(const K& k) {
  { Codec<K>::hash(k) } -> std::convertible_to<std::uint64_t>;
};

template <class K>
concept HasMemberHash = requires(const K& k) {
  { k.hash() } -> std::convertible_to<std::uint64_t>;
};

}  // namespace detail

template <class K>
std::uint64_t key_hash(const K& k) {
  if constexpr (detail::HasCodecHash<K>) {
    return Codec<K>::hash(k);
  } else if constexpr (detail::HasMemberHash<K>) {
    return k.hash();
  } else {
    thread_local WireBuffer scratch;
    scratch.clear();
    Codec<K>::encode(scratch, k);
    return fnv1a(scratch.bytes());
  }
}

inline std::uint64_t key_hash(std::string_view k) noexcept { return Codec<std::string>::hash(k); }

// Hash functor for std containers keyed by K; transparent for string keys.
template <class K>
struct KeyHash {
  std::size_t operator()(const K& k) const { return static_cast<std::size_t>(mix64(key_hash(k))); }
};

template <>
struct KeyHash<std::string> {
  using is_transparent = void;
  std::size_t operator()(std::string_view k) const noexcept { return static_cast<std::size_t>(mix64(key_hash(k))); }
};

}  // namespace blaze
