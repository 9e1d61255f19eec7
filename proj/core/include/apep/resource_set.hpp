#pragma once

#include <bit>
#include <cstdint>
#include <initializer_list>
#include <vector>

namespace apep {

using UserId = std::uint32_t;
using ResourceId = std::uint32_t;

inline constexpr std::size_t kMaxResources = 64;

/// A subset of the resource universe, stored as a 64-bit mask.
class ResourceSet {
public:
  constexpr ResourceSet() = default;
  constexpr explicit ResourceSet(std::uint64_t bits) : bits_(bits) {}
  constexpr ResourceSet(std::initializer_list<ResourceId> ids) {
    for (auto r : ids) bits_ |= bit(r);
  }

  static constexpr ResourceSet full(std::size_t k) {
    return ResourceSet(k >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << k) - 1);
  }
  static constexpr ResourceSet single(ResourceId r) { return ResourceSet(bit(r)); }

  constexpr std::uint64_t bits() const { return bits_; }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr std::size_t size() const { return static_cast<std::size_t>(std::popcount(bits_)); }
  constexpr bool contains(ResourceId r) const { return (bits_ >> r) & 1U; }
  constexpr bool contains(ResourceSet s) const { return (s.bits_ & ~bits_) == 0; }
  constexpr bool intersects(ResourceSet s) const { return (bits_ & s.bits_) != 0; }

  constexpr void insert(ResourceId r) { bits_ |= bit(r); }
  constexpr void erase(ResourceId r) { bits_ &= ~bit(r); }

  constexpr ResourceSet operator|(ResourceSet o) const { return ResourceSet(bits_ | o.bits_); }
  constexpr ResourceSet operator&(ResourceSet o) const { return ResourceSet(bits_ & o.bits_); }
  constexpr ResourceSet operator-(ResourceSet o) const { return ResourceSet(bits_ & ~o.bits_); }
  constexpr ResourceSet& operator|=(ResourceSet o) { bits_ |= o.bits_; return *this; }
  constexpr ResourceSet& operator&=(ResourceSet o) { bits_ &= o.bits_; return *this; }

  constexpr auto operator<=>(const ResourceSet&) const = default;

  // Smallest member; undefined on the empty set.
  constexpr ResourceId front() const { return static_cast<ResourceId>(std::countr_zero(bits_)); }

  std::vector<ResourceId> members() const {
    std::vector<ResourceId> out;
    out.reserve(size());
    for (auto b = bits_; b != 0; b &= b - 1) out.push_back(static_cast<ResourceId>(std::countr_zero(b)));
    return out;
  }

  template <typename Fn>
  void for_each(Fn&& fn) const {
    for (auto b = bits_; b != 0; b &= b - 1) fn(static_cast<ResourceId>(std::countr_zero(b)));
  }

private:
  static constexpr std::uint64_t bit(ResourceId r) { return std::uint64_t{1} << r; }

  std::uint64_t bits_ = 0;
};

}  // namespace apep
