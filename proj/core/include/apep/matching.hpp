#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

namespace apep {

/// Dense weight matrix between `left` and `right` vertices. Missing edges are
/// stored as `forbidden` and are never selected.
class WeightedBipartite {
public:
  static constexpr std::int64_t forbidden = std::numeric_limits<std::int64_t>::min();

  WeightedBipartite() = default;
  explicit WeightedBipartite(std::size_t n) : WeightedBipartite(n, n) {}
  WeightedBipartite(std::size_t left, std::size_t right)
      : left_(left), right_(right), w_(left * right, forbidden) {}

  std::size_t left() const { return left_; }
  std::size_t right() const { return right_; }
  bool square() const { return left_ == right_; }

  std::int64_t weight(std::size_t i, std::size_t j) const { return w_[i * right_ + j]; }
  bool allowed(std::size_t i, std::size_t j) const { return weight(i, j) != forbidden; }
  void set(std::size_t i, std::size_t j, std::int64_t w) { w_[i * right_ + j] = w; }
  void forbid(std::size_t i, std::size_t j) { set(i, j, forbidden); }

private:
  std::size_t left_ = 0;
  std::size_t right_ = 0;
  std::vector<std::int64_t> w_;
};

struct Matching {
  /// mate[i] is the right vertex matched to left vertex i.
  std::vector<std::size_t> mate;
  std::int64_t total = 0;
};

/// Maximum total weight perfect matching of a square graph using only allowed
/// edges (Hungarian method, O(n^3)). nullopt when no perfect matching exists.
std::optional<Matching> max_weight_perfect_matching(const WeightedBipartite& g);

/// Rectangular variant: every left vertex gets a distinct right vertex
/// (left <= right), maximizing the total over allowed edges. O(left^2 * right).
/// Weights may be negative here.
std::optional<Matching> max_weight_left_matching(const WeightedBipartite& g);

}  // namespace apep
