#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace pafit {

/// Fenwick tree over non-negative integer weights with O(log n) append,
/// point update and inverse-prefix search. Integer weights keep every prefix
/// sum exact, so the tree and a linear scan agree bit for bit.
class WeightIndex {
 public:
  WeightIndex() = default;

  void reserve(std::size_t n) { tree_.reserve(n + 1); }
  std::size_t size() const { return tree_.size() - 1; }
  std::uint64_t total() const { return total_; }

  void push_back(std::uint64_t weight);
  void add(std::size_t index, std::uint64_t delta);

  /// Sum of the first `count` weights.
  std::uint64_t prefix(std::size_t count) const;
  std::uint64_t weight(std::size_t index) const { return prefix(index + 1) - prefix(index); }

  /// Smallest index i with prefix(i + 1) > target. Requires target < total().
  std::size_t find(std::uint64_t target) const;

 private:
  std::vector<std::uint64_t> tree_{0};  // 1-based; tree_[0] unused
  std::uint64_t total_ = 0;
};

/// floor(u * total) for u in [0, 1), clamped into [0, total).
std::uint64_t target_from_uniform(double u, std::uint64_t total);

__extension__ using uint128 = unsigned __int128;

/// floor(bits * total / 2^53), exact in 128-bit arithmetic.
inline std::uint64_t target_from_bits(std::uint64_t bits53, std::uint64_t total) {
  return static_cast<std::uint64_t>((static_cast<uint128>(bits53) * total) >> 53);
}

/// Categorical draw proportional to the indexed weights; one uniform.
inline std::size_t sample_categorical(const WeightIndex& index, double u) {
  return index.find(target_from_uniform(u, index.total()));
}

namespace reference {

/// Serial oracle for WeightIndex::find: running sum over the weights.
std::size_t linear_scan_find(std::span<const std::uint64_t> weights, std::uint64_t target);

inline std::size_t sample_categorical(std::span<const std::uint64_t> weights, std::uint64_t total, double u) {
  return linear_scan_find(weights, target_from_uniform(u, total));
}

}  // namespace reference

}  // namespace pafit
