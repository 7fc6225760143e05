#include "pafit/weight_index.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

namespace pafit {

namespace {
std::size_t lowbit(std::size_t i) { return i & (~i + 1); }
}  // namespace

void WeightIndex::push_back(std::uint64_t weight) {
  const std::size_t i = tree_.size();
  // tree_[i] covers (i - lowbit(i), i]
  tree_.push_back(weight + (prefix(i - 1) - prefix(i - lowbit(i))));
  total_ += weight;
}

void WeightIndex::add(std::size_t index, std::uint64_t delta) {
  for (std::size_t i = index + 1; i < tree_.size(); i += lowbit(i)) tree_[i] += delta;
  total_ += delta;
}

std::uint64_t WeightIndex::prefix(std::size_t count) const {
  std::uint64_t sum = 0;
  for (std::size_t i = count; i > 0; i -= lowbit(i)) sum += tree_[i];
  return sum;
}

std::size_t WeightIndex::find(std::uint64_t target) const {
  const std::size_t n = size();
  std::size_t pos = 0;
  std::uint64_t rem = target;
  for (std::size_t step = n == 0 ? 0 : std::bit_floor(n); step > 0; step >>= 1) {
    const std::size_t next = pos + step;
    if (next <= n && tree_[next] <= rem) {
      pos = next;
      rem -= tree_[next];
    }
  }
  return pos;
}

std::uint64_t target_from_uniform(double u, std::uint64_t total) {
  if (total == 0) throw std::invalid_argument("categorical draw needs positive total weight");
  const double scaled = std::floor(u * static_cast<double>(total));
  if (!(scaled >= 0.0)) return 0;
  const auto t = static_cast<std::uint64_t>(std::min(scaled, static_cast<double>(total - 1)));
  return std::min(t, total - 1);
}

namespace reference {

std::size_t linear_scan_find(std::span<const std::uint64_t> weights, std::uint64_t target) {
  std::uint64_t running = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    running += weights[i];
    if (running > target) return i;
  }
  return weights.size();
}

}  // namespace reference

}  // namespace pafit
