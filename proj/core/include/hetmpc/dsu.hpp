#pragma once

#include <cstdint>
#include <numeric>
#include <vector>

namespace hetmpc {

// Union-find that tracks the smallest member of each set.
class Dsu {
 public:
  explicit Dsu(std::size_t n = 0) { reset(n); }

  void reset(std::size_t n) {
    parent_.resize(n);
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
    min_.resize(n);
    std::iota(min_.begin(), min_.end(), std::size_t{0});
    size_.assign(n, 1);
  }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
    min_[a] = std::min(min_[a], min_[b]);
    return true;
  }

  std::size_t min_member(std::size_t x) { return min_[find(x)]; }
  std::size_t set_size(std::size_t x) { return size_[find(x)]; }
  std::size_t size() const { return parent_.size(); }

 private:
  std::vector<std::size_t> parent_;
  std::vector<std::size_t> min_;
  std::vector<std::size_t> size_;
};

}  // namespace hetmpc
