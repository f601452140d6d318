#pragma once

// An arm is a subset of basic actions, stored as the sorted list of its
// set coordinates. Canonical order between arms is lexicographic on that
// list, which matches the enumeration order of every structure here.

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace combandit {

struct Arm {
  int dimension = 0;
  std::vector<int> indices;  // sorted ascending, distinct, in [0, dimension)

  int size() const { return static_cast<int>(indices.size()); }

  bool contains(int i) const {
    for (int idx : indices)
      if (idx == i) return true;
    return false;
  }

  std::vector<int> bits() const {
    std::vector<int> b(dimension, 0);
    for (int idx : indices) b[idx] = 1;
    return b;
  }

  // Sum of weights over the arm's coordinates, accumulated in index order so
  // that equal arms always produce bit-identical values.
  double dot(const std::vector<double>& weights) const {
    double s = 0.0;
    for (int idx : indices) s += weights[idx];
    return s;
  }

  friend bool operator==(const Arm& a, const Arm& b) {
    return a.dimension == b.dimension && a.indices == b.indices;
  }
  friend bool operator!=(const Arm& a, const Arm& b) { return !(a == b); }
  friend bool operator<(const Arm& a, const Arm& b) { return a.indices < b.indices; }
};

inline Arm make_arm(int dimension, std::vector<int> indices) {
  Arm a;
  a.dimension = dimension;
  a.indices = std::move(indices);
  for (std::size_t k = 0; k < a.indices.size(); ++k) {
    if (a.indices[k] < 0 || a.indices[k] >= dimension)
      throw std::invalid_argument("make_arm: coordinate out of range");
    if (k > 0 && a.indices[k] <= a.indices[k - 1])
      throw std::invalid_argument("make_arm: coordinates must be sorted and distinct");
  }
  return a;
}

}  // namespace combandit
