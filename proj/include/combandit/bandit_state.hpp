#pragma once

// Sufficient statistics of a semi-bandit run: per-coordinate observation
// counts and running-average means, plus the number of completed rounds.

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "combandit/arm.hpp"

namespace combandit {

class BanditState {
 public:
  explicit BanditState(int dimension)
      : counts_(dimension, 0), means_(dimension, 0.0) {
    if (dimension < 1) throw std::invalid_argument("BanditState: dimension must be >= 1");
  }

  int dimension() const { return static_cast<int>(counts_.size()); }
  std::int64_t round() const { return round_; }
  const std::vector<std::int64_t>& counts() const { return counts_; }
  const std::vector<double>& means() const { return means_; }

  // Records one semi-bandit observation: rewards[k] is the observed value of
  // the arm's k-th coordinate, each in [0,1].
  void update(const Arm& arm, const std::vector<double>& rewards) {
    if (arm.dimension != dimension())
      throw std::invalid_argument("BanditState::update: dimension mismatch");
    if (rewards.size() != arm.indices.size())
      throw std::invalid_argument("BanditState::update: one reward per arm coordinate");
    for (std::size_t k = 0; k < arm.indices.size(); ++k) {
      const double x = rewards[k];
      if (x < 0.0 || x > 1.0)
        throw std::invalid_argument("BanditState::update: rewards must lie in [0,1]");
      const int i = arm.indices[k];
      counts_[i] += 1;
      means_[i] += (x - means_[i]) / static_cast<double>(counts_[i]);
    }
    round_ += 1;
  }

 private:
  std::vector<std::int64_t> counts_;
  std::vector<double> means_;
  std::int64_t round_ = 0;
};

}  // namespace combandit
