#pragma once

// Reward generators for both feedback models, plus the per-run trace record
// shared with the experiment runner. The stochastic environment draws the
// full reward vector every round from its own stream, so the drawn sequence
// does not depend on which arms the policy plays.

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "combandit/action_set.hpp"
#include "combandit/arm.hpp"
#include "combandit/rng.hpp"

namespace combandit {

struct SemiBanditFeedback {
  std::vector<double> rewards;  // one value per arm coordinate, in arm order
  double regret_increment = 0.0;
};

class StochasticEnv {
 public:
  StochasticEnv(const ActionSet& set, std::vector<double> theta, std::uint64_t seed)
      : theta_(std::move(theta)), rng_(make_stream(seed, kEnvironmentStream)) {
    if (static_cast<int>(theta_.size()) != set.dimension())
      throw std::invalid_argument("StochasticEnv: theta length must match the dimension");
    for (double t : theta_)
      if (!(t >= 0.0 && t <= 1.0))
        throw std::invalid_argument("StochasticEnv: theta must lie in [0,1]");
    mu_star_ = set.argmax_linear(theta_).dot(theta_);
  }

  const std::vector<double>& theta() const { return theta_; }
  double best_value() const { return mu_star_; }

  // Draws the round's full reward vector, reveals the played coordinates,
  // and reports the exact expected gap of the played arm.
  SemiBanditFeedback step(const Arm& arm) {
    if (arm.dimension != static_cast<int>(theta_.size()))
      throw std::invalid_argument("StochasticEnv::step: dimension mismatch");
    draw_.resize(theta_.size());
    for (std::size_t i = 0; i < theta_.size(); ++i)
      draw_[i] = bernoulli(rng_, theta_[i]) ? 1.0 : 0.0;
    SemiBanditFeedback fb;
    fb.rewards.reserve(arm.indices.size());
    for (int i : arm.indices) fb.rewards.push_back(draw_[i]);
    fb.regret_increment = mu_star_ - arm.dot(theta_);
    return fb;
  }

 private:
  std::vector<double> theta_;
  std::mt19937_64 rng_;
  double mu_star_ = 0.0;
  std::vector<double> draw_;
};

// A reward sequence fixed before play begins; feedback is the scalar inner
// product of the played arm with the round's reward vector.
class AdversarialEnv {
 public:
  static AdversarialEnv from_table(std::vector<std::vector<double>> rows) {
    return AdversarialEnv(std::move(rows));
  }

  // Bernoulli rows drawn once up front from the environment stream.
  static AdversarialEnv bernoulli_rows(const std::vector<double>& means, int horizon,
                                       std::uint64_t seed) {
    if (horizon < 1)
      throw std::invalid_argument("AdversarialEnv: horizon must be >= 1");
    for (double p : means)
      if (!(p >= 0.0 && p <= 1.0))
        throw std::invalid_argument("AdversarialEnv: means must lie in [0,1]");
    std::mt19937_64 rng = make_stream(seed, kEnvironmentStream);
    std::vector<std::vector<double>> rows(horizon, std::vector<double>(means.size()));
    for (auto& row : rows)
      for (std::size_t i = 0; i < means.size(); ++i)
        row[i] = bernoulli(rng, means[i]) ? 1.0 : 0.0;
    return AdversarialEnv(std::move(rows));
  }

  int horizon() const { return static_cast<int>(rows_.size()); }
  int dimension() const { return static_cast<int>(rows_.front().size()); }

  const std::vector<double>& row(int n) const {  // n is 1-based
    if (n < 1 || n > horizon())
      throw std::out_of_range("AdversarialEnv::row: round outside horizon");
    return rows_[static_cast<std::size_t>(n) - 1];
  }

  double step(const Arm& arm, int n) const { return arm.dot(row(n)); }

  // Coordinate sums over the first n rounds; the best fixed arm in hindsight
  // is the linear maximizer of these sums.
  std::vector<double> prefix_sums(int n) const {
    if (n < 0 || n > horizon())
      throw std::out_of_range("AdversarialEnv::prefix_sums: round outside horizon");
    std::vector<double> sums(dimension(), 0.0);
    for (int s = 0; s < n; ++s)
      for (int i = 0; i < dimension(); ++i) sums[i] += rows_[s][i];
    return sums;
  }

 private:
  explicit AdversarialEnv(std::vector<std::vector<double>> rows) : rows_(std::move(rows)) {
    if (rows_.empty())
      throw std::invalid_argument("AdversarialEnv: need at least one round");
    const std::size_t d = rows_.front().size();
    if (d == 0) throw std::invalid_argument("AdversarialEnv: empty reward rows");
    for (const auto& row : rows_) {
      if (row.size() != d)
        throw std::invalid_argument("AdversarialEnv: rows must share one length");
      for (double x : row)
        if (!(x >= 0.0 && x <= 1.0))
          throw std::invalid_argument("AdversarialEnv: rewards must lie in [0,1]");
    }
  }

  std::vector<std::vector<double>> rows_;
};

struct RegretTrace {
  std::string policy_id;
  std::uint64_t seed = 0;
  std::string structure;
  std::vector<double> cumulative;  // cumulative regret after rounds 1..T
};

}  // namespace combandit
