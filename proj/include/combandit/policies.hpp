#pragma once

// Index policies for the stochastic semi-bandit setting.
//
// Two confidence indexes are used. index_c adds a closed-form bonus
//   c_M = M^T means + sqrt((f_n / 2) * sum_{i in M} 1 / t_i),
// while index_b solves the budgeted maximization
//   b_M = max { sum_i q_i : sum_{i in M} t_i * kl(mean_i, q_i) <= f_n }
// through the one-dimensional line search in kl.hpp. b_M <= c_M always;
// arms containing an unobserved coordinate take index +infinity.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "combandit/action_set.hpp"
#include "combandit/arm.hpp"
#include "combandit/bandit_state.hpp"
#include "combandit/kl.hpp"

namespace combandit {

enum class RateMode { Practical, Theoretical };

// Exploration budget f(n). Practical mode uses log(n); theoretical mode uses
// log(n) + 4*m*log(max(1, log(n))), the guard keeping it defined for n < 3.
struct ExplorationRate {
  RateMode mode = RateMode::Practical;
  int m = 1;

  double operator()(std::int64_t n) const {
    if (n < 1) throw std::invalid_argument("ExplorationRate: round must be >= 1");
    const double logn = std::log(static_cast<double>(n));
    if (mode == RateMode::Practical) return logn;
    return logn + 4.0 * static_cast<double>(m) * std::log(std::max(1.0, logn));
  }
};

inline double index_c(const BanditState& state, const Arm& arm, double f_n) {
  if (!(f_n >= 0.0)) throw std::invalid_argument("index_c: f_n must be >= 0");
  double mean_sum = 0.0, inv_counts = 0.0;
  for (int i : arm.indices) {
    const std::int64_t t = state.counts()[i];
    if (t == 0) return kInf;
    mean_sum += state.means()[i];
    inv_counts += 1.0 / static_cast<double>(t);
  }
  return mean_sum + std::sqrt(0.5 * f_n * inv_counts);
}

inline double index_b(const BanditState& state, const Arm& arm, double f_n,
                      double tolerance = 1e-9) {
  if (!(f_n >= 0.0)) throw std::invalid_argument("index_b: f_n must be >= 0");
  LineSearchInput input;
  input.budget = f_n;
  double ones = 0.0;
  double mean_sum = 0.0;
  for (int i : arm.indices) {
    const std::int64_t t = state.counts()[i];
    if (t == 0) return kInf;
    const double w = state.means()[i];
    mean_sum += w;
    if (w == 1.0)
      ones += 1.0;
    else
      input.pairs.push_back({w, static_cast<double>(t)});
  }
  if (input.pairs.empty()) return static_cast<double>(arm.size());
  if (f_n == 0.0) return mean_sum;
  const double lambda_star = solve_budget(input, tolerance);
  double value = ones;
  for (const auto& pr : input.pairs) value += g_root(lambda_star, pr.mean, pr.count);
  return value;
}

class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::string name() const = 0;
  // Chooses the arm to play at round n (1-based); state holds the statistics
  // of rounds 1..n-1.
  virtual Arm select(const BanditState& state, const ActionSet& set, std::int64_t n) = 0;
};

namespace detail {

// Canonical-first arm containing an unobserved coordinate, if any.
inline const Arm* forced_exploration_arm(const BanditState& state, const ActionSet& set) {
  bool any_unpulled = false;
  for (std::int64_t t : state.counts())
    if (t == 0) {
      any_unpulled = true;
      break;
    }
  if (!any_unpulled) return nullptr;
  for (const Arm& a : set.arms())
    for (int i : a.indices)
      if (state.counts()[i] == 0) return &a;
  return nullptr;
}

}  // namespace detail

// Exhaustive argmax of index_b over the arm set. Arms are screened by their
// index_c value (a valid upper bound on index_b), so the line search only
// runs for arms that can still beat the current best.
class Escb1 final : public Policy {
 public:
  Escb1(ExplorationRate rate, double tolerance) : rate_(rate), tolerance_(tolerance) {}
  std::string name() const override { return "escb1"; }

  Arm select(const BanditState& state, const ActionSet& set, std::int64_t n) override {
    if (const Arm* forced = detail::forced_exploration_arm(state, set)) return *forced;
    const double f_n = rate_(n);
    const std::size_t count = set.size();
    std::vector<double> c_values(count);
    for (std::size_t k = 0; k < count; ++k)
      c_values[k] = index_c(state, set.arms()[k], f_n);
    std::vector<std::size_t> order(count);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (c_values[a] != c_values[b]) return c_values[a] > c_values[b];
      return a < b;
    });
    double best_b = -kInf;
    std::size_t best_idx = 0;
    bool have_best = false;
    for (std::size_t k : order) {
      if (have_best && c_values[k] < best_b) break;
      const double b = index_b(state, set.arms()[k], f_n, tolerance_);
      if (!have_best || b > best_b || (b == best_b && k < best_idx)) {
        best_b = b;
        best_idx = k;
        have_best = true;
      }
    }
    return set.arms()[best_idx];
  }

 private:
  ExplorationRate rate_;
  double tolerance_;
};

// Exhaustive argmax of index_c over the arm set.
class Escb2 final : public Policy {
 public:
  explicit Escb2(ExplorationRate rate) : rate_(rate) {}
  std::string name() const override { return "escb2"; }

  Arm select(const BanditState& state, const ActionSet& set, std::int64_t n) override {
    if (const Arm* forced = detail::forced_exploration_arm(state, set)) return *forced;
    const double f_n = rate_(n);
    std::size_t best = 0;
    double best_val = -kInf;
    for (std::size_t k = 0; k < set.size(); ++k) {
      const double v = index_c(state, set.arms()[k], f_n);
      if (v > best_val) {
        best_val = v;
        best = k;
      }
    }
    return set.arms()[best];
  }

 private:
  ExplorationRate rate_;
};

enum class EpochIndex { IndexB, IndexC };

// Lazy variant: the index argmax is recomputed only at epoch boundaries
// N_1 < N_2 < ...; between boundaries the empirical leader is played.
// On leader agreement the boundary gap doubles, otherwise it resets to 1.
class EpochEscb final : public Policy {
 public:
  EpochEscb(ExplorationRate rate, double tolerance, EpochIndex index_kind = EpochIndex::IndexC)
      : rate_(rate), index_kind_(index_kind),
        inner_(index_kind == EpochIndex::IndexB
                   ? std::unique_ptr<Policy>(new Escb1(rate, tolerance))
                   : std::unique_ptr<Policy>(new Escb2(rate))) {}

  std::string name() const override { return "epoch-escb"; }

  Arm select(const BanditState& state, const ActionSet& set, std::int64_t n) override {
    const Arm leader = set.argmax_linear(state.means());
    if (have_leader_ && leader != prev_leader_) ++leader_changes_;
    prev_leader_ = leader;
    have_leader_ = true;
    if (n != next_bound_) return leader;
    ++boundary_count_;
    const Arm chosen = inner_->select(state, set, n);
    const std::int64_t gap = next_bound_ - prev_bound_;
    const std::int64_t next =
        chosen == leader ? next_bound_ + std::max<std::int64_t>(1, 2 * gap)
                         : next_bound_ + 1;
    prev_bound_ = next_bound_;
    next_bound_ = next;
    return chosen;
  }

  std::int64_t boundary_count() const { return boundary_count_; }
  std::int64_t leader_changes() const { return leader_changes_; }

 private:
  ExplorationRate rate_;
  EpochIndex index_kind_;
  std::unique_ptr<Policy> inner_;
  std::int64_t prev_bound_ = 1;  // N_{k-1}, with N_0 = 1
  std::int64_t next_bound_ = 1;  // N_k, with N_1 = 1
  std::int64_t boundary_count_ = 0;
  std::int64_t leader_changes_ = 0;
  Arm prev_leader_;
  bool have_leader_ = false;
};

// Per-coordinate UCB baselines: the arm maximizing the sum of per-action
// indexes mean_i + sqrt(scale * log(n) / t_i), via argmax_linear.
class PerActionUcb final : public Policy {
 public:
  enum class Flavor { Cucb, Llr };
  PerActionUcb(Flavor flavor, int m) : flavor_(flavor), m_(m) {}

  std::string name() const override { return flavor_ == Flavor::Cucb ? "cucb" : "llr"; }

  Arm select(const BanditState& state, const ActionSet& set, std::int64_t n) override {
    const double logn = std::log(static_cast<double>(n));
    const double scale = flavor_ == Flavor::Cucb ? 1.5 : static_cast<double>(m_ + 1);
    std::vector<double> w(set.dimension());
    for (int i = 0; i < set.dimension(); ++i) {
      const std::int64_t t = state.counts()[i];
      w[i] = t == 0 ? kInf
                    : state.means()[i] + std::sqrt(scale * logn / static_cast<double>(t));
    }
    return set.argmax_linear(w);
  }

 private:
  Flavor flavor_;
  int m_;
};

inline std::unique_ptr<Policy> make_stochastic_policy(const std::string& id,
                                                      const ActionSet& set,
                                                      RateMode rate_mode,
                                                      double index_tolerance,
                                                      EpochIndex epoch_index = EpochIndex::IndexC) {
  const ExplorationRate rate{rate_mode, set.arm_size()};
  if (id == "escb1") return std::make_unique<Escb1>(rate, index_tolerance);
  if (id == "escb2") return std::make_unique<Escb2>(rate);
  if (id == "epoch-escb") return std::make_unique<EpochEscb>(rate, index_tolerance, epoch_index);
  if (id == "cucb")
    return std::make_unique<PerActionUcb>(PerActionUcb::Flavor::Cucb, set.arm_size());
  if (id == "llr")
    return std::make_unique<PerActionUcb>(PerActionUcb::Flavor::Llr, set.arm_size());
  throw std::invalid_argument("unknown policy id: " + id);
}

}  // namespace combandit
