#pragma once

// Instance-dependent regret lower bounds computable by enumeration: exact
// per-arm gaps, a maximal family of suboptimal arms with pairwise disjoint
// supports outside the best arm, and the summed bound over that family.
//
// The family is built greedily over the arm enumeration order, so the bound
// is a deterministic function of the ordered instance. The overloads taking
// an ActionSet use its canonical order; the overloads taking an explicit arm
// list preserve that list's order, which is what makes the bound invariant
// under a relabeling applied consistently to theta, the arms and their order.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <iostream>
#include <stdexcept>
#include <vector>

#include "combandit/action_set.hpp"
#include "combandit/arm.hpp"
#include "combandit/kl.hpp"

namespace combandit {

struct GapSummary {
  std::vector<double> gaps;  // aligned with the arm list
  double delta_min = 0.0;
  double delta_max = 0.0;
  std::size_t best = 0;  // position of the unique best arm in the list
};

// Exact gaps by enumeration. Rejects instances whose best arm is tied.
inline GapSummary gaps(const std::vector<Arm>& arms, const std::vector<double>& theta) {
  if (arms.empty()) throw std::invalid_argument("gaps: empty arm list");
  if (static_cast<int>(theta.size()) != arms.front().dimension)
    throw std::invalid_argument("gaps: theta length must match the dimension");
  for (double t : theta)
    if (!(t >= 0.0 && t <= 1.0))
      throw std::invalid_argument("gaps: theta must lie in [0,1]");
  std::vector<double> values(arms.size());
  std::size_t best = 0;
  for (std::size_t k = 0; k < arms.size(); ++k) {
    values[k] = arms[k].dot(theta);
    if (values[k] > values[best]) best = k;
  }
  for (std::size_t k = 0; k < arms.size(); ++k)
    if (k != best && values[k] == values[best])
      throw std::invalid_argument("gaps: best arm is not unique");
  GapSummary out;
  out.best = best;
  out.gaps.resize(arms.size());
  double dmin = kInf, dmax = 0.0;
  for (std::size_t k = 0; k < arms.size(); ++k) {
    out.gaps[k] = values[best] - values[k];
    if (k != best) {
      dmin = std::min(dmin, out.gaps[k]);
      dmax = std::max(dmax, out.gaps[k]);
    }
  }
  out.delta_min = arms.size() > 1 ? dmin : 0.0;
  out.delta_max = dmax;
  return out;
}

inline GapSummary gaps(const ActionSet& set, const std::vector<double>& theta) {
  return gaps(set.arms(), theta);
}

// Greedy construction, over the given arm order, of a maximal family of
// suboptimal arms whose supports outside the best arm are pairwise disjoint.
// Every skipped arm conflicts with an earlier member, so the family is
// maximal. Different maximal families exist; fixing the scan order makes the
// result deterministic.
inline std::vector<Arm> maximal_pset(const std::vector<Arm>& arms,
                                     const std::vector<double>& theta) {
  const GapSummary gap = gaps(arms, theta);
  const Arm& star = arms[gap.best];
  const int d = star.dimension;
  std::vector<char> in_star(d, 0);
  for (int i : star.indices) in_star[i] = 1;
  std::vector<char> used(d, 0);
  std::vector<Arm> family;
  for (std::size_t k = 0; k < arms.size(); ++k) {
    if (k == gap.best) continue;
    const Arm& arm = arms[k];
    bool ok = true;
    for (int i : arm.indices)
      if (!in_star[i] && used[i]) {
        ok = false;
        break;
      }
    if (!ok) continue;
    for (int i : arm.indices)
      if (!in_star[i]) used[i] = 1;
    family.push_back(arm);
  }
  return family;
}

inline std::vector<Arm> maximal_pset(const ActionSet& set,
                                     const std::vector<double>& theta) {
  return maximal_pset(set.arms(), theta);
}

// Summed bound over the greedy family: each member M contributes
//   beta / max_{i in M minus best} kl(theta_i, mean of theta over best minus M),
// with beta = min over suboptimal M of gap(M) / |M minus best|.
inline double simplified_bound(const std::vector<Arm>& arms,
                               const std::vector<double>& theta) {
  const GapSummary gap = gaps(arms, theta);
  const Arm& star = arms[gap.best];
  const int d = star.dimension;
  std::vector<char> in_star(d, 0);
  for (int i : star.indices) in_star[i] = 1;

  double beta = kInf;
  for (std::size_t k = 0; k < arms.size(); ++k) {
    if (k == gap.best) continue;
    int outside = 0;
    for (int i : arms[k].indices)
      if (!in_star[i]) ++outside;
    if (outside > 0) beta = std::min(beta, gap.gaps[k] / outside);
  }

  const std::vector<Arm> family = maximal_pset(arms, theta);
  if (family.empty()) {
    std::cerr << "simplified_bound: no suboptimal arms, bound is vacuous\n";
    return 0.0;
  }

  double total = 0.0;
  for (const Arm& arm : family) {
    std::vector<char> in_arm(d, 0);
    for (int i : arm.indices) in_arm[i] = 1;
    std::vector<int> outside;
    for (int i : arm.indices)
      if (!in_star[i]) outside.push_back(i);
    double star_only_sum = 0.0;
    for (int j : star.indices)
      if (!in_arm[j]) star_only_sum += theta[j];
    const double target = star_only_sum / static_cast<double>(outside.size());
    double worst = 0.0;
    for (int i : outside) worst = std::max(worst, kl_bernoulli(theta[i], target));
    total += beta / worst;
  }
  return total;
}

inline double simplified_bound(const ActionSet& set, const std::vector<double>& theta) {
  return simplified_bound(set.arms(), theta);
}

// Closed form of the summed bound for bipartite matchings with theta equal to
// a on the best matching and b elsewhere.
inline double matchings_ab_bound(int m, double a, double b) {
  if (m < 2)
    throw std::invalid_argument("matchings_ab_bound: m must be >= 2");
  if (!(a > 0.0 && a < 1.0 && b > 0.0 && b < 1.0 && b < a))
    throw std::invalid_argument("matchings_ab_bound: need 0 < b < a < 1");
  return m * (m - 1) * (a - b) / (2.0 * kl_bernoulli(b, a));
}

// Bound for the disjoint-paths structure with uniform gap delta.
inline double disjoint_paths_bound(int d, int m, double delta) {
  if (m < 1 || d < m || d % m != 0)
    throw std::invalid_argument("disjoint_paths_bound: d must be a positive multiple of m");
  if (!(delta > 0.0))
    throw std::invalid_argument("disjoint_paths_bound: delta must be > 0");
  return static_cast<double>(d - m) / (4.0 * delta);
}

}  // namespace combandit
