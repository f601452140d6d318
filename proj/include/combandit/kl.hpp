#pragma once

// Bernoulli KL divergence and the one-dimensional line search used by the
// confidence indexes. The optimistic value of an arm under a KL budget is
// computed coordinate-wise through g_root: for a multiplier lambda, mean w
// and count v, g_root returns the larger root of
//
//   q^2 + q*(lambda*v - 1) - lambda*v*w = 0,
//
// which is the per-coordinate maximizer of the budgeted problem. solve_budget
// finds the multiplier at which the total KL spend equals the budget.

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

namespace combandit {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// KL divergence between Bernoulli(p) and Bernoulli(q), extended-real valued.
// Conventions: 0*log(0) = 0; the value is +infinity when p in (0,1], q = 0
// or p in [0,1), q = 1.
inline double kl_bernoulli(double p, double q) {
  if (p < 0.0 || p > 1.0 || q < 0.0 || q > 1.0)
    throw std::invalid_argument("kl_bernoulli: arguments must lie in [0,1]");
  if (p == q) return 0.0;
  double left = 0.0, right = 0.0;
  if (p > 0.0) {
    if (q == 0.0) return kInf;
    left = p * std::log(p / q);
  }
  if (p < 1.0) {
    if (q == 1.0) return kInf;
    right = (1.0 - p) * std::log((1.0 - p) / (1.0 - q));
  }
  return left + right;
}

// d/dq kl(p, q) = (q - p) / (q * (1 - q)), defined for q in (0,1).
inline double kl_derivative(double p, double q) {
  if (p < 0.0 || p > 1.0)
    throw std::invalid_argument("kl_derivative: p must lie in [0,1]");
  if (q <= 0.0 || q >= 1.0)
    throw std::invalid_argument("kl_derivative: q must lie in (0,1)");
  return (q - p) / (q * (1.0 - q));
}

// Larger root of q^2 + q*(lambda*v - 1) - lambda*v*w = 0. Lies in [w, 1].
// Uses the conjugate form when lambda*v > 1 to avoid cancellation.
inline double g_root(double lambda, double w, double v) {
  if (!(lambda >= 0.0)) throw std::invalid_argument("g_root: lambda must be >= 0");
  if (w < 0.0 || w > 1.0) throw std::invalid_argument("g_root: w must lie in [0,1]");
  if (!(v >= 0.0)) throw std::invalid_argument("g_root: v must be >= 0");
  const double lv = lambda * v;
  const double b = lv - 1.0;
  const double s = std::sqrt(b * b + 4.0 * lv * w);
  double g;
  if (b > 0.0) {
    const double denom = b + s;
    g = denom > 0.0 ? 2.0 * lv * w / denom : 1.0;
  } else {
    g = 0.5 * (-b + s);
  }
  if (g < w) g = w;
  if (g > 1.0) g = 1.0;
  return g;
}

// Gap 1 - g_root(lambda, w, v), computed as the smaller root of the
// complementary quadratic
//
//   e^2 - e*(1 + lambda*v) + lambda*v*(1 - w) = 0,
//
// in conjugate form. Keeps full relative accuracy when the root is so close
// to 1 that g_root itself rounds to 1.
inline double g_root_gap(double lambda, double w, double v) {
  if (!(lambda >= 0.0)) throw std::invalid_argument("g_root_gap: lambda must be >= 0");
  if (w < 0.0 || w > 1.0) throw std::invalid_argument("g_root_gap: w must lie in [0,1]");
  if (!(v >= 0.0)) throw std::invalid_argument("g_root_gap: v must be >= 0");
  const double lv = lambda * v;
  const double a = 1.0 + lv;
  const double rad = a * a - 4.0 * lv * (1.0 - w);
  const double s = std::sqrt(rad > 0.0 ? rad : 0.0);
  double e = 2.0 * lv * (1.0 - w) / (a + s);
  if (e < 0.0) e = 0.0;
  if (e > 1.0 - w) e = 1.0 - w;
  return e;
}

// kl(w, 1 - e) evaluated from the gap e = 1 - q, so the log of the gap keeps
// its accuracy for gaps far below machine epsilon. Requires w in [0,1),
// e in [0, 1 - w].
inline double kl_from_gap(double w, double e) {
  if (e <= 0.0) return kInf;
  const double right = (1.0 - w) * (std::log1p(-w) - std::log(e));
  if (w == 0.0) return right;
  return w * (std::log(w) - std::log1p(-e)) + right;
}

struct LinePair {
  double mean;   // empirical mean, in [0,1); coordinates at 1 never enter
  double count;  // number of observations, >= 1
};

struct LineSearchInput {
  std::vector<LinePair> pairs;
  double budget = 0.0;  // total KL allowance
};

inline void validate(const LineSearchInput& input) {
  if (input.pairs.empty())
    throw std::invalid_argument("line search: empty input");
  if (!(input.budget >= 0.0))
    throw std::invalid_argument("line search: budget must be nonnegative");
  for (const auto& pr : input.pairs) {
    if (pr.mean < 0.0 || pr.mean >= 1.0)
      throw std::invalid_argument("line search: means must lie in [0,1)");
    if (!(pr.count >= 1.0))
      throw std::invalid_argument("line search: counts must be >= 1");
  }
}

// Total KL spend at multiplier lambda:
//   F(lambda) = sum_i count_i * kl(mean_i, g_root(lambda, mean_i, count_i)).
inline double line_search_value(const LineSearchInput& input, double lambda) {
  validate(input);
  if (!(lambda > 0.0))
    throw std::invalid_argument("line_search_value: lambda must be > 0");
  double total = 0.0;
  for (const auto& pr : input.pairs) {
    const double e = g_root_gap(lambda, pr.mean, pr.count);
    total += pr.count * kl_from_gap(pr.mean, e);
  }
  return total;
}

// Finds lambda* with |F(lambda*) - budget| <= tolerance by bracketing
// bisection. The bracket grows geometrically (factor 4) from lambda = 1;
// the direction of monotonicity is detected from two evaluations rather
// than assumed. If 200 expansions cannot straddle the budget, the per
// coordinate optima have saturated at double resolution and the extreme
// multiplier reached is returned; it reproduces that saturated optimum.
inline double solve_budget(const LineSearchInput& input, double tolerance) {
  validate(input);
  if (!(input.budget > 0.0))
    throw std::invalid_argument("solve_budget: budget must be > 0");
  if (!(tolerance > 0.0))
    throw std::invalid_argument("solve_budget: tolerance must be > 0");

  const double budget = input.budget;
  auto F = [&](double lam) { return line_search_value(input, lam); };

  double f1 = F(1.0);
  if (std::abs(f1 - budget) <= tolerance) return 1.0;
  double f4 = F(4.0);
  const bool increasing = f4 > f1;

  // Walk toward the budget so that [lo, hi] straddles it.
  double lo = 1.0, hi = 1.0, flo = f1, fhi = f1;
  const bool need_larger = increasing ? (f1 < budget) : (f1 > budget);
  bool bracketed = false;
  for (int step = 0; step < 200; ++step) {
    if (need_larger) {
      hi *= 4.0;
      fhi = F(hi);
      if ((increasing && fhi >= budget) || (!increasing && fhi <= budget)) {
        bracketed = true;
        break;
      }
      lo = hi;
      flo = fhi;
    } else {
      lo /= 4.0;
      flo = F(lo);
      if ((increasing && flo <= budget) || (!increasing && flo >= budget)) {
        bracketed = true;
        break;
      }
      hi = lo;
      fhi = flo;
    }
  }
  if (!bracketed) return need_larger ? hi : lo;

  if (std::abs(flo - budget) <= tolerance) return lo;
  if (std::abs(fhi - budget) <= tolerance) return hi;

  double mid = 0.5 * (lo + hi);
  for (int it = 0; it < 400; ++it) {
    mid = 0.5 * (lo + hi);
    const double fm = F(mid);
    if (std::abs(fm - budget) <= tolerance) return mid;
    const bool go_right = increasing ? (fm < budget) : (fm > budget);
    if (go_right)
      lo = mid;
    else
      hi = mid;
    if (hi - lo <= std::numeric_limits<double>::epsilon() * hi) break;
  }
  const double fm = F(mid);
  if (std::abs(fm - budget) <= 1e3 * tolerance) return mid;
  throw std::runtime_error("solve_budget: bisection stalled before reaching tolerance");
}

}  // namespace combandit
