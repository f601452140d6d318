#pragma once

// Adversarial bandit-feedback policy over a combinatorial action set. Each
// round: mix the occupancy point toward the uniform occupancy, decompose the
// mixed point into a distribution over arms, sample one, estimate the hidden
// reward vector through the pseudo-inverse of the play covariance, tilt the
// occupancy exponentially, and project back onto the scaled hull under a
// per-round accuracy schedule.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "combandit/action_set.hpp"
#include "combandit/arm.hpp"
#include "combandit/kl.hpp"
#include "combandit/rng.hpp"

namespace combandit {

struct ArmAtom {
  Arm arm;
  double weight = 0.0;
};

using ArmDistribution = std::vector<ArmAtom>;

struct CombExpParams {
  double gamma = 0.0;    // mixing weight toward the uniform occupancy, in (0,1]
  double eta = 0.0;      // exponential-update step, gamma * C
  double C = 0.0;        // lambda_lower / m^{3/2}
  std::int64_t horizon = 0;
  double epsilon0 = 0.0;  // projection accuracy scale; 0 picks the per-round default
};

// Closed-form parameters from the structure's spectral constants.
inline CombExpParams make_combexp_params(const ActionSet& set, std::int64_t horizon,
                                         double epsilon0 = 0.0) {
  if (horizon < 1)
    throw std::invalid_argument("make_combexp_params: horizon must be >= 1");
  const SpectralConstants sc = set.spectral_constants();
  const double m = set.arm_size();
  const double d = set.dimension();
  CombExpParams p;
  p.C = sc.lambda_lower / (m * std::sqrt(m));
  const double log_mu = std::log(1.0 / sc.mu_min);
  if (!(log_mu > 0.0))
    throw std::invalid_argument("make_combexp_params: degenerate action set");
  const double explore = std::sqrt(m * log_mu);
  p.gamma = explore / (explore + std::sqrt(p.C * (p.C * m * m * d + m) * horizon));
  p.eta = p.gamma * p.C;
  p.horizon = horizon;
  p.epsilon0 = epsilon0;
  return p;
}

inline void check_occupancy(const std::vector<double>& q) {
  double total = 0.0;
  for (double v : q) {
    if (!(v >= 0.0)) throw std::invalid_argument("occupancy point must be nonnegative");
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw std::invalid_argument("occupancy point must sum to 1");
}

inline std::vector<double> mix(const std::vector<double>& q, const std::vector<double>& mu0,
                               double gamma) {
  if (q.size() != mu0.size())
    throw std::invalid_argument("mix: length mismatch");
  if (!(gamma >= 0.0 && gamma <= 1.0))
    throw std::invalid_argument("mix: gamma must lie in [0,1]");
  std::vector<double> out(q.size());
  for (std::size_t i = 0; i < q.size(); ++i)
    out[i] = (1.0 - gamma) * q[i] + gamma * mu0[i];
  return out;
}

namespace detail {

inline void check_decomposition(const ActionSet& set, const ArmDistribution& atoms,
                                const std::vector<double>& scaled_target) {
  std::vector<double> recon(set.dimension(), 0.0);
  double wsum = 0.0;
  for (const auto& atom : atoms) {
    wsum += atom.weight;
    for (int i : atom.arm.indices) recon[i] += atom.weight;
  }
  double err = std::abs(wsum - 1.0);
  for (int i = 0; i < set.dimension(); ++i)
    err = std::max(err, std::abs(recon[i] - scaled_target[i]));
  if (err > 1e-8 || atoms.size() > static_cast<std::size_t>(set.dimension()) + 1) {
    std::ostringstream msg;
    msg << "decompose: infeasible target, residual " << err << " with " << atoms.size()
        << " atoms";
    throw std::runtime_error(msg.str());
  }
}

// Peels the scaled target (coordinates in [0,1], remaining mass m*W) one
// vertex at a time: take the best arm of the residual, remove as much of it
// as keeps every coordinate inside [0, W].
inline ArmDistribution decompose_msets(const ActionSet& set, std::vector<double> resid) {
  const int d = set.dimension();
  const int m = set.arm_size();
  ArmDistribution atoms;
  double mass = 1.0;
  for (int step = 0; step < d + 1 && mass > 1e-12; ++step) {
    const Arm arm = set.argmax_linear(resid);
    double w = mass;
    for (int i : arm.indices) w = std::min(w, resid[i]);
    if (d > m) {
      double off_max = 0.0;
      for (int i = 0; i < d; ++i)
        if (!arm.contains(i)) off_max = std::max(off_max, resid[i]);
      w = std::min(w, mass - off_max);
    }
    if (w <= 0.0) break;
    for (int i : arm.indices) resid[i] -= w;
    atoms.push_back({arm, w});
    mass -= w;
  }
  if (!atoms.empty()) atoms.front().weight += mass;
  return atoms;
}

// Birkhoff peeling: repeatedly extract a perfect matching supported on the
// positive residual entries and subtract its smallest covered entry.
inline ArmDistribution decompose_matchings(const ActionSet& set, std::vector<double> resid) {
  const int d = set.dimension();
  const int m = set.arm_size();
  ArmDistribution atoms;
  const int cap = (m - 1) * (m - 1) + 2;
  for (int step = 0; step < cap; ++step) {
    double remaining = 0.0;
    for (double v : resid) remaining += v;
    if (remaining <= m * 1e-11) break;
    std::vector<double> indicator(d, 0.0);
    for (int i = 0; i < d; ++i) indicator[i] = resid[i] > 1e-12 ? 1.0 : 0.0;
    const Arm arm = set.argmax_linear(indicator);
    if (arm.dot(indicator) < m - 0.5) break;
    double w = 1.0;
    for (int i : arm.indices) w = std::min(w, resid[i]);
    for (int i : arm.indices) resid[i] -= w;
    atoms.push_back({arm, w});
  }
  double wsum = 0.0;
  for (const auto& atom : atoms) wsum += atom.weight;
  if (!atoms.empty()) atoms.front().weight += 1.0 - wsum;
  return atoms;
}

// Lawson-Hanson nonnegative least squares for the augmented system
// [columns; ones-row] w = [target; 1].
inline Eigen::VectorXd nnls(const Eigen::MatrixXd& A, const Eigen::VectorXd& b) {
  const int cols = static_cast<int>(A.cols());
  Eigen::VectorXd w = Eigen::VectorXd::Zero(cols);
  std::vector<int> passive;
  std::vector<char> in_passive(cols, 0);
  const double tol = 1e-12 * b.norm();
  for (int outer = 0; outer < 3 * cols + 10; ++outer) {
    const Eigen::VectorXd grad = A.transpose() * (b - A * w);
    int best = -1;
    double best_grad = tol;
    for (int j = 0; j < cols; ++j)
      if (!in_passive[j] && grad(j) > best_grad) {
        best_grad = grad(j);
        best = j;
      }
    if (best < 0) break;
    passive.push_back(best);
    in_passive[best] = 1;
    for (int inner = 0; inner < 3 * cols + 10; ++inner) {
      Eigen::MatrixXd Ap(A.rows(), passive.size());
      for (std::size_t k = 0; k < passive.size(); ++k) Ap.col(k) = A.col(passive[k]);
      const Eigen::VectorXd z = Ap.colPivHouseholderQr().solve(b);
      bool all_positive = true;
      for (int k = 0; k < z.size(); ++k)
        if (z(k) <= 0.0) all_positive = false;
      if (all_positive) {
        w.setZero();
        for (std::size_t k = 0; k < passive.size(); ++k) w(passive[k]) = z(k);
        break;
      }
      double alpha = 1.0;
      for (std::size_t k = 0; k < passive.size(); ++k)
        if (z(k) <= 0.0)
          alpha = std::min(alpha, w(passive[k]) / (w(passive[k]) - z(k)));
      for (std::size_t k = 0; k < passive.size(); ++k) {
        const int j = passive[k];
        w(j) += alpha * (z(k) - w(j));
      }
      std::vector<int> kept;
      for (int j : passive) {
        if (w(j) > 1e-14) {
          kept.push_back(j);
        } else {
          w(j) = 0.0;
          in_passive[j] = 0;
        }
      }
      passive = kept;
    }
  }
  return w;
}

// Removes affine dependencies among the support until at most d+1 atoms
// remain: move weight along a kernel direction (which preserves both the
// reconstruction and the total weight) until an atom hits zero, drop it.
inline void caratheodory_prune(const ActionSet& set, ArmDistribution& atoms) {
  const int d = set.dimension();
  const int initial = static_cast<int>(atoms.size());
  for (int guard = 0; guard < initial + 1; ++guard) {
    const int s = static_cast<int>(atoms.size());
    if (s <= 1) return;
    Eigen::MatrixXd V = Eigen::MatrixXd::Zero(d + 1, s);
    for (int k = 0; k < s; ++k) {
      for (int i : atoms[k].arm.indices) V(i, k) = 1.0;
      V(d, k) = 1.0;
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(V);
    lu.setThreshold(1e-10);
    if (lu.dimensionOfKernel() == 0) return;
    Eigen::VectorXd c = lu.kernel().col(0);
    if (c.maxCoeff() <= 0.0) c = -c;
    double t = kInf;
    for (int k = 0; k < s; ++k)
      if (c(k) > 1e-14) t = std::min(t, atoms[k].weight / c(k));
    ArmDistribution next;
    for (int k = 0; k < s; ++k) {
      const double w = atoms[k].weight - t * c(k);
      if (w > 1e-14) next.push_back({atoms[k].arm, w});
    }
    atoms = std::move(next);
  }
}

inline ArmDistribution decompose_generic(const ActionSet& set,
                                         const std::vector<double>& scaled_target) {
  const int d = set.dimension();
  const int count = static_cast<int>(set.size());
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(d + 1, count);
  for (int k = 0; k < count; ++k) {
    for (int i : set.arms()[k].indices) A(i, k) = 1.0;
    A(d, k) = 1.0;
  }
  Eigen::VectorXd b(d + 1);
  for (int i = 0; i < d; ++i) b(i) = scaled_target[i];
  b(d) = 1.0;
  const Eigen::VectorXd w = nnls(A, b);
  ArmDistribution atoms;
  for (int k = 0; k < count; ++k)
    if (w(k) > 1e-14) atoms.push_back({set.arms()[k], w(k)});
  caratheodory_prune(set, atoms);
  double wsum = 0.0;
  for (const auto& atom : atoms) wsum += atom.weight;
  if (!atoms.empty())
    for (auto& atom : atoms) atom.weight /= wsum;
  return atoms;
}

}  // namespace detail

// Writes m * target as a convex combination of at most d+1 arms.
inline ArmDistribution decompose(const ActionSet& set, const std::vector<double>& target) {
  if (static_cast<int>(target.size()) != set.dimension())
    throw std::invalid_argument("decompose: target length must match the dimension");
  check_occupancy(target);
  const int m = set.arm_size();
  std::vector<double> scaled(target.size());
  for (std::size_t i = 0; i < target.size(); ++i) {
    scaled[i] = m * target[i];
    if (scaled[i] > 1.0 + 1e-9)
      throw std::runtime_error("decompose: infeasible target, coordinate above 1");
    scaled[i] = std::min(scaled[i], 1.0);
  }
  ArmDistribution atoms;
  switch (set.kind()) {
    case StructureKind::MSets:
      atoms = detail::decompose_msets(set, scaled);
      break;
    case StructureKind::Matchings:
      atoms = detail::decompose_matchings(set, scaled);
      break;
    default:
      atoms = detail::decompose_generic(set, scaled);
      break;
  }
  detail::check_decomposition(set, atoms, scaled);
  return atoms;
}

// Reward-vector estimate: reward * pinv(Sigma) * played, where Sigma is the
// exact covariance of the played-arm indicator under the atom distribution.
inline std::vector<double> estimate(const ActionSet& set, const ArmDistribution& dist,
                                    const Arm& played, double reward) {
  const int d = set.dimension();
  Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(d, d);
  for (const auto& atom : dist)
    for (int i : atom.arm.indices)
      for (int j : atom.arm.indices) sigma(i, j) += atom.weight;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sigma);
  const Eigen::VectorXd& vals = eig.eigenvalues();
  const double cutoff = 1e-10 * std::max(vals.cwiseAbs().maxCoeff(), 0.0);
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(d);
  for (int i = 0; i < d; ++i) inv(i) = vals(i) > cutoff ? 1.0 / vals(i) : 0.0;
  Eigen::VectorXd mvec = Eigen::VectorXd::Zero(d);
  for (int i : played.indices) mvec(i) = 1.0;
  const Eigen::VectorXd result =
      eig.eigenvectors() * (inv.asDiagonal() * (eig.eigenvectors().transpose() * mvec));
  std::vector<double> out(d);
  for (int i = 0; i < d; ++i) out[i] = reward * result(i);
  return out;
}

// Exponential tilt, normalized; the max shift keeps exp in range.
inline std::vector<double> exp_update(const std::vector<double>& q,
                                      const std::vector<double>& est, double eta) {
  if (q.size() != est.size())
    throw std::invalid_argument("exp_update: length mismatch");
  if (!(eta >= 0.0))
    throw std::invalid_argument("exp_update: eta must be >= 0");
  double shift = -kInf;
  for (double e : est) shift = std::max(shift, eta * e);
  std::vector<double> out(q.size());
  double total = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    out[i] = q[i] * std::exp(eta * est[i] - shift);
    total += out[i];
  }
  if (!(total > 0.0))
    throw std::runtime_error("exp_update: all mass vanished");
  for (auto& v : out) v /= total;
  return out;
}

namespace detail {

// Exact KL projection onto {q >= 0, sum q = 1, q_i <= 1/m}: the solution is
// min(c * qtilde_i, 1/m) with c chosen so the coordinates sum to 1.
inline std::vector<double> project_capped_simplex(const std::vector<double>& qtilde, int m) {
  const double cap = 1.0 / m;
  std::vector<std::size_t> order(qtilde.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return qtilde[a] > qtilde[b]; });
  double tail = 0.0;
  for (double v : qtilde) tail += v;
  // With the k largest coordinates capped, c = (1 - k*cap) / (sum of the rest);
  // the first k that keeps the (k+1)-th coordinate under the cap is exact.
  double c = 1.0 / tail;
  for (std::size_t k = 0; k < qtilde.size(); ++k) {
    if (c * qtilde[order[k]] <= cap) break;
    tail -= qtilde[order[k]];
    if (tail <= 0.0) {
      c = kInf;
      break;
    }
    c = (1.0 - static_cast<double>(k + 1) * cap) / tail;
  }
  if (c < 0.0) c = 0.0;
  std::vector<double> out(qtilde.size());
  for (std::size_t i = 0; i < qtilde.size(); ++i) out[i] = std::min(c * qtilde[i], cap);
  return out;
}

// Sinkhorn sweeps: alternate row and column renormalization of the m x m
// matrix form until both marginals are within the feasibility tolerance and
// the iterate stops moving.
inline std::vector<double> project_matchings(const std::vector<double>& qtilde, int m,
                                             double epsilon) {
  std::vector<double> q = qtilde;
  const double target = 1.0 / m;
  std::vector<double> prev(q.size());
  for (int sweep = 0; sweep < 100000; ++sweep) {
    prev = q;
    for (int r = 0; r < m; ++r) {
      double sum = 0.0;
      for (int cidx = 0; cidx < m; ++cidx) sum += q[r * m + cidx];
      const double scale = target / sum;
      for (int cidx = 0; cidx < m; ++cidx) q[r * m + cidx] *= scale;
    }
    for (int cidx = 0; cidx < m; ++cidx) {
      double sum = 0.0;
      for (int r = 0; r < m; ++r) sum += q[r * m + cidx];
      const double scale = target / sum;
      for (int r = 0; r < m; ++r) q[r * m + cidx] *= scale;
    }
    double move = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) move += std::abs(q[i] - prev[i]);
    double violation = 0.0;
    for (int r = 0; r < m; ++r) {
      double sum = 0.0;
      for (int cidx = 0; cidx < m; ++cidx) sum += q[r * m + cidx];
      violation = std::max(violation, std::abs(sum - target));
    }
    if (move <= epsilon / 10.0 && violation <= epsilon) return q;
  }
  std::ostringstream msg;
  msg << "project: sweep cap reached at accuracy " << epsilon;
  throw std::runtime_error(msg.str());
}

}  // namespace detail

// KL projection of a positive vector onto the scaled hull.
inline std::vector<double> project(const ActionSet& set, const std::vector<double>& qtilde,
                                   double epsilon) {
  if (static_cast<int>(qtilde.size()) != set.dimension())
    throw std::invalid_argument("project: length mismatch");
  for (double v : qtilde)
    if (!(v > 0.0))
      throw std::invalid_argument("project: input must be strictly positive");
  if (!(epsilon > 0.0))
    throw std::invalid_argument("project: epsilon must be > 0");
  const double eps = std::max(epsilon, 1e-13);
  switch (set.kind()) {
    case StructureKind::MSets:
      return detail::project_capped_simplex(qtilde, set.arm_size());
    case StructureKind::Matchings:
      return detail::project_matchings(qtilde, set.arm_size(), eps);
    default:
      throw std::invalid_argument("project: unsupported structure");
  }
}

// One-run policy state; begin_round picks the arm, feed consumes the scalar
// reward. Rounds are 1-based.
class CombExp {
 public:
  CombExp(const ActionSet& set, const CombExpParams& params, std::uint64_t seed)
      : set_(&set), params_(params), rng_(make_stream(seed, kPolicyStream)) {
    if (set.kind() != StructureKind::MSets &&
        set.kind() != StructureKind::Matchings)
      throw std::invalid_argument("CombExp: unsupported structure");
    if (!(params_.gamma > 0.0 && params_.gamma <= 1.0))
      throw std::invalid_argument("CombExp: gamma must lie in (0,1]");
    if (!(params_.eta >= 0.0))
      throw std::invalid_argument("CombExp: eta must be >= 0");
    if (params_.horizon < 1)
      throw std::invalid_argument("CombExp: horizon must be >= 1");
    q_ = set.occupancy_center();
    mu0_ = q_;
    log_mu_inv_ = std::log(1.0 / set.spectral_constants().mu_min);
  }

  const std::string& name() const {
    static const std::string id = "combexp";
    return id;
  }

  const Arm& begin_round() {
    if (awaiting_feed_)
      throw std::logic_error("CombExp::begin_round: feed the previous reward first");
    const std::vector<double> mixed = mix(q_, mu0_, params_.gamma);
    dist_ = decompose(*set_, mixed);
    std::vector<double> weights;
    weights.reserve(dist_.size());
    for (const auto& atom : dist_) weights.push_back(atom.weight);
    played_ = sample_index(rng_, weights);
    awaiting_feed_ = true;
    return dist_[played_].arm;
  }

  void feed(double reward) {
    if (!awaiting_feed_)
      throw std::logic_error("CombExp::feed: begin the round first");
    const std::int64_t n = rounds_done_ + 1;
    const std::vector<double> est = estimate(*set_, dist_, dist_[played_].arm, reward);
    const std::vector<double> tilted = exp_update(q_, est, params_.eta);
    double qmin = kInf;
    for (double v : q_) qmin = std::min(qmin, v);
    const double eps0 = params_.epsilon0 > 0.0
                            ? params_.epsilon0
                            : 1e-2 * qmin * qmin * log_mu_inv_ * log_mu_inv_;
    const double logn = std::log(static_cast<double>(n) + 1.0);
    const double eps_n =
        std::max(eps0 / (static_cast<double>(n) * n * logn * logn * logn), 1e-13);
    q_ = project(*set_, tilted, eps_n);
    rounds_done_ = n;
    awaiting_feed_ = false;
  }

  const std::vector<double>& occupancy() const { return q_; }
  const ArmDistribution& current_distribution() const { return dist_; }
  std::int64_t rounds_done() const { return rounds_done_; }

 private:
  const ActionSet* set_;
  CombExpParams params_;
  std::mt19937_64 rng_;
  std::vector<double> q_, mu0_;
  ArmDistribution dist_;
  std::size_t played_ = 0;
  std::int64_t rounds_done_ = 0;
  bool awaiting_feed_ = false;
  double log_mu_inv_ = 0.0;
};

}  // namespace combandit
