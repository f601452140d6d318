#pragma once

// Combinatorial action sets with linear structure. Four families are
// supported: size-m subsets of d items, perfect matchings of the complete
// bipartite graph K_{m,m}, spanning trees of the complete graph K_N, and a
// partition of d links into d/m disjoint paths of m links each.
//
// Arms are enumerated in canonical order: lexicographic on the sorted list
// of set coordinates. argmax_linear is structure specific (top-m selection,
// assignment solver, maximum spanning tree, per-path comparison) and breaks
// exact ties canonically. +infinity weights dominate: if any arm contains an
// infinite coordinate, the canonical-first such arm is returned.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "combandit/arm.hpp"
#include "combandit/hungarian.hpp"

namespace combandit {

enum class StructureKind { MSets, Matchings, SpanningTrees, DisjointPaths };

struct SpectralConstants {
  double mu_min;        // min_i m * mu0_i
  double lambda_lower;  // smallest nonzero eigenvalue of E[M M^T]
};

constexpr std::size_t kDefaultEnumerationCap = 1000000;

namespace detail {

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[b] = a;
    return true;
  }
};

inline long double binomial_ld(int n, int k) {
  if (k < 0 || k > n) return 0.0L;
  k = std::min(k, n - k);
  long double r = 1.0L;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace detail

class ActionSet {
 public:
  static ActionSet m_sets(int d, int m, std::size_t cap = kDefaultEnumerationCap) {
    if (d < 1 || m < 1 || m > d)
      throw std::invalid_argument("m_sets: need 1 <= m <= d");
    check_cap(detail::binomial_ld(d, m), cap, "m_sets");
    ActionSet s(StructureKind::MSets, d, m);
    std::vector<int> comb(m);
    std::iota(comb.begin(), comb.end(), 0);
    while (true) {
      s.arms_.push_back(make_arm(d, comb));
      int i = m - 1;
      while (i >= 0 && comb[i] == d - m + i) --i;
      if (i < 0) break;
      ++comb[i];
      for (int j = i + 1; j < m; ++j) comb[j] = comb[j - 1] + 1;
    }
    s.finish();
    return s;
  }

  static ActionSet bipartite_matchings(int m, std::size_t cap = kDefaultEnumerationCap) {
    if (m < 1) throw std::invalid_argument("bipartite_matchings: need m >= 1");
    long double count = 1.0L;
    for (int i = 2; i <= m; ++i) count *= i;
    check_cap(count, cap, "bipartite_matchings");
    ActionSet s(StructureKind::Matchings, m * m, m);
    std::vector<int> sigma(m);
    std::iota(sigma.begin(), sigma.end(), 0);
    do {
      std::vector<int> idx(m);
      for (int r = 0; r < m; ++r) idx[r] = r * m + sigma[r];
      s.arms_.push_back(make_arm(m * m, std::move(idx)));
    } while (std::next_permutation(sigma.begin(), sigma.end()));
    s.finish();
    return s;
  }

  static ActionSet spanning_trees(int n_vertices, std::size_t cap = kDefaultEnumerationCap) {
    if (n_vertices < 2)
      throw std::invalid_argument("spanning_trees: need at least 2 vertices");
    const long double count = std::pow(static_cast<long double>(n_vertices),
                                       static_cast<long double>(n_vertices - 2));
    check_cap(count, cap, "spanning_trees");
    const int d = n_vertices * (n_vertices - 1) / 2;
    const int m = n_vertices - 1;
    ActionSet s(StructureKind::SpanningTrees, d, m);
    s.vertices_ = n_vertices;
    for (int i = 0; i < n_vertices; ++i)
      for (int j = i + 1; j < n_vertices; ++j) s.edges_.emplace_back(i, j);
    std::vector<int> comb(m);
    std::iota(comb.begin(), comb.end(), 0);
    while (true) {
      detail::UnionFind uf(n_vertices);
      bool acyclic = true;
      for (int e : comb) {
        if (!uf.unite(s.edges_[e].first, s.edges_[e].second)) {
          acyclic = false;
          break;
        }
      }
      if (acyclic) s.arms_.push_back(make_arm(d, comb));
      int i = m - 1;
      while (i >= 0 && comb[i] == d - m + i) --i;
      if (i < 0) break;
      ++comb[i];
      for (int j = i + 1; j < m; ++j) comb[j] = comb[j - 1] + 1;
    }
    s.finish();
    return s;
  }

  static ActionSet disjoint_paths(int d, int m, std::size_t cap = kDefaultEnumerationCap) {
    if (d < 1 || m < 1 || d % m != 0)
      throw std::invalid_argument("disjoint_paths: need m >= 1 and d divisible by m");
    check_cap(static_cast<long double>(d / m), cap, "disjoint_paths");
    ActionSet s(StructureKind::DisjointPaths, d, m);
    for (int p = 0; p < d / m; ++p) {
      std::vector<int> idx(m);
      std::iota(idx.begin(), idx.end(), p * m);
      s.arms_.push_back(make_arm(d, std::move(idx)));
    }
    s.finish();
    return s;
  }

  StructureKind kind() const { return kind_; }
  int dimension() const { return d_; }
  int arm_size() const { return m_; }
  int vertex_count() const { return vertices_; }
  std::size_t size() const { return arms_.size(); }
  const std::vector<Arm>& arms() const { return arms_; }

  std::string describe() const {
    switch (kind_) {
      case StructureKind::MSets:
        return "msets(d=" + std::to_string(d_) + ",m=" + std::to_string(m_) + ")";
      case StructureKind::Matchings:
        return "matchings(m=" + std::to_string(m_) + ")";
      case StructureKind::SpanningTrees:
        return "spanning_trees(N=" + std::to_string(vertices_) + ")";
      case StructureKind::DisjointPaths:
        return "disjoint_paths(d=" + std::to_string(d_) + ",m=" + std::to_string(m_) + ")";
    }
    return "unknown";
  }

  // Maximizes sum_{i in M} weights_i over arms. Exact ties resolve to the
  // canonical-first arm. Entries may be +infinity (they dominate); NaN and
  // -infinity are rejected.
  Arm argmax_linear(const std::vector<double>& weights) const {
    if (static_cast<int>(weights.size()) != d_)
      throw std::invalid_argument("argmax_linear: weight vector has wrong length");
    std::vector<int> inf_coords;
    for (int i = 0; i < d_; ++i) {
      if (std::isnan(weights[i]))
        throw std::invalid_argument("argmax_linear: NaN weight");
      if (weights[i] == -std::numeric_limits<double>::infinity())
        throw std::invalid_argument("argmax_linear: -infinity weight");
      if (weights[i] == std::numeric_limits<double>::infinity())
        inf_coords.push_back(i);
    }
    if (!inf_coords.empty()) return first_arm_covering(inf_coords);
    switch (kind_) {
      case StructureKind::MSets:
        return argmax_msets(weights);
      case StructureKind::Matchings:
        return argmax_matchings(weights);
      case StructureKind::SpanningTrees:
        return argmax_trees(weights);
      case StructureKind::DisjointPaths:
        return argmax_paths(weights);
    }
    throw std::logic_error("argmax_linear: unreachable");
  }

  // Occupancy of the uniform arm distribution: mu0_i = (1/(m|M|)) sum_M M_i.
  std::vector<double> occupancy_center() const {
    std::vector<double> mu0(d_, 0.0);
    for (const Arm& a : arms_)
      for (int i : a.indices) mu0[i] += 1.0;
    const double scale = 1.0 / (static_cast<double>(m_) * static_cast<double>(arms_.size()));
    for (double& x : mu0) x *= scale;
    return mu0;
  }

  SpectralConstants spectral_constants() const {
    Eigen::MatrixXd second(d_, d_);
    second.setZero();
    for (const Arm& a : arms_)
      for (int i : a.indices)
        for (int j : a.indices) second(i, j) += 1.0;
    second /= static_cast<double>(arms_.size());

    double mu_min = 1.0;
    for (int i = 0; i < d_; ++i) mu_min = std::min(mu_min, second(i, i));

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(second);
    if (es.info() != Eigen::Success)
      throw std::runtime_error("spectral_constants: eigendecomposition failed");
    const Eigen::VectorXd& ev = es.eigenvalues();
    const double lambda_max = ev(d_ - 1);
    const double threshold = 1e-10 * lambda_max;
    double lambda_lower = lambda_max;
    for (int i = 0; i < d_; ++i)
      if (ev(i) > threshold) {
        lambda_lower = ev(i);
        break;
      }
    return {mu_min, lambda_lower};
  }

 private:
  ActionSet(StructureKind kind, int d, int m) : kind_(kind), d_(d), m_(m) {}

  static void check_cap(long double count, std::size_t cap, const std::string& what) {
    if (count > static_cast<long double>(cap)) {
      throw std::invalid_argument(what + ": arm count " + std::to_string(static_cast<double>(count)) +
                                  " exceeds enumeration cap " + std::to_string(cap));
    }
  }

  void finish() {
    if (arms_.empty()) throw std::logic_error("ActionSet: empty enumeration");
  }

  // Canonical-first arm containing at least one of the given coordinates.
  Arm first_arm_covering(const std::vector<int>& coords) const {
    switch (kind_) {
      case StructureKind::MSets: {
        const int j = coords.front();
        std::vector<int> idx(m_);
        if (j < m_) {
          std::iota(idx.begin(), idx.end(), 0);
        } else {
          std::iota(idx.begin(), idx.end() - 1, 0);
          idx[m_ - 1] = j;
        }
        return make_arm(d_, std::move(idx));
      }
      case StructureKind::Matchings: {
        std::vector<int> best;
        for (int cell : coords) {
          const int rstar = cell / m_, cstar = cell % m_;
          std::vector<int> sigma(m_);
          std::vector<char> used(m_, 0);
          used[cstar] = 1;
          for (int r = 0; r < m_; ++r) {
            if (r == rstar) {
              sigma[r] = cstar;
              continue;
            }
            for (int c = 0; c < m_; ++c)
              if (!used[c]) {
                sigma[r] = c;
                used[c] = 1;
                break;
              }
          }
          std::vector<int> idx(m_);
          for (int r = 0; r < m_; ++r) idx[r] = r * m_ + sigma[r];
          if (best.empty() || idx < best) best = std::move(idx);
        }
        return make_arm(d_, std::move(best));
      }
      case StructureKind::SpanningTrees: {
        std::vector<int> best;
        for (int estar : coords) {
          detail::UnionFind uf(vertices_);
          std::vector<int> chosen{estar};
          uf.unite(edges_[estar].first, edges_[estar].second);
          for (int e = 0; e < d_ && static_cast<int>(chosen.size()) < m_; ++e) {
            if (e == estar) continue;
            if (uf.unite(edges_[e].first, edges_[e].second)) chosen.push_back(e);
          }
          std::sort(chosen.begin(), chosen.end());
          if (best.empty() || chosen < best) best = std::move(chosen);
        }
        return make_arm(d_, std::move(best));
      }
      case StructureKind::DisjointPaths: {
        const int p = coords.front() / m_;
        std::vector<int> idx(m_);
        std::iota(idx.begin(), idx.end(), p * m_);
        return make_arm(d_, std::move(idx));
      }
    }
    throw std::logic_error("first_arm_covering: unreachable");
  }

  Arm argmax_msets(const std::vector<double>& w) const {
    std::vector<int> order(d_);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      if (w[a] != w[b]) return w[a] > w[b];
      return a < b;
    });
    std::vector<int> idx(order.begin(), order.begin() + m_);
    std::sort(idx.begin(), idx.end());
    return make_arm(d_, std::move(idx));
  }

  Arm argmax_trees(const std::vector<double>& w) const {
    std::vector<int> order(d_);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      if (w[a] != w[b]) return w[a] > w[b];
      return a < b;
    });
    detail::UnionFind uf(vertices_);
    std::vector<int> chosen;
    for (int e : order) {
      if (uf.unite(edges_[e].first, edges_[e].second)) {
        chosen.push_back(e);
        if (static_cast<int>(chosen.size()) == m_) break;
      }
    }
    std::sort(chosen.begin(), chosen.end());
    return make_arm(d_, std::move(chosen));
  }

  Arm argmax_paths(const std::vector<double>& w) const {
    const int paths = d_ / m_;
    int best = 0;
    double best_val = 0.0;
    for (int i = 0; i < m_; ++i) best_val += w[i];
    for (int p = 1; p < paths; ++p) {
      double val = 0.0;
      for (int i = p * m_; i < (p + 1) * m_; ++i) val += w[i];
      if (val > best_val) {
        best_val = val;
        best = p;
      }
    }
    std::vector<int> idx(m_);
    std::iota(idx.begin(), idx.end(), best * m_);
    return make_arm(d_, std::move(idx));
  }

  // Row-by-row lexicographic construction: at each row the candidate column
  // values (cell weight plus the optimal completion from the assignment
  // solver) are compared and exact ties keep the smaller column, so the
  // returned matching is the canonical-first maximizer.
  Arm argmax_matchings(const std::vector<double>& w) const {
    std::vector<char> used(m_, 0);
    std::vector<int> sigma(m_, -1);
    for (int r = 0; r < m_; ++r) {
      int best_c = -1;
      double best_val = -std::numeric_limits<double>::infinity();
      for (int c = 0; c < m_; ++c) {
        if (used[c]) continue;
        double cand = w[r * m_ + c];
        const int rest = m_ - r - 1;
        if (rest > 0) {
          std::vector<int> free_cols;
          for (int cc = 0; cc < m_; ++cc)
            if (!used[cc] && cc != c) free_cols.push_back(cc);
          std::vector<std::vector<double>> sub(rest, std::vector<double>(rest));
          for (int i = 0; i < rest; ++i)
            for (int j = 0; j < rest; ++j) sub[i][j] = w[(r + 1 + i) * m_ + free_cols[j]];
          const std::vector<int> sub_sigma = max_assignment(sub);
          double sub_val = 0.0;
          for (int i = 0; i < rest; ++i) sub_val += sub[i][sub_sigma[i]];
          cand += sub_val;
        }
        if (cand > best_val) {
          best_val = cand;
          best_c = c;
        }
      }
      sigma[r] = best_c;
      used[best_c] = 1;
    }
    std::vector<int> idx(m_);
    for (int r = 0; r < m_; ++r) idx[r] = r * m_ + sigma[r];
    return make_arm(d_, std::move(idx));
  }

  StructureKind kind_;
  int d_;
  int m_;
  int vertices_ = 0;
  std::vector<std::pair<int, int>> edges_;
  std::vector<Arm> arms_;
};

}  // namespace combandit
