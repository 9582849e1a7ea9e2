#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "kbratteli/errors.hpp"

namespace kbratteli {

using IMat = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;
using DMat = Eigen::MatrixXd;
using DVec = Eigen::VectorXd;

// A finite higher-rank graph given by k commuting nonnegative integer
// vertex adjacency matrices. Entry A_i(v, w) counts the color-i edges
// with range v and source w.
struct KGraph {
  int rank = 0;          // k
  int num_vertices = 0;  // N
  std::vector<IMat> matrices;

  // capability flags recorded by validate_kgraph
  bool hypothesis_3_2 = false;   // every row sum of every A_i >= 2
  bool rho_product_gt_1 = false; // product of the spectral radii exceeds 1

  // 0-based color of the Bratteli level n (levels are 1-based).
  int color_of_level(int level) const { return (level - 1) % rank; }

  const IMat& matrix_for_level(int level) const {
    return matrices[static_cast<std::size_t>(color_of_level(level))];
  }
};

// Perron-Frobenius data shared by the weight, measure, zeta and Dixmier
// machinery.
struct PerronData {
  std::vector<double> rho;         // spectral radius of each A_i
  DVec x;                          // common positive eigenvector, l1-normalized
  double rho_prod = 0.0;           // rho_1 * ... * rho_k
  int period_p = 1;                // period of A = A_1 ... A_k
  std::vector<DMat> limit_matrices;  // A^(j) = lim A^{lp+j} / rho^{lp+j}
  bool hypothesis_3_2 = false;
};

namespace detail {

// Strong connectivity of the digraph with edges v -> w whenever M(v,w) > 0.
inline bool strongly_connected(const IMat& m) {
  const int n = static_cast<int>(m.rows());
  auto reach = [&](bool transpose) {
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      for (int w = 0; w < n; ++w) {
        std::int64_t e = transpose ? m(w, v) : m(v, w);
        if (e > 0 && !seen[static_cast<std::size_t>(w)]) {
          seen[static_cast<std::size_t>(w)] = 1;
          stack.push_back(w);
        }
      }
    }
    return std::all_of(seen.begin(), seen.end(), [](char c) { return c != 0; });
  };
  return reach(false) && reach(true);
}

// Exact check that a*b == b*a, accumulating in 128-bit to dodge overflow.
inline bool commute(const IMat& a, const IMat& b, int* bad_row, int* bad_col) {
  const int n = static_cast<int>(a.rows());
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      __int128 ab = 0, ba = 0;
      for (int l = 0; l < n; ++l) {
        ab += static_cast<__int128>(a(i, l)) * b(l, j);
        ba += static_cast<__int128>(b(i, l)) * a(l, j);
      }
      if (ab != ba) {
        *bad_row = i;
        *bad_col = j;
        return false;
      }
    }
  }
  return true;
}

// l1-normalize a positive vector so that a left-to-right sum of its entries
// is exactly 1.0 in binary64.
inline void normalize_to_unit_sum(DVec& x) {
  const int n = static_cast<int>(x.size());
  for (int round = 0; round < 8; ++round) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += x[i];
    if (s == 1.0) return;
    for (int i = 0; i < n; ++i) x[i] /= s;
  }
  // force the largest entry so the running sum lands on 1 exactly
  int imax = 0;
  for (int i = 1; i < n; ++i)
    if (x[i] > x[imax]) imax = i;
  double rest = 0.0;
  for (int i = 0; i < n; ++i)
    if (i != imax) rest += x[i];
  x[imax] = 1.0 - rest;
}

// Power iteration for the Perron vector of an irreducible nonnegative
// matrix. Iterates with S + I so periodic matrices converge too.
inline DVec perron_vector(const DMat& s, double tol, int max_iters, bool* converged) {
  const int n = static_cast<int>(s.rows());
  DMat shifted = s + DMat::Identity(n, n);
  DVec x = DVec::Constant(n, 1.0 / n);
  *converged = false;
  for (int it = 0; it < max_iters; ++it) {
    DVec y = shifted * x;
    y /= y.template lpNorm<1>();
    double diff = (y - x).template lpNorm<Eigen::Infinity>();
    x = y;
    if (diff < tol) {
      *converged = true;
      break;
    }
  }
  normalize_to_unit_sum(x);
  return x;
}

// Period of the class structure of a nonnegative matrix: gcd of the lengths
// of the closed walks inside each strongly connected component, computed by
// the BFS level-difference method.
inline int matrix_period(const IMat& a) {
  const int n = static_cast<int>(a.rows());
  // SCC ids via Kosaraju
  std::vector<int> order;
  {
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    for (int s0 = 0; s0 < n; ++s0) {
      if (seen[static_cast<std::size_t>(s0)]) continue;
      // iterative post-order
      std::vector<std::pair<int, int>> st{{s0, 0}};
      seen[static_cast<std::size_t>(s0)] = 1;
      while (!st.empty()) {
        auto& [v, next] = st.back();
        bool pushed = false;
        for (int w = next; w < n; ++w) {
          if (a(v, w) > 0 && !seen[static_cast<std::size_t>(w)]) {
            st.back().second = w + 1;
            seen[static_cast<std::size_t>(w)] = 1;
            st.emplace_back(w, 0);
            pushed = true;
            break;
          }
        }
        if (!pushed) {
          order.push_back(v);
          st.pop_back();
        }
      }
    }
  }
  std::vector<int> comp(static_cast<std::size_t>(n), -1);
  int ncomp = 0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if (comp[static_cast<std::size_t>(*it)] >= 0) continue;
    std::vector<int> stack{*it};
    comp[static_cast<std::size_t>(*it)] = ncomp;
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      for (int w = 0; w < n; ++w) {
        if (a(w, v) > 0 && comp[static_cast<std::size_t>(w)] < 0) {
          comp[static_cast<std::size_t>(w)] = ncomp;
          stack.push_back(w);
        }
      }
    }
    ++ncomp;
  }
  // per-SCC gcd of (level[u] + 1 - level[v]) over internal edges u -> v
  long long g = 0;
  for (int c = 0; c < ncomp; ++c) {
    int root = -1;
    for (int v = 0; v < n && root < 0; ++v)
      if (comp[static_cast<std::size_t>(v)] == c) root = v;
    std::vector<long long> level(static_cast<std::size_t>(n), -1);
    std::vector<int> queue{root};
    level[static_cast<std::size_t>(root)] = 0;
    std::size_t qi = 0;
    long long cg = 0;
    while (qi < queue.size()) {
      int v = queue[qi++];
      for (int w = 0; w < n; ++w) {
        if (a(v, w) <= 0 || comp[static_cast<std::size_t>(w)] != c) continue;
        if (level[static_cast<std::size_t>(w)] < 0) {
          level[static_cast<std::size_t>(w)] = level[static_cast<std::size_t>(v)] + 1;
          queue.push_back(w);
        } else {
          cg = std::gcd(cg, level[static_cast<std::size_t>(v)] + 1 -
                                level[static_cast<std::size_t>(w)]);
        }
      }
    }
    if (cg != 0) g = std::gcd(g, cg);
  }
  return g == 0 ? 1 : static_cast<int>(g < 0 ? -g : g);
}

}  // namespace detail

// Validates the adjacency data of a k-graph and records the capability
// flags the spectral machinery depends on.
inline KGraph validate_kgraph(int k, int num_vertices, const std::vector<IMat>& matrices) {
  if (k <= 0 || num_vertices <= 0 || static_cast<int>(matrices.size()) != k)
    throw Error(ErrorCode::SchemaError, "expected k >= 1 square matrices");
  for (int i = 0; i < k; ++i) {
    if (matrices[static_cast<std::size_t>(i)].rows() != num_vertices ||
        matrices[static_cast<std::size_t>(i)].cols() != num_vertices)
      throw Error(ErrorCode::SchemaError,
                  "matrix " + std::to_string(i + 1) + " is not " +
                      std::to_string(num_vertices) + "x" + std::to_string(num_vertices));
  }
  for (int i = 0; i < k; ++i) {
    const IMat& m = matrices[static_cast<std::size_t>(i)];
    if ((m.array() < 0).any())
      throw Error(ErrorCode::NegativeOrNonIntegerEntry,
                  "matrix " + std::to_string(i + 1) + " has a negative entry");
  }
  for (int i = 0; i < k; ++i) {
    for (int j = i + 1; j < k; ++j) {
      int r = 0, c = 0;
      if (!detail::commute(matrices[static_cast<std::size_t>(i)],
                           matrices[static_cast<std::size_t>(j)], &r, &c))
        throw Error(ErrorCode::NonCommuting,
                    "A_" + std::to_string(i + 1) + " and A_" + std::to_string(j + 1) +
                        " disagree at entry (" + std::to_string(r) + "," +
                        std::to_string(c) + ")");
    }
  }
  bool hyp32 = true;
  for (int i = 0; i < k; ++i) {
    const IMat& m = matrices[static_cast<std::size_t>(i)];
    for (int v = 0; v < num_vertices; ++v) {
      std::int64_t row_sum = m.row(v).sum();
      if (row_sum == 0)
        throw Error(ErrorCode::SourceVertex,
                    "row " + std::to_string(v) + " of matrix " + std::to_string(i + 1) +
                        " is all zero");
      if (row_sum < 2) hyp32 = false;
    }
  }
  IMat u = IMat::Zero(num_vertices, num_vertices);
  for (const IMat& m : matrices) u += m;
  if (!detail::strongly_connected(u))
    throw Error(ErrorCode::NotStronglyConnected,
                "the union digraph A_1 + ... + A_k is not strongly connected");

  KGraph g;
  g.rank = k;
  g.num_vertices = num_vertices;
  g.matrices = matrices;
  g.hypothesis_3_2 = hyp32;

  // rho = prod_i rho_i via the common Perron vector of the sum matrix
  bool ok = false;
  DVec x = detail::perron_vector(u.cast<double>(), 1e-12, 100000, &ok);
  double log_rho = 0.0;
  for (int i = 0; i < k; ++i) {
    DVec ax = matrices[static_cast<std::size_t>(i)].cast<double>() * x;
    int imax = 0;
    x.maxCoeff(&imax);
    log_rho += std::log(ax[imax] / x[imax]);
  }
  g.rho_product_gt_1 = log_rho > 0.0;
  return g;
}

// Computes the Perron radii, the common eigenvector, the period of
// A = A_1 ... A_k and the normalized limit matrices A^(j).
inline PerronData perron_data(const KGraph& g, double tol = 1e-12) {
  const int n = g.num_vertices;
  const int max_iters = 100000;

  IMat u = IMat::Zero(n, n);
  for (const IMat& m : g.matrices) u += m;
  bool converged = false;
  DVec x = detail::perron_vector(u.cast<double>(), tol, max_iters, &converged);
  if (!converged)
    throw Error(ErrorCode::NoConvergence, "power iteration did not reach tolerance");

  PerronData pd;
  pd.x = x;
  pd.hypothesis_3_2 = g.hypothesis_3_2;
  int imax = 0;
  x.maxCoeff(&imax);
  pd.rho.reserve(static_cast<std::size_t>(g.rank));
  double rho_prod = 1.0;
  for (int i = 0; i < g.rank; ++i) {
    DVec ax = g.matrices[static_cast<std::size_t>(i)].cast<double>() * x;
    double rho_i = ax[imax] / x[imax];
    double residual = (ax - rho_i * x).lpNorm<Eigen::Infinity>();
    if (residual > 10.0 * tol * std::max(1.0, rho_i))
      throw Error(ErrorCode::InconsistentEigenvector,
                  "A_" + std::to_string(i + 1) +
                      " does not share the Perron eigenvector (residual " +
                      std::to_string(residual) + ")");
    pd.rho.push_back(rho_i);
    rho_prod *= rho_i;
  }
  pd.rho_prod = rho_prod;

  IMat a_exact = g.matrices[0];
  for (int i = 1; i < g.rank; ++i) {
    // entries stay modest at desk scale; 128-bit guard not needed after validate
    a_exact = (a_exact * g.matrices[static_cast<std::size_t>(i)]).eval();
  }
  pd.period_p = detail::matrix_period(a_exact);

  // A^(j) by iterating the rho^p-normalized p-th power
  const int p = pd.period_p;
  DMat a = a_exact.cast<double>();
  DMat ap = DMat::Identity(n, n);
  for (int i = 0; i < p; ++i) ap = (ap * a / rho_prod).eval();
  pd.limit_matrices.resize(static_cast<std::size_t>(p));
  DMat base = DMat::Identity(n, n);
  for (int j = 0; j < p; ++j) {
    DMat cur = base;
    bool settled = false;
    for (int it = 0; it < max_iters; ++it) {
      DMat next = cur * ap;
      double diff = (next - cur).cwiseAbs().maxCoeff();
      cur = next;
      if (diff < tol) {
        settled = true;
        break;
      }
    }
    if (!settled)
      throw Error(ErrorCode::NoConvergence,
                  "normalized powers did not settle for limit matrix " + std::to_string(j));
    pd.limit_matrices[static_cast<std::size_t>(j)] = cur;
    base = (base * a / rho_prod).eval();
  }
  return pd;
}

}  // namespace kbratteli
