#pragma once

// Network topologies and consensus (gossip) matrices.
//
// A consensus matrix W is symmetric, doubly stochastic, has a strictly positive
// diagonal, and matches the graph's adjacency structure off the diagonal.  For a
// connected graph it has exactly one eigenvalue equal to 1; the magnitude of the
// second-largest eigenvalue, beta < 1, governs how fast repeated applications of
// W drive the agents to agreement.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "neardgd/stacked.hpp"
#include "neardgd/text_format.hpp"

namespace neardgd {

enum class GraphKind { cyclic_k, path, star, complete };

inline const char* to_string(GraphKind k) {
  switch (k) {
    case GraphKind::cyclic_k: return "cyclic_k";
    case GraphKind::path: return "path";
    case GraphKind::star: return "star";
    case GraphKind::complete: return "complete";
  }
  return "?";
}

struct NetworkTopology {
  int n = 0;
  GraphKind kind = GraphKind::complete;
  int k = 0;  // neighbor count per node for cyclic_k, unused otherwise
  // Sorted adjacency lists, no self-loops, symmetric.
  std::vector<std::vector<int>> neighbors;

  int degree(int i) const { return static_cast<int>(neighbors[i].size()); }

  bool connected() const {
    std::vector<char> seen(n, 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    int count = 1;
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      for (int u : neighbors[v])
        if (!seen[u]) {
          seen[u] = 1;
          ++count;
          stack.push_back(u);
        }
    }
    return count == n;
  }
};

// k-cyclic ring: node i is adjacent to the k nearest ring neighbors, k/2 on each
// side.  k must be even, 1 <= k <= n-1.
inline NetworkTopology build_topology(GraphKind kind, int n, int k = 0) {
  if (n < 2) throw std::invalid_argument("build_topology: need at least 2 nodes");
  NetworkTopology t;
  t.n = n;
  t.kind = kind;
  t.k = k;
  t.neighbors.assign(n, {});
  auto link = [&](int a, int b) {
    t.neighbors[a].push_back(b);
    t.neighbors[b].push_back(a);
  };
  switch (kind) {
    case GraphKind::cyclic_k: {
      if (k < 1 || k >= n) throw std::invalid_argument("build_topology: cyclic_k requires 1 <= k < n");
      if (k % 2 != 0) throw std::invalid_argument("build_topology: cyclic_k requires even k");
      for (int i = 0; i < n; ++i)
        for (int d = 1; d <= k / 2; ++d) link(i, (i + d) % n);
      break;
    }
    case GraphKind::path:
      for (int i = 0; i + 1 < n; ++i) link(i, i + 1);
      break;
    case GraphKind::star:
      for (int i = 1; i < n; ++i) link(0, i);
      break;
    case GraphKind::complete:
      for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) link(i, j);
      break;
  }
  for (auto& adj : t.neighbors) {
    std::sort(adj.begin(), adj.end());
    adj.erase(std::unique(adj.begin(), adj.end()), adj.end());
  }
  if (!t.connected()) throw std::invalid_argument("build_topology: graph is disconnected");
  return t;
}

struct SpectralInfo {
  Eigen::VectorXd eigenvalues;  // descending
  double beta = 0.0;            // second-largest magnitude
  double lambda_min = 0.0;      // smallest eigenvalue
};

// Eigen-decomposes a symmetric stochastic matrix and checks that exactly one
// eigenvalue equals 1 (within 1e-8); throws otherwise.
inline SpectralInfo spectral_analysis(const Eigen::MatrixXd& w) {
  if (w.rows() != w.cols() || w.rows() < 1) throw std::invalid_argument("spectral_analysis: square matrix required");
  if (!w.isApprox(w.transpose(), 1e-12)) throw std::invalid_argument("spectral_analysis: matrix is not symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(w);
  if (es.info() != Eigen::Success) throw std::runtime_error("spectral_analysis: eigendecomposition failed");
  Eigen::VectorXd ev = es.eigenvalues();  // ascending
  SpectralInfo info;
  info.eigenvalues = ev.reverse();
  info.lambda_min = ev(0);
  int units = 0;
  for (long i = 0; i < ev.size(); ++i)
    if (std::abs(ev(i) - 1.0) <= 1e-8) ++units;
  if (units == 0) throw std::invalid_argument("spectral_analysis: no unit eigenvalue (not doubly stochastic?)");
  if (units > 1) throw std::invalid_argument("spectral_analysis: repeated unit eigenvalue (disconnected graph?)");
  double beta = 0.0;
  // Largest magnitude among all eigenvalues except the single unit one.
  bool unit_skipped = false;
  for (long i = ev.size() - 1; i >= 0; --i) {
    if (!unit_skipped && std::abs(ev(i) - 1.0) <= 1e-8) {
      unit_skipped = true;
      continue;
    }
    beta = std::max(beta, std::abs(ev(i)));
  }
  info.beta = beta;
  return info;
}

struct ConsensusMatrix {
  int n = 0;
  Eigen::MatrixXd entries;
  Eigen::VectorXd eigenvalues;  // descending
  double beta = 0.0;
  double lambda_min = 0.0;
  // Structural nonzeros per row (neighbors plus the diagonal), ascending.
  std::vector<std::vector<int>> row_support;
  // Rounds beyond which one more application moves any block by less than
  // 2^-64 of the iterate scale: beta^t <= 2^-64.
  int mixing_rounds = 1;

  // Validates every structural property; throws on the first violation.
  void validate(const NetworkTopology* topo = nullptr) const {
    if (entries.rows() != n || entries.cols() != n) throw std::invalid_argument("ConsensusMatrix: bad shape");
    for (int i = 0; i < n; ++i) {
      if (entries(i, i) <= 0.0) throw std::invalid_argument("ConsensusMatrix: diagonal must be positive");
      double row = 0.0, col = 0.0;
      for (int j = 0; j < n; ++j) {
        if (entries(i, j) < 0.0) throw std::invalid_argument("ConsensusMatrix: negative entry");
        if (std::abs(entries(i, j) - entries(j, i)) > 1e-12)
          throw std::invalid_argument("ConsensusMatrix: not symmetric");
        row += entries(i, j);
        col += entries(j, i);
      }
      if (std::abs(row - 1.0) > 1e-12 || std::abs(col - 1.0) > 1e-12)
        throw std::invalid_argument("ConsensusMatrix: rows/columns must sum to 1");
    }
    if (topo) {
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          if (i == j) continue;
          bool adjacent = std::binary_search(topo->neighbors[i].begin(), topo->neighbors[i].end(), j);
          if (adjacent != (entries(i, j) != 0.0))
            throw std::invalid_argument("ConsensusMatrix: sparsity does not match adjacency");
        }
    }
    if (!(beta < 1.0)) throw std::invalid_argument("ConsensusMatrix: beta must be < 1");
  }
};

// Metropolis-Hastings weights: W_ij = 1/(1+max(deg_i,deg_j)) on edges, diagonal
// absorbs the remainder.  Symmetric and doubly stochastic by construction.
inline ConsensusMatrix metropolis_weights(const NetworkTopology& topo) {
  ConsensusMatrix w;
  w.n = topo.n;
  w.entries = Eigen::MatrixXd::Zero(topo.n, topo.n);
  for (int i = 0; i < topo.n; ++i) {
    double off = 0.0;
    for (int j : topo.neighbors[i]) {
      double wij = 1.0 / (1.0 + std::max(topo.degree(i), topo.degree(j)));
      w.entries(i, j) = wij;
      off += wij;
    }
    w.entries(i, i) = 1.0 - off;
  }
  SpectralInfo info = spectral_analysis(w.entries);
  w.eigenvalues = info.eigenvalues;
  w.beta = info.beta;
  w.lambda_min = info.lambda_min;
  w.row_support.assign(topo.n, {});
  for (int i = 0; i < topo.n; ++i) {
    auto& sup = w.row_support[i];
    sup = topo.neighbors[i];
    sup.insert(std::lower_bound(sup.begin(), sup.end(), i), i);
  }
  if (w.beta <= 0.0) {
    w.mixing_rounds = 1;
  } else {
    w.mixing_rounds = static_cast<int>(std::ceil(-64.0 * std::log(2.0) / std::log(w.beta)));
    w.mixing_rounds = std::max(w.mixing_rounds, 1);
  }
  w.validate(&topo);
  return w;
}

// Applies W (blockwise, i.e. (W (x) I_p) x) t times.  Never materializes the
// Kronecker product; each row accumulates its neighbor blocks in ascending
// index order so results are bit-reproducible.
inline StackedIterate consensus_apply(const ConsensusMatrix& w, const StackedIterate& x, long t = 1) {
  if (x.agents != w.n) throw std::invalid_argument("consensus_apply: agent count does not match matrix");
  if (t < 0) throw std::invalid_argument("consensus_apply: negative round count");
  StackedIterate cur = x;
  StackedIterate next(x.agents, x.dim);
  for (long round = 0; round < t; ++round) {
    for (int i = 0; i < w.n; ++i) {
      auto out = next.block(i);
      out.setZero();
      for (int j : w.row_support[i]) out += w.entries(i, j) * cur.block(j);
    }
    std::swap(cur, next);
  }
  return cur;
}

// Dense row-major CSV dump at full (round-trip) precision.
inline void dump_csv(const ConsensusMatrix& w, std::ostream& os) {
  for (int i = 0; i < w.n; ++i) {
    for (int j = 0; j < w.n; ++j) {
      if (j) os << ',';
      os << detail::format_double(w.entries(i, j));
    }
    os << '\n';
  }
}

}  // namespace neardgd
