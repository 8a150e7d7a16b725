#pragma once

// Stacked iterate for n-agent simulations: one p-dimensional block per agent,
// stored contiguously as a single (n*p)-vector.

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

namespace neardgd {

struct StackedIterate {
  int agents = 0;
  int dim = 0;
  Eigen::VectorXd data;  // size agents*dim, block i at [i*dim, (i+1)*dim)

  StackedIterate() = default;
  StackedIterate(int n, int p) : agents(n), dim(p), data(Eigen::VectorXd::Zero(static_cast<long>(n) * p)) {
    if (n < 1 || p < 1) throw std::invalid_argument("StackedIterate: agents and dim must be positive");
  }

  static StackedIterate zeros(int n, int p) { return StackedIterate(n, p); }

  // Every agent starts at the same point.
  static StackedIterate shared(int n, const Eigen::VectorXd& point) {
    StackedIterate s(n, static_cast<int>(point.size()));
    for (int i = 0; i < n; ++i) s.block(i) = point;
    return s;
  }

  Eigen::VectorBlock<Eigen::VectorXd> block(int i) { return data.segment(static_cast<long>(i) * dim, dim); }
  Eigen::VectorBlock<const Eigen::VectorXd> block(int i) const {
    return data.segment(static_cast<long>(i) * dim, dim);
  }

  // Mean across agents, accumulated in ascending agent order for reproducibility.
  Eigen::VectorXd block_mean() const {
    Eigen::VectorXd m = Eigen::VectorXd::Zero(dim);
    for (int i = 0; i < agents; ++i) m += block(i);
    return m / static_cast<double>(agents);
  }

  bool all_finite() const { return data.allFinite(); }
};

}  // namespace neardgd
