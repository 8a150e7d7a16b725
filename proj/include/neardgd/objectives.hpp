#pragma once

// Local objective families for multi-agent optimization.
//
// Each of the n agents owns a smooth, strongly convex local function f_i; the
// network-wide target is the minimizer of sum_i f_i.  Two concrete families are
// provided: seeded synthetic quadratics with a prescribed condition number
// kappa = mean(L_i)/mean(mu_i), and L2-regularized logistic regression over
// data shards.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

namespace neardgd {

struct LocalObjective {
  std::function<double(const Eigen::VectorXd&)> value;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> gradient;
  double lipschitz = 0.0;         // L_i: gradient Lipschitz constant
  double strong_convexity = 0.0;  // mu_i > 0
  // Minimizer of f_i alone (closed form for quadratics, iterative otherwise).
  std::function<Eigen::VectorXd()> minimizer;
};

struct LocalObjectiveSet {
  int agents = 0;
  int dim = 0;
  std::vector<LocalObjective> locals;

  double value_sum(const Eigen::VectorXd& x) const {
    double v = 0.0;
    for (const auto& f : locals) v += f.value(x);
    return v;
  }
  Eigen::VectorXd gradient_sum(const Eigen::VectorXd& x) const {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(dim);
    for (const auto& f : locals) g += f.gradient(x);
    return g;
  }
};

struct AggregateConstants {
  double lipschitz_max = 0.0;        // L = max_i L_i
  double lipschitz_mean = 0.0;       // mean of L_i
  double strong_convexity_mean = 0.0;  // mean of mu_i
};

inline AggregateConstants aggregate_constants(const LocalObjectiveSet& set) {
  if (set.locals.empty()) throw std::invalid_argument("aggregate_constants: empty objective set");
  AggregateConstants c;
  for (const auto& f : set.locals) {
    if (f.lipschitz <= 0.0 || f.strong_convexity <= 0.0)
      throw std::invalid_argument("aggregate_constants: constants must be positive");
    c.lipschitz_max = std::max(c.lipschitz_max, f.lipschitz);
    c.lipschitz_mean += f.lipschitz;
    c.strong_convexity_mean += f.strong_convexity;
  }
  c.lipschitz_mean /= static_cast<double>(set.locals.size());
  c.strong_convexity_mean /= static_cast<double>(set.locals.size());
  return c;
}

// Reference solution of min_x sum_i f_i(x).
struct GroundTruth {
  Eigen::VectorXd x_star;
  double f_star = 0.0;       // sum_i f_i(x_star)
  double tolerance = 0.0;    // estimated accuracy of x_star
  std::optional<std::vector<Eigen::VectorXd>> agent_minimizers;
};

// ---------------------------------------------------------------------------
// Quadratic family: f_i(x) = 0.5 x'A_i x + b_i'x
// ---------------------------------------------------------------------------

struct QuadraticProblem {
  int agents = 0;
  int dim = 0;
  double kappa = 1.0;
  std::uint64_t seed = 0;
  std::vector<Eigen::MatrixXd> a;  // symmetric positive definite
  std::vector<Eigen::VectorXd> b;

  LocalObjectiveSet objectives() const {
    LocalObjectiveSet set;
    set.agents = agents;
    set.dim = dim;
    set.locals.reserve(agents);
    for (int i = 0; i < agents; ++i) {
      const Eigen::MatrixXd& ai = a[i];
      const Eigen::VectorXd& bi = b[i];
      LocalObjective f;
      f.value = [ai, bi](const Eigen::VectorXd& x) { return 0.5 * x.dot(ai * x) + bi.dot(x); };
      f.gradient = [ai, bi](const Eigen::VectorXd& x) -> Eigen::VectorXd { return ai * x + bi; };
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(ai, Eigen::EigenvaluesOnly);
      f.strong_convexity = es.eigenvalues()(0);
      f.lipschitz = es.eigenvalues()(dim - 1);
      f.minimizer = [ai, bi]() -> Eigen::VectorXd { return ai.ldlt().solve(-bi); };
      set.locals.push_back(std::move(f));
    }
    return set;
  }
};

namespace detail {

inline Eigen::MatrixXd random_orthogonal(int p, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd g(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) g(i, j) = normal(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  // Fix signs so the factorization (and hence the draw) is unique.
  for (int j = 0; j < p; ++j)
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  return q;
}

}  // namespace detail

// Draws A_i = Q_i D_i Q_i' with seeded random orthogonal Q_i and positive
// diagonal D_i.  Every agent's spectrum spans exactly [1, kappa]: the extreme
// eigenvalues are pinned to 1 and kappa, so mu_i = 1, L_i = kappa, and the
// condition number mean(L_i)/mean(mu_i) equals kappa by construction.  The
// interior eigenvalues are drawn log-uniform on [kappa/10, kappa]; with the
// random per-agent orientations this keeps sum_i A_i far better conditioned
// than any single agent, so ill-conditioning stresses the local curvature
// bounds (hence the theory-safe stepsize) rather than the aggregate solve.
// b_i are seeded standard normals, rescaled so the minimizer of the sum
// satisfies ||x*|| >= 1.
inline QuadraticProblem generate_quadratic(int n, int p, double kappa, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("generate_quadratic: need at least one agent");
  if (p < 2) throw std::invalid_argument("generate_quadratic: dimension must be >= 2");
  if (kappa < 1.0) throw std::invalid_argument("generate_quadratic: kappa must be >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const double log_kappa = std::log(kappa);
  const double log_floor = log_kappa - std::log(10.0) < 0.0 ? 0.0 : log_kappa - std::log(10.0);

  QuadraticProblem q;
  q.agents = n;
  q.dim = p;
  q.kappa = kappa;
  q.seed = seed;
  q.a.resize(n);
  q.b.resize(n);
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(p, p);
  for (int i = 0; i < n; ++i) {
    Eigen::MatrixXd basis = detail::random_orthogonal(p, rng);
    Eigen::VectorXd d(p);
    d(0) = 1.0;
    for (int j = 1; j + 1 < p; ++j)
      d(j) = std::exp(log_floor + uniform(rng) * (log_kappa - log_floor));
    d(p - 1) = kappa;
    q.a[i] = basis * d.asDiagonal() * basis.transpose();
    // Symmetrize away the last-bit asymmetry of the triple product.
    q.a[i] = 0.5 * (q.a[i] + q.a[i].transpose()).eval();
    s += q.a[i];
  }
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd b_sum = Eigen::VectorXd::Zero(p);
  for (int i = 0; i < n; ++i) {
    q.b[i] = Eigen::VectorXd(p);
    for (int j = 0; j < p; ++j) q.b[i](j) = normal(rng);
    b_sum += q.b[i];
  }
  Eigen::VectorXd x_star = s.ldlt().solve(-b_sum);
  double norm = x_star.norm();
  if (norm == 0.0) throw std::runtime_error("generate_quadratic: degenerate zero minimizer");
  if (norm < 1.0)
    for (int i = 0; i < n; ++i) q.b[i] /= norm;
  return q;
}

// Closed-form minimizer of the quadratic sum; rejects singular or indefinite
// instances and checks the linear-solve residual.
inline GroundTruth quadratic_optimum(const QuadraticProblem& q) {
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(q.dim, q.dim);
  Eigen::VectorXd b_sum = Eigen::VectorXd::Zero(q.dim);
  for (int i = 0; i < q.agents; ++i) {
    s += q.a[i];
    b_sum += q.b[i];
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s, Eigen::EigenvaluesOnly);
  double lambda_min = es.eigenvalues()(0);
  if (!(lambda_min > 0.0)) throw std::invalid_argument("quadratic_optimum: sum is singular or indefinite");
  GroundTruth truth;
  truth.x_star = s.ldlt().solve(-b_sum);
  double resid = (s * truth.x_star + b_sum).norm();
  if (resid > 1e-10 * std::max(1.0, b_sum.norm()))
    throw std::runtime_error("quadratic_optimum: solve residual too large");
  truth.tolerance = resid / lambda_min;
  truth.agent_minimizers.emplace();
  for (int i = 0; i < q.agents; ++i) truth.agent_minimizers->push_back(q.a[i].ldlt().solve(-q.b[i]));
  double f = 0.0;
  for (int i = 0; i < q.agents; ++i)
    f += 0.5 * truth.x_star.dot(q.a[i] * truth.x_star) + q.b[i].dot(truth.x_star);
  truth.f_star = f;
  return truth;
}

// ---------------------------------------------------------------------------
// Logistic family over data shards:
//   f_i(x) = (1/(n*n_i)) sum_s log(1+exp(-b_s a_s'x)) + (1/(n*n_i)) ||x||^2
// ---------------------------------------------------------------------------

struct LogisticProblem {
  int agents = 0;
  int dim = 0;
  std::vector<Eigen::MatrixXd> design;  // n_i x p feature matrices
  std::vector<Eigen::VectorXd> labels;  // entries in {-1,+1}

  LocalObjectiveSet objectives() const;
};

namespace detail {

inline double softplus(double z) {  // log(1+exp(z)) without overflow
  return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

}  // namespace detail

inline LogisticProblem build_logistic(std::vector<Eigen::MatrixXd> design, std::vector<Eigen::VectorXd> labels) {
  if (design.empty() || design.size() != labels.size())
    throw std::invalid_argument("build_logistic: shard lists empty or mismatched");
  LogisticProblem prob;
  prob.agents = static_cast<int>(design.size());
  prob.dim = static_cast<int>(design[0].cols());
  for (std::size_t i = 0; i < design.size(); ++i) {
    if (design[i].rows() == 0) throw std::invalid_argument("build_logistic: empty shard");
    if (design[i].cols() != prob.dim) throw std::invalid_argument("build_logistic: inconsistent feature count");
    if (design[i].rows() != labels[i].size()) throw std::invalid_argument("build_logistic: labels do not match rows");
    for (long s = 0; s < labels[i].size(); ++s)
      if (labels[i](s) != 1.0 && labels[i](s) != -1.0)
        throw std::invalid_argument("build_logistic: labels must be +/-1");
  }
  prob.design = std::move(design);
  prob.labels = std::move(labels);
  return prob;
}

inline LocalObjectiveSet LogisticProblem::objectives() const {
  LocalObjectiveSet set;
  set.agents = agents;
  set.dim = dim;
  const double n_agents = static_cast<double>(agents);
  for (int i = 0; i < agents; ++i) {
    const Eigen::MatrixXd& a = design[i];
    const Eigen::VectorXd& y = labels[i];
    const double scale = 1.0 / (n_agents * static_cast<double>(a.rows()));
    LocalObjective f;
    f.value = [a, y, scale](const Eigen::VectorXd& x) {
      Eigen::VectorXd z = a * x;
      double loss = 0.0;
      for (long s = 0; s < z.size(); ++s) loss += detail::softplus(-y(s) * z(s));
      return scale * (loss + x.squaredNorm());
    };
    f.gradient = [a, y, scale](const Eigen::VectorXd& x) -> Eigen::VectorXd {
      Eigen::VectorXd z = a * x;
      Eigen::VectorXd s(z.size());
      // d/dz log(1+exp(-y z)) = -y / (1+exp(y z))
      for (long r = 0; r < z.size(); ++r) s(r) = -y(r) / (1.0 + std::exp(y(r) * z(r)));
      return scale * (a.transpose() * s + 2.0 * x);
    };
    // ||A_i||_2^2 via the Gram matrix (p x p).
    Eigen::MatrixXd gram = a.transpose() * a;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram, Eigen::EigenvaluesOnly);
    double op_norm_sq = es.eigenvalues()(dim - 1);
    f.lipschitz = scale * (0.25 * op_norm_sq + 2.0);
    f.strong_convexity = scale * 2.0;
    double li = f.lipschitz, mi = f.strong_convexity;
    auto grad = f.gradient;
    const int p = dim;
    f.minimizer = [grad, li, mi, p]() -> Eigen::VectorXd {
      Eigen::VectorXd x = Eigen::VectorXd::Zero(p);
      double step = 2.0 / (li + mi);
      double tol = 1e-12 * (1.0 + grad(x).norm());
      for (long it = 0; it < 500000; ++it) {
        Eigen::VectorXd g = grad(x);
        if (g.norm() <= tol) return x;
        x -= step * g;
      }
      throw std::runtime_error("logistic minimizer: iteration cap reached");
    };
    set.locals.push_back(std::move(f));
  }
  return set;
}

// Gradient descent on sum_i f_i with stepsize 2/(sum L_i + sum mu_i) down to
// ||grad|| <= tol (default: 1e-12 * (1 + ||grad at 0||)).
inline GroundTruth centralized_solve(const LocalObjectiveSet& set, double tol = 0.0, long max_iters = 500000) {
  double l_sum = 0.0, mu_sum = 0.0;
  for (const auto& f : set.locals) {
    l_sum += f.lipschitz;
    mu_sum += f.strong_convexity;
  }
  if (!(mu_sum > 0.0)) throw std::invalid_argument("centralized_solve: sum must be strongly convex");
  const double step = 2.0 / (l_sum + mu_sum);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(set.dim);
  Eigen::VectorXd g = set.gradient_sum(x);
  const double tol_eff = tol > 0.0 ? tol : 1e-12 * (1.0 + g.norm());
  long it = 0;
  while (g.norm() > tol_eff) {
    if (++it > max_iters) throw std::runtime_error("centralized_solve: iteration cap reached");
    x -= step * g;
    g = set.gradient_sum(x);
  }
  GroundTruth truth;
  truth.x_star = x;
  truth.f_star = set.value_sum(x);
  truth.tolerance = g.norm() / mu_sum;
  // Per-agent minimizers are left unset; theory_bounds computes them on demand.
  return truth;
}

}  // namespace neardgd
