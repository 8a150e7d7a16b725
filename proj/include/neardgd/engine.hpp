#pragma once

// Simulation engine for decentralized first-order methods.
//
// All methods share the same state shape (one block per agent) and the same
// two primitives: a consensus round (multiply by the gossip matrix W) and a
// local gradient round.  They differ only in how the primitives compose:
//
//   dgd      x+ = W x - alpha grad f(x)          gradient at the pre-mix point
//   dgd_t    x+ = W^t x - alpha grad f(x)        t mixing rounds per iteration
//   near_dgd y+ = x - alpha grad f(x),           gradient at the post-mix point,
//            x  = W^{t(k)} y                     t(k) may grow with k
//
// The iterate mean obeys mean_{k} = mean_{k-1} - alpha * g_{k-1} exactly
// (W is doubly stochastic), which the engine tracks as a per-run residual.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "neardgd/accounting.hpp"
#include "neardgd/objectives.hpp"
#include "neardgd/stacked.hpp"
#include "neardgd/topology.hpp"

namespace neardgd {

enum class Method { dgd, dgd_t, near_dgd };

inline const char* to_string(Method m) {
  switch (m) {
    case Method::dgd: return "dgd";
    case Method::dgd_t: return "dgd_t";
    case Method::near_dgd: return "near_dgd";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Consensus schedules t(k) for k = 1, 2, ...
// ---------------------------------------------------------------------------

struct ConsensusSchedule {
  enum class Kind { fixed, linear, doubling, logarithmic };
  Kind kind = Kind::fixed;
  long t_fixed = 1;  // fixed(t)
  long period = 1;   // doubling(m): t(k) = 2^floor((k-1)/m)

  static ConsensusSchedule fixed(long t) { return {Kind::fixed, t, 1}; }
  static ConsensusSchedule linear() { return {Kind::linear, 1, 1}; }
  static ConsensusSchedule doubling(long period) { return {Kind::doubling, 1, period}; }
  static ConsensusSchedule logarithmic() { return {Kind::logarithmic, 1, 1}; }

  void validate() const {
    if (kind == Kind::fixed && t_fixed < 1) throw std::invalid_argument("schedule: fixed t must be >= 1");
    if (kind == Kind::doubling && period < 1) throw std::invalid_argument("schedule: doubling period must be >= 1");
  }

  long operator()(long k) const {
    if (k < 1) throw std::invalid_argument("schedule: iterations are 1-based");
    switch (kind) {
      case Kind::fixed: return t_fixed;
      case Kind::linear: return k;
      case Kind::doubling: {
        long e = (k - 1) / period;
        if (e > 60) throw std::overflow_error("schedule: doubling overflow at iteration " + std::to_string(k));
        return 1L << e;
      }
      case Kind::logarithmic: {
        long e = 0;
        while ((1L << e) < k + 1 && e < 62) ++e;  // ceil(log2(k+1))
        return std::max<long>(1, e);
      }
    }
    return 1;
  }

  std::string describe() const {
    switch (kind) {
      case Kind::fixed: return "fixed(" + std::to_string(t_fixed) + ")";
      case Kind::linear: return "linear";
      case Kind::doubling: return "doubling(" + std::to_string(period) + ")";
      case Kind::logarithmic: return "logarithmic";
    }
    return "?";
  }
};

// ---------------------------------------------------------------------------
// Step operators
// ---------------------------------------------------------------------------

// One mixing round: x -> (W (x) I) x.
inline StackedIterate consensus_operator(const ConsensusMatrix& w, const StackedIterate& x) {
  return consensus_apply(w, x, 1);
}

// Blockwise local gradient step: x_i -> x_i - alpha grad f_i(x_i).
inline StackedIterate gradient_operator(const LocalObjectiveSet& obj, double alpha, const StackedIterate& x) {
  if (x.agents != obj.agents || x.dim != obj.dim)
    throw std::invalid_argument("gradient_operator: iterate does not match objective set");
  StackedIterate out = x;
  for (int i = 0; i < x.agents; ++i) out.block(i) -= alpha * obj.locals[i].gradient(x.block(i));
  return out;
}

// x+ = W^t x - alpha grad f(x); gradients are evaluated at the incoming x.
inline StackedIterate dgdt_step(const ConsensusMatrix& w, long t, const LocalObjectiveSet& obj, double alpha,
                                const StackedIterate& x) {
  if (t < 1) throw std::invalid_argument("dgdt_step: t must be >= 1");
  std::vector<Eigen::VectorXd> grads(x.agents);
  for (int i = 0; i < x.agents; ++i) grads[i] = obj.locals[i].gradient(x.block(i));
  StackedIterate out = consensus_apply(w, x, t);
  for (int i = 0; i < x.agents; ++i) out.block(i) -= alpha * grads[i];
  return out;
}

inline StackedIterate dgd_step(const ConsensusMatrix& w, const LocalObjectiveSet& obj, double alpha,
                               const StackedIterate& x) {
  return dgdt_step(w, 1, obj, alpha, x);
}

// One NEAR-DGD iteration from y_k: mix first (x_k = W^{t_k} y_k), then take
// `grad_steps` local gradient steps from x_k to get y_{k+1}.
inline std::pair<StackedIterate, StackedIterate> near_dgd_step(const ConsensusMatrix& w, long t_k,
                                                               const LocalObjectiveSet& obj, double alpha,
                                                               int grad_steps, const StackedIterate& y) {
  if (t_k < 1) throw std::invalid_argument("near_dgd_step: t must be >= 1");
  if (grad_steps < 1) throw std::invalid_argument("near_dgd_step: grad_steps must be >= 1");
  StackedIterate x = consensus_apply(w, y, t_k);
  StackedIterate next = x;
  for (int s = 0; s < grad_steps; ++s) next = gradient_operator(obj, alpha, next);
  return {std::move(x), std::move(next)};
}

// ---------------------------------------------------------------------------
// Theory-safe stepsize bounds
// ---------------------------------------------------------------------------

// Smallest eigenvalue of W^t, evaluated on the spectrum (min over lambda^t).
inline double lambda_min_power(const ConsensusMatrix& w, long t) {
  if (t < 1) throw std::invalid_argument("lambda_min_power: t must be >= 1");
  double m = std::numeric_limits<double>::infinity();
  for (long i = 0; i < w.eigenvalues.size(); ++i) m = std::min(m, std::pow(w.eigenvalues(i), static_cast<double>(t)));
  return m;
}

// Largest stepsize with a convergence guarantee:
//   dgd/dgd_t: min{ (1 + lambda_min(W^t))/L, 2/(mean mu + mean L) }
//   near_dgd:  min{ 1/L, 2/(mean mu + mean L) }
inline double max_stepsize(Method method, const LocalObjectiveSet& obj, const ConsensusMatrix& w, long t = 1) {
  AggregateConstants agg = aggregate_constants(obj);
  double c4 = 2.0 / (agg.strong_convexity_mean + agg.lipschitz_mean);
  switch (method) {
    case Method::dgd: t = 1; [[fallthrough]];
    case Method::dgd_t: return std::min((1.0 + lambda_min_power(w, t)) / agg.lipschitz_max, c4);
    case Method::near_dgd: return std::min(1.0 / agg.lipschitz_max, c4);
  }
  throw std::invalid_argument("max_stepsize: unknown method");
}

// ---------------------------------------------------------------------------
// Run configuration and main loop
// ---------------------------------------------------------------------------

struct MethodConfig {
  std::string label;
  Method method = Method::dgd;
  ConsensusSchedule schedule = ConsensusSchedule::fixed(1);  // dgd/dgd_t: must be fixed
  int grad_steps = 1;                                        // near_dgd only
  double alpha = 0.0;
  long max_iters = 0;
  Eigen::VectorXd init_point;      // empty = origin; near_dgd may start anywhere (shared)
  bool exact_consensus = false;    // disable the fully-mixed round cap
  double divergence_threshold = 1e12;

  void validate(int dim) const {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw std::invalid_argument(label + ": alpha must be positive");
    if (max_iters < 0) throw std::invalid_argument(label + ": max_iters must be >= 0");
    schedule.validate();
    if (method != Method::near_dgd) {
      if (grad_steps != 1) throw std::invalid_argument(label + ": grad_steps > 1 requires near_dgd");
      if (schedule.kind != ConsensusSchedule::Kind::fixed)
        throw std::invalid_argument(label + ": dgd/dgd_t require a fixed schedule");
      if (init_point.size() != 0 && init_point.norm() != 0.0)
        throw std::invalid_argument(label + ": dgd/dgd_t must start at the origin");
    }
    if (grad_steps < 1) throw std::invalid_argument(label + ": grad_steps must be >= 1");
    if (init_point.size() != 0 && init_point.size() != dim)
      throw std::invalid_argument(label + ": init point has wrong dimension");
    if (!(divergence_threshold > 0.0)) throw std::invalid_argument(label + ": divergence threshold must be positive");
  }
};

namespace detail {

inline StackedIterate apply_mixing(const ConsensusMatrix& w, const StackedIterate& x, long t, bool exact) {
  // Past w.mixing_rounds applications, one more round moves the iterate by
  // less than 2^-64 of its scale; skip the numerically idle rounds unless the
  // caller wants the literal composition.
  long t_eff = exact ? t : std::min<long>(t, w.mixing_rounds);
  return consensus_apply(w, x, t_eff);
}

}  // namespace detail

// Runs one method and records the per-iteration trace.  Row k reports the
// state after iteration k: its mean error, per-agent error, and the cumulative
// round counters (t(k) mixing rounds and `grad_steps` gradient rounds per
// iteration for near_dgd; t and 1 for dgd/dgd_t).
inline RunTrace run(const MethodConfig& cfg, const ConsensusMatrix& w, const LocalObjectiveSet& obj,
                    const GroundTruth& truth) {
  cfg.validate(obj.dim);
  if (w.n != obj.agents) throw std::invalid_argument("run: topology and objective agent counts differ");

  StackedIterate x = cfg.init_point.size() == 0 ? StackedIterate::zeros(obj.agents, obj.dim)
                                                : StackedIterate::shared(obj.agents, cfg.init_point);
  RunTrace trace;
  trace.set_manifest("method", to_string(cfg.method));
  trace.set_manifest("label", cfg.label);
  trace.set_manifest("schedule", cfg.schedule.describe());
  trace.set_manifest("grad_steps", std::to_string(cfg.grad_steps));
  trace.set_manifest("alpha", detail::format_double(cfg.alpha));
  trace.set_manifest("max_iters", std::to_string(cfg.max_iters));
  trace.set_manifest("agents", std::to_string(obj.agents));
  trace.set_manifest("dim", std::to_string(obj.dim));
  trace.set_manifest("grad_evals_per_round", std::to_string(obj.agents));
  trace.set_manifest("beta", detail::format_double(w.beta));
  trace.set_manifest("lambda_min", detail::format_double(w.lambda_min));
  trace.set_manifest("exact_consensus", cfg.exact_consensus ? "1" : "0");
  trace.rows.reserve(static_cast<std::size_t>(std::max<long>(cfg.max_iters, 0)));

  Eigen::VectorXd prev_mean = x.block_mean();
  long long comm_rounds = 0, grad_rounds = 0;
  const double inv_n = 1.0 / static_cast<double>(obj.agents);

  for (long k = 1; k <= cfg.max_iters; ++k) {
    long t_k = 0;
    Eigen::VectorXd iter_grad_mean = Eigen::VectorXd::Zero(obj.dim);
    if (cfg.method == Method::near_dgd) {
      for (int s = 0; s < cfg.grad_steps; ++s) {
        StackedIterate next = x;
        Eigen::VectorXd gsum = Eigen::VectorXd::Zero(obj.dim);
        for (int i = 0; i < obj.agents; ++i) {
          Eigen::VectorXd g = obj.locals[i].gradient(x.block(i));
          gsum += g;
          next.block(i) -= cfg.alpha * g;
        }
        iter_grad_mean += inv_n * gsum;
        x = std::move(next);
        ++grad_rounds;
      }
      t_k = cfg.schedule(k);
      x = detail::apply_mixing(w, x, t_k, cfg.exact_consensus);
      comm_rounds += t_k;
    } else {
      t_k = cfg.method == Method::dgd ? 1 : cfg.schedule.t_fixed;
      std::vector<Eigen::VectorXd> grads(obj.agents);
      Eigen::VectorXd gsum = Eigen::VectorXd::Zero(obj.dim);
      for (int i = 0; i < obj.agents; ++i) {
        grads[i] = obj.locals[i].gradient(x.block(i));
        gsum += grads[i];
      }
      iter_grad_mean = inv_n * gsum;
      x = detail::apply_mixing(w, x, t_k, cfg.exact_consensus);
      for (int i = 0; i < obj.agents; ++i) x.block(i) -= cfg.alpha * grads[i];
      comm_rounds += t_k;
      ++grad_rounds;
    }

    Eigen::VectorXd mean = x.block_mean();
    double drift = (mean - (prev_mean - cfg.alpha * iter_grad_mean)).norm() / (1.0 + prev_mean.norm());
    trace.max_mean_drift = std::max(trace.max_mean_drift, drift);
    prev_mean = mean;

    TraceRow row;
    row.k = k;
    row.t_k = t_k;
    row.comm_rounds = comm_rounds;
    row.grad_rounds = grad_rounds;
    row.rel_err = x.all_finite() ? relative_error(mean, truth) : std::numeric_limits<double>::quiet_NaN();
    row.cons_err = x.all_finite() ? consensus_error(x, truth) : std::numeric_limits<double>::quiet_NaN();
    trace.rows.push_back(row);

    if (!std::isfinite(row.rel_err) || row.rel_err > cfg.divergence_threshold) {
      trace.diverged = true;
      trace.diverged_at = k;
      break;
    }
  }
  return trace;
}

// ---------------------------------------------------------------------------
// Convergence-theory constants and bound series
// ---------------------------------------------------------------------------

// Constants entering the one-step mean contraction
//   ||mean_{k+1} - x*||^2 <= c1^2 ||mean_k - x*||^2 + (deviation term),
// where the deviation term depends on the method:
//   dgd_t fixed t:    c3_dgdt^2 / (1-beta^t)^2        (uniform in k)
//   near_dgd t(k):    c3^2 beta^{2 t(k)}              (shrinks if t(k) grows)
struct TheoryBounds {
  double alpha = 0.0, beta = 0.0;
  double lipschitz_max = 0.0;                  // L
  double c1 = 0.0, c2 = 0.0, c3 = 0.0, c4 = 0.0, delta = 0.0;
  double gamma = 0.0, nu = 0.0;                // per-agent contraction pieces
  double d_near = 0.0, d_dgdt = 0.0, c3_dgdt = 0.0;
  double e0 = 0.0;                             // ||mean(y0) - x*||
  double rho = 0.0, big_c = 0.0;               // R-linear envelope, t(k)=k
  ConsensusSchedule schedule;
  Eigen::VectorXd eigenvalues;                 // of W, for per-t stepsize checks

  // Uniform-in-k bound for dgd_t with fixed t: c1^k e0 + c3/(sqrt(1-c1^2)(1-beta^t)).
  double dgdt_bound(long k, long t) const {
    double lambda_min_t = std::numeric_limits<double>::infinity();
    for (long i = 0; i < eigenvalues.size(); ++i)
      lambda_min_t = std::min(lambda_min_t, std::pow(eigenvalues(i), static_cast<double>(t)));
    double limit = std::min((1.0 + lambda_min_t) / lipschitz_max, c4);
    if (alpha > limit * (1.0 + 1e-12))
      throw std::invalid_argument("dgdt_bound: stepsize exceeds the guarantee for this t");
    double beta_t = std::pow(beta, static_cast<double>(t));
    return std::pow(c1, static_cast<double>(k)) * e0 + c3_dgdt / (std::sqrt(1.0 - c1 * c1) * (1.0 - beta_t));
  }

  // Recursive envelope for near_dgd under this bound's schedule; entry k bounds
  // ||mean_k - x*|| after iteration k (entry 0 = e0).  The first step has no
  // deviation term: all agents start at the same point.
  std::vector<double> near_series(long iterations) const {
    std::vector<double> b(static_cast<std::size_t>(iterations) + 1);
    b[0] = e0;
    double sq = e0 * e0;
    for (long k = 1; k <= iterations; ++k) {
      double dev = k == 1 ? 0.0 : std::pow(beta, static_cast<double>(schedule(k - 1)));
      sq = c1 * c1 * sq + c3 * c3 * dev * dev;
      b[static_cast<std::size_t>(k)] = std::sqrt(sq);
    }
    return b;
  }

  // Closed-form envelope C rho^k for the increasing schedule t(k)=k.
  double rlinear_bound(long k) const { return big_c * std::pow(rho, static_cast<double>(k)); }

  // Limiting neighborhood radius for near_dgd with fixed t.
  double neighborhood_radius(long t) const {
    return lipschitz_max * d_near * std::pow(beta, static_cast<double>(t)) / c2 * std::sqrt(2.0 * (2.0 - alpha * c2));
  }
};

inline TheoryBounds theory_bounds(const LocalObjectiveSet& obj, const ConsensusMatrix& w, double alpha,
                                  const ConsensusSchedule& schedule, const GroundTruth& truth,
                                  const StackedIterate& y0) {
  if (y0.agents != obj.agents || y0.dim != obj.dim)
    throw std::invalid_argument("theory_bounds: iterate does not match objective set");
  AggregateConstants agg = aggregate_constants(obj);
  TheoryBounds tb;
  tb.alpha = alpha;
  tb.beta = w.beta;
  tb.eigenvalues = w.eigenvalues;
  tb.schedule = schedule;
  tb.lipschitz_max = agg.lipschitz_max;
  tb.c2 = 2.0 * agg.strong_convexity_mean * agg.lipschitz_mean / (agg.strong_convexity_mean + agg.lipschitz_mean);
  tb.c4 = 2.0 / (agg.strong_convexity_mean + agg.lipschitz_mean);
  if (!(alpha > 0.0) || alpha > std::min(1.0 / agg.lipschitz_max, tb.c4) * (1.0 + 1e-12))
    throw std::invalid_argument("theory_bounds: alpha outside (0, min{1/L, c4}]");
  if (alpha * tb.c2 >= 1.0) throw std::invalid_argument("theory_bounds: alpha*c2 must be < 1");
  // delta chosen so the contraction factor collapses to 1 - alpha c2 / 2.
  tb.delta = tb.c2 / (2.0 * (1.0 - alpha * tb.c2));
  double c1_sq = 1.0 - alpha * tb.c2 + alpha * tb.delta - alpha * alpha * tb.delta * tb.c2;
  tb.c1 = std::sqrt(c1_sq);

  tb.gamma = std::numeric_limits<double>::infinity();
  for (const auto& f : obj.locals)
    tb.gamma = std::min(tb.gamma, f.strong_convexity * f.lipschitz / (f.strong_convexity + f.lipschitz));
  tb.nu = 2.0 * alpha * tb.gamma;
  if (!(tb.nu > 0.0 && tb.nu < 1.0)) throw std::invalid_argument("theory_bounds: nu = 2*alpha*gamma outside (0,1)");

  std::vector<Eigen::VectorXd> minimizers;
  if (truth.agent_minimizers && static_cast<int>(truth.agent_minimizers->size()) == obj.agents) {
    minimizers = *truth.agent_minimizers;
  } else {
    for (const auto& f : obj.locals) minimizers.push_back(f.minimizer());
  }
  StackedIterate u_star(obj.agents, obj.dim);
  for (int i = 0; i < obj.agents; ++i) u_star.block(i) = minimizers[i];
  tb.d_near = (y0.data - u_star.data).norm() + (tb.nu + 4.0) / tb.nu * u_star.data.norm();
  tb.c3 = std::sqrt(alpha * (alpha + 1.0 / tb.delta)) * tb.d_near * agg.lipschitz_max;

  const Eigen::VectorXd origin = Eigen::VectorXd::Zero(obj.dim);
  double gap_sum = 0.0;
  for (int i = 0; i < obj.agents; ++i) gap_sum += obj.locals[i].value(origin) - obj.locals[i].value(minimizers[i]);
  tb.d_dgdt = std::sqrt(2.0 * agg.lipschitz_max * std::max(gap_sum, 0.0));
  tb.c3_dgdt =
      std::sqrt(alpha * alpha * alpha * (alpha + 1.0 / tb.delta)) * agg.lipschitz_max * tb.d_dgdt;

  tb.e0 = (y0.block_mean() - truth.x_star).norm();
  tb.rho = std::max(w.beta, std::sqrt(1.0 - alpha * tb.c2 / 4.0));
  tb.big_c = std::max(tb.e0, 2.0 * tb.c3 / std::sqrt(alpha * tb.c2));
  return tb;
}

// Default stepsize used when a config does not pin one: 90% of the bound.
inline double default_stepsize(Method method, const LocalObjectiveSet& obj, const ConsensusMatrix& w, long t = 1) {
  return 0.9 * max_stepsize(method, obj, w, t);
}

}  // namespace neardgd
