#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

namespace trstmi {

using Eigen::Index;
using Eigen::VectorXd;

/// Outer-loop parameters. delta0 == 0 resolves to 0.1*sqrt(dim) and
/// max_cg == 0 to 2*dim at the first call, so one config works across
/// problem sizes.
struct TrustRegionConfig {
  double delta0 = 0.0;      // initial radius; 0 -> 0.1*sqrt(dim)
  double delta_max = 1e3;   // radius cap
  double eta = 0.05;        // step acceptance threshold, in [0, 1/4)
  double shrink = 0.25;     // radius factor on poor agreement, in (0,1)
  double grow = 2.0;        // radius factor on strong agreement, > 1
  double grad_tol = 1e-9;   // stationarity tolerance
  int max_outer = 200;      // outer iteration cap
  double cg_force_c = 0.5;  // forcing-sequence constant for the inner solve
  int max_cg = 0;           // inner iteration cap; 0 -> 2*dim
};

enum class CgExit { small_residual, negative_curvature, boundary_hit, zero_gradient };

struct CgTrace {
  int iterations = 0;
  CgExit exit_reason = CgExit::small_residual;
  double step_norm = 0.0;
  bool converged = true;      // false when the iteration cap cut the solve
  double model_value = 0.0;   // g'p + p'Bp/2 at the returned step
};

struct Evaluation {
  double value = 0.0;
  VectorXd grad;
};

using Objective = std::function<Evaluation(const VectorXd&)>;
using HvpOperator = std::function<VectorXd(const VectorXd&)>;
using HvpFactory = std::function<HvpOperator(const VectorXd&)>;

namespace detail {

// Roots of |z + tau*d|^2 = radius^2, returned (negative_root, positive_root).
// The iterate z is interior, so the constant term is negative and the roots
// straddle zero; the stable quadratic form avoids cancellation.
inline std::pair<double, double> boundary_roots(const VectorXd& z,
                                                const VectorXd& d,
                                                double radius) {
  const double a = d.squaredNorm();
  const double b = 2.0 * z.dot(d);
  const double c = z.squaredNorm() - radius * radius;
  if (a <= 0.0) return {0.0, 0.0};
  const double disc = std::sqrt(std::max(b * b - 4.0 * a * c, 0.0));
  const double q = -0.5 * (b + std::copysign(disc, b));
  double r1 = q != 0.0 ? c / q : 0.0;
  double r2 = a != 0.0 ? q / a : 0.0;
  if (r1 > r2) std::swap(r1, r2);
  return {r1, r2};
}

}  // namespace detail

/// Steihaug-Toint conjugate gradient for the trust-region subproblem
///   min_p  g'p + p'Bp/2   subject to  |p| <= radius,
/// with B available only through matrix-vector products. Starts from p = 0
/// and follows plain CG until the residual drops below eps_k, a direction of
/// nonpositive curvature appears, or an iterate crosses the radius; the last
/// two exits return the boundary point along the current direction, choosing
/// tau by model value under negative curvature and the positive root when
/// leaving the region.
inline std::pair<VectorXd, CgTrace> steihaug_cg(const VectorXd& grad,
                                                const HvpOperator& hvp,
                                                double radius, double eps_k,
                                                int max_cg) {
  if (radius <= 0.0) throw std::invalid_argument("steihaug_cg: radius <= 0");
  if (eps_k < 0.0) throw std::invalid_argument("steihaug_cg: eps_k < 0");

  const Index dim = grad.size();
  VectorXd z = VectorXd::Zero(dim);
  CgTrace trace;

  const double grad_norm = grad.norm();
  if (grad_norm < eps_k || grad_norm == 0.0) {
    trace.exit_reason = CgExit::zero_gradient;
    return {z, trace};
  }

  VectorXd r = grad;
  VectorXd d = -grad;
  double rr = r.squaredNorm();
  double model = 0.0;  // model value at z, relative to f_k

  for (int j = 0; j < max_cg; ++j) {
    const VectorXd bd = hvp(d);
    const double dbd = d.dot(bd);
    const double rd = r.dot(d);

    if (dbd <= 0.0) {
      const auto [tau_lo, tau_hi] = detail::boundary_roots(z, d, radius);
      const double m_lo = model + tau_lo * rd + 0.5 * tau_lo * tau_lo * dbd;
      const double m_hi = model + tau_hi * rd + 0.5 * tau_hi * tau_hi * dbd;
      const double tau = m_lo < m_hi ? tau_lo : tau_hi;
      z += tau * d;
      trace.iterations = j;
      trace.exit_reason = CgExit::negative_curvature;
      trace.step_norm = z.norm();
      trace.model_value = std::min(m_lo, m_hi);
      return {z, trace};
    }

    const double alpha = rr / dbd;
    const VectorXd z_next = z + alpha * d;
    if (z_next.norm() >= radius) {
      const double tau = detail::boundary_roots(z, d, radius).second;
      z += tau * d;
      trace.iterations = j;
      trace.exit_reason = CgExit::boundary_hit;
      trace.step_norm = z.norm();
      trace.model_value = model + tau * rd + 0.5 * tau * tau * dbd;
      return {z, trace};
    }

    model += alpha * rd + 0.5 * alpha * alpha * dbd;
    z = z_next;
    r += alpha * bd;
    const double rr_next = r.squaredNorm();
    trace.iterations = j + 1;
    if (std::sqrt(rr_next) < eps_k) {
      trace.exit_reason = CgExit::small_residual;
      trace.step_norm = z.norm();
      trace.model_value = model;
      return {z, trace};
    }
    const double beta = rr_next / rr;
    rr = rr_next;
    d = -r + beta * d;
  }

  trace.exit_reason = CgExit::small_residual;
  trace.converged = false;
  trace.step_norm = z.norm();
  trace.model_value = model;
  return {z, trace};
}

enum class MinimizeStatus {
  gradient_tolerance,
  iteration_limit,
  radius_underflow,
  stalled
};

struct OuterRecord {
  int iteration = 0;
  double value = 0.0;
  double grad_norm = 0.0;
  double radius = 0.0;
  double rho = 0.0;
  bool accepted = false;
  CgExit cg_exit = CgExit::small_residual;
  int cg_iterations = 0;
  double step_norm = 0.0;
};

struct MinimizeResult {
  VectorXd x;
  double value = 0.0;
  double grad_norm = 0.0;
  MinimizeStatus status = MinimizeStatus::iteration_limit;
  std::vector<OuterRecord> history;
};

/// Standard trust-region loop around the Steihaug inner solver. The inner
/// tolerance follows the forcing sequence eps_k = min(c, sqrt(|g|)) * |g|.
/// Steps are accepted when the actual-over-predicted reduction exceeds eta;
/// the radius shrinks below ratio 1/4 and grows (up to delta_max) above 3/4
/// when the step pressed against the boundary. A non-finite trial value
/// rejects the step and shrinks the radius. Returns the best-seen iterate.
inline MinimizeResult trust_region_minimize(const Objective& objective,
                                            const HvpFactory& make_hvp,
                                            VectorXd x0,
                                            TrustRegionConfig cfg) {
  const Index dim = x0.size();
  if (cfg.delta0 == 0.0) cfg.delta0 = 0.1 * std::sqrt(static_cast<double>(dim));
  if (cfg.max_cg == 0) cfg.max_cg = static_cast<int>(2 * dim);
  if (!(cfg.delta0 > 0.0) || cfg.delta0 > cfg.delta_max) {
    throw std::invalid_argument("trust_region_minimize: need 0 < delta0 <= delta_max");
  }
  if (!(cfg.eta >= 0.0 && cfg.eta < 0.25)) {
    throw std::invalid_argument("trust_region_minimize: need 0 <= eta < 1/4");
  }
  if (!(cfg.shrink > 0.0 && cfg.shrink < 1.0 && cfg.grow > 1.0)) {
    throw std::invalid_argument("trust_region_minimize: need 0 < shrink < 1 < grow");
  }

  Evaluation current = objective(x0);
  if (!std::isfinite(current.value) || !current.grad.allFinite()) {
    throw std::invalid_argument("trust_region_minimize: objective not finite at x0");
  }

  MinimizeResult result;
  result.x = x0;
  result.value = current.value;
  result.grad_norm = current.grad.norm();
  result.status = MinimizeStatus::iteration_limit;

  VectorXd x = std::move(x0);
  double radius = cfg.delta0;

  for (int iter = 0; iter < cfg.max_outer; ++iter) {
    const double grad_norm = current.grad.norm();
    if (grad_norm <= cfg.grad_tol) {
      result.status = MinimizeStatus::gradient_tolerance;
      break;
    }

    const double eps_k =
        std::min(cfg.cg_force_c, std::sqrt(grad_norm)) * grad_norm;
    const HvpOperator hvp = make_hvp(x);
    auto [step, trace] = steihaug_cg(current.grad, hvp, radius, eps_k, cfg.max_cg);

    OuterRecord rec;
    rec.iteration = iter;
    rec.value = current.value;
    rec.grad_norm = grad_norm;
    rec.radius = radius;
    rec.cg_exit = trace.exit_reason;
    rec.cg_iterations = trace.iterations;
    rec.step_norm = trace.step_norm;

    const double predicted = -trace.model_value;
    if (trace.exit_reason == CgExit::zero_gradient || predicted <= 0.0) {
      // No usable model decrease (possible only with a degenerate Hvp);
      // shrink and retry rather than loop on the same step.
      radius *= cfg.shrink;
      rec.rho = 0.0;
      result.history.push_back(rec);
      if (radius < 1e-16) {
        result.status = MinimizeStatus::radius_underflow;
        break;
      }
      continue;
    }

    const VectorXd trial = x + step;
    const Evaluation trial_eval = objective(trial);
    const bool finite =
        std::isfinite(trial_eval.value) && trial_eval.grad.allFinite();
    const double rho =
        finite ? (current.value - trial_eval.value) / predicted
               : -std::numeric_limits<double>::infinity();
    rec.rho = rho;

    if (finite && trial_eval.value < result.value) {
      result.x = trial;
      result.value = trial_eval.value;
      result.grad_norm = trial_eval.grad.norm();
    }

    if (rho > cfg.eta) {
      x = trial;
      current = trial_eval;
      rec.accepted = true;
    }

    if (rho < 0.25) {
      radius *= cfg.shrink;
    } else if (rho > 0.75 && trace.step_norm >= (1.0 - 1e-10) * radius) {
      radius = std::min(cfg.grow * radius, cfg.delta_max);
    }

    result.history.push_back(rec);
    if (radius < 1e-16) {
      result.status = MinimizeStatus::radius_underflow;
      break;
    }
  }

  if (current.value < result.value) {
    result.x = x;
    result.value = current.value;
    result.grad_norm = current.grad.norm();
  }
  return result;
}

}  // namespace trstmi
