#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>

#include "trstmi/frame.hpp"

namespace trstmi {

/// Base step for finite differences of the gradient: eps^(1/3), the standard
/// scaling for a second-order central difference.
inline const double kFdBaseStep =
    std::cbrt(std::numeric_limits<double>::epsilon());

/// Smoothed maximum of the off-diagonal Gram magnitudes of a frame.
///
/// The objective is F(x) = s + delta * log(sum_i exp((x_i - s)/delta)) with
/// s = max_i x_i recomputed at every evaluation, taken over the n = N(N-1)/2
/// upper-triangular pair values x_i. With squared = true (the default and the
/// mode the solver uses), x_i = |<phi_j, phi_k>|^2 of the column-normalized
/// frame, which is smooth even through orthogonal pairs; squared = false uses
/// the plain magnitude and is differentiable only away from |g| = 0.
struct SmoothObjective {
  double delta = 1e-2;
  Index d = 0;
  Index N = 0;
  bool squared = true;

  Index pair_count() const { return N * (N - 1) / 2; }
};

struct ObjectiveEval {
  double value = 0.0;        // F at the point
  double s = 0.0;            // max_i x_i at the point
  VectorXd grad;             // dF/d(raw entries), length 2*d*N
  VectorXd softmax_weights;  // dF/dx_i, nonnegative, sums to 1
};

/// Softmax weights exp((x_j - s)/delta) / sum_i exp((x_i - s)/delta), the
/// partial derivatives of the smoothed maximum with respect to x. The shift
/// by s keeps every exponent nonpositive, so nothing overflows as delta -> 0.
inline VectorXd lse_partials(const VectorXd& x, double delta) {
  if (delta <= 0.0) throw std::invalid_argument("lse_partials: delta <= 0");
  if (x.size() == 0) throw std::invalid_argument("lse_partials: empty input");
  const double s = x.maxCoeff();
  VectorXd w(x.size());
  double z = 0.0;
  for (Index i = 0; i < x.size(); ++i) {
    w[i] = std::exp((x[i] - s) / delta);
    z += w[i];
  }
  w /= z;
  return w;
}

/// F(x) = s + delta * log(sum exp((x_i - s)/delta)); identical to
/// delta * log(sum exp(x_i/delta)) wherever the unshifted form is finite.
inline double smooth_max(const VectorXd& x, double delta) {
  if (delta <= 0.0) throw std::invalid_argument("smooth_max: delta <= 0");
  if (x.size() == 0) throw std::invalid_argument("smooth_max: empty input");
  const double s = x.maxCoeff();
  double z = 0.0;
  for (Index i = 0; i < x.size(); ++i) z += std::exp((x[i] - s) / delta);
  return s + delta * std::log(z);
}

/// Evaluates the smoothed objective and its exact gradient with respect to
/// the raw (pre-normalization) real entries of the frame.
///
/// The chain rule runs through column normalization, the complex inner
/// products, the modulus-square, and the softmax. With u = |g_mk|^2 and
/// phi the normalized columns,
///   d u / d conj(a_m) = (1/alpha_m) * (conj(g_mk) phi_k - u phi_m),
/// so the full complex gradient assembles from two small matrix products:
///   dF/dconj(A) = (Phi * (C .* G) - Phi * diag(t)) * diag(1/alpha)
/// where C carries the pair weights and t the weighted row sums of |G|^2.
/// The real gradient is twice the interleaved (re, im) view of that matrix.
inline ObjectiveEval eval_objective(const VectorXd& point,
                                    const SmoothObjective& obj) {
  const Index d = obj.d;
  const Index N = obj.N;
  if (obj.delta <= 0.0) throw std::invalid_argument("eval_objective: delta <= 0");
  if (N < 2) throw std::invalid_argument("eval_objective: need N >= 2");
  if (point.size() != 2 * d * N) {
    throw DimensionMismatchError("eval_objective: point length mismatch");
  }

  const Eigen::Map<const MatrixXcd> raw(
      reinterpret_cast<const std::complex<double>*>(point.data()), d, N);

  VectorXd alpha(N);
  for (Index j = 0; j < N; ++j) {
    alpha[j] = raw.col(j).norm();
    if (alpha[j] < kZeroColumnTol) throw ZeroColumnError(j);
  }

  MatrixXcd phi(d, N);
  for (Index j = 0; j < N; ++j) phi.col(j) = raw.col(j) / alpha[j];

  const MatrixXcd gram = phi.adjoint() * phi;

  const Index n = obj.pair_count();
  VectorXd x(n);
  {
    Index idx = 0;
    for (Index j = 0; j < N; ++j) {
      for (Index k = j + 1; k < N; ++k) {
        const double u = std::norm(gram(j, k));
        x[idx++] = obj.squared ? u : std::sqrt(u);
      }
    }
  }

  const double s = x.maxCoeff();
  VectorXd w(n);
  double z = 0.0;
  for (Index i = 0; i < n; ++i) {
    w[i] = std::exp((x[i] - s) / obj.delta);
    z += w[i];
  }
  w /= z;
  const double value = s + obj.delta * std::log(z);

  // Pair coefficients w_i * psi'(u_i) where x = psi(u), u = |g|^2:
  // psi'(u) = 1 in squared mode, 1/(2 sqrt(u)) in magnitude mode.
  MatrixXcd coeff_gram = MatrixXcd::Zero(N, N);
  VectorXd t = VectorXd::Zero(N);
  {
    Index idx = 0;
    for (Index j = 0; j < N; ++j) {
      for (Index k = j + 1; k < N; ++k) {
        const double u = std::norm(gram(j, k));
        double c = w[idx++];
        if (!obj.squared) c *= 0.5 / std::max(std::sqrt(u), 1e-150);
        coeff_gram(j, k) = c * gram(j, k);
        coeff_gram(k, j) = c * gram(k, j);
        t[j] += c * u;
        t[k] += c * u;
      }
    }
  }

  MatrixXcd dconj = phi * coeff_gram;
  for (Index m = 0; m < N; ++m) {
    dconj.col(m) -= t[m] * phi.col(m);
    dconj.col(m) /= alpha[m];
  }

  ObjectiveEval eval;
  eval.value = value;
  eval.s = s;
  eval.softmax_weights = std::move(w);
  eval.grad.resize(2 * d * N);
  Eigen::Map<MatrixXcd>(reinterpret_cast<std::complex<double>*>(eval.grad.data()),
                        d, N) = dconj;
  eval.grad *= 2.0;
  return eval;
}

/// Central finite difference of a gradient field along a direction, with the
/// step scaled as h0 * (1 + |point|) / max(|direction|, 1e-300). The callable
/// maps a point to its gradient vector.
template <typename GradFn>
VectorXd fd_hessian_vector_product(GradFn&& grad_fn, const VectorXd& point,
                                   const VectorXd& direction,
                                   double base_step = kFdBaseStep) {
  if (direction.size() != point.size()) {
    throw DimensionMismatchError("fd_hessian_vector_product: length mismatch");
  }
  const double dir_norm = direction.norm();
  if (dir_norm == 0.0) return VectorXd::Zero(point.size());
  const double h =
      base_step * (1.0 + point.norm()) / std::max(dir_norm, 1e-300);
  const VectorXd gp = grad_fn(point + h * direction);
  const VectorXd gm = grad_fn(point - h * direction);
  return (gp - gm) / (2.0 * h);
}

/// Hessian-vector product of the smoothed objective by central differences of
/// the analytic gradient. Propagates ZeroColumnError if a perturbed point
/// crosses the zero-column threshold; callers fall back to a one-sided
/// difference in that case.
inline VectorXd hessian_vector_product(const VectorXd& point,
                                       const VectorXd& direction,
                                       const SmoothObjective& obj,
                                       double base_step = kFdBaseStep) {
  return fd_hessian_vector_product(
      [&obj](const VectorXd& p) { return eval_objective(p, obj).grad; }, point,
      direction, base_step);
}

}  // namespace trstmi
