#pragma once

// Shared fixtures and oracles for the test suites: closed-form maximal
// equiangular configurations, random unitaries, and a finite-difference
// gradient oracle kept independent of the analytic gradient path.

#include <cmath>
#include <complex>

#include "trstmi/frame.hpp"
#include "trstmi/rng.hpp"
#include "trstmi/smoothing.hpp"
#include "trstmi/solver.hpp"

namespace testsupport {

using namespace trstmi;

/// The d=2, N=4 maximal equiangular system from the regular tetrahedron on
/// the Bloch sphere: (x, y, z) -> (cos(t/2), e^{i phi} sin(t/2)). All six
/// pairwise magnitudes equal 1/sqrt(3).
inline Frame sic_2_4() {
  Frame frame;
  frame.columns.resize(2, 4);
  frame.columns(0, 0) = 1.0;
  frame.columns(1, 0) = 0.0;
  const double c = std::sqrt(1.0 / 3.0);
  const double s = std::sqrt(2.0 / 3.0);
  for (int k = 0; k < 3; ++k) {
    const double phi = 2.0 * 3.14159265358979323846 * k / 3.0;
    frame.columns(0, k + 1) = c;
    frame.columns(1, k + 1) = std::polar(s, phi);
  }
  return frame;
}

/// The d=3, N=9 maximal equiangular system: the shift/phase orbit of the
/// fiducial (0, 1, -1)/sqrt(2). All 36 pairwise magnitudes equal 1/2.
inline Frame sic_3_9() {
  const std::complex<double> fiducial[3] = {0.0, 1.0 / std::sqrt(2.0),
                                            -1.0 / std::sqrt(2.0)};
  const double two_pi_over_3 = 2.0 * 3.14159265358979323846 / 3.0;
  Frame frame;
  frame.columns.resize(3, 9);
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      const int col = 3 * a + b;
      for (int j = 0; j < 3; ++j) {
        const std::complex<double> phase = std::polar(1.0, two_pi_over_3 * b * j);
        frame.columns(j, col) = phase * fiducial[(j - a + 3) % 3];
      }
    }
  }
  return frame;
}

/// Haar-ish random unitary: QR of a complex Gaussian matrix with the phase
/// convention that makes R's diagonal real positive.
inline MatrixXcd random_unitary(Index d, SplitMix64& rng) {
  MatrixXcd g(d, d);
  for (Index j = 0; j < d; ++j) {
    for (Index i = 0; i < d; ++i) g(i, j) = rng.complex_normal();
  }
  Eigen::HouseholderQR<MatrixXcd> qr(g);
  MatrixXcd q = qr.householderQ();
  const MatrixXcd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index j = 0; j < d; ++j) {
    const std::complex<double> diag = r(j, j);
    const double mag = std::abs(diag);
    if (mag > 0) q.col(j) *= diag / mag;
  }
  return q;
}

inline Frame random_test_frame(Index d, Index N, std::uint64_t seed) {
  SplitMix64 rng(seed);
  return random_frame(d, N, rng);
}

/// Central finite differences of the objective value, coordinate by
/// coordinate. The step balances truncation against roundoff including the
/// stiff near-crossover regime of small delta.
inline VectorXd fd_gradient(const VectorXd& point, const SmoothObjective& obj) {
  VectorXd grad(point.size());
  VectorXd p = point;
  for (Index i = 0; i < point.size(); ++i) {
    const double h = 5e-8 * (1.0 + std::abs(point[i]));
    const double saved = p[i];
    p[i] = saved + h;
    const double fp = eval_objective(p, obj).value;
    p[i] = saved - h;
    const double fm = eval_objective(p, obj).value;
    p[i] = saved;
    grad[i] = (fp - fm) / (2.0 * h);
  }
  return grad;
}

/// Componentwise relative error with an absolute floor of 1:
/// max_i |a_i - b_i| / max(1, |a_i|, |b_i|).
inline double componentwise_rel_error(const VectorXd& a, const VectorXd& b) {
  double worst = 0.0;
  for (Index i = 0; i < a.size(); ++i) {
    const double scale = std::max({1.0, std::abs(a[i]), std::abs(b[i])});
    worst = std::max(worst, std::abs(a[i] - b[i]) / scale);
  }
  return worst;
}

}  // namespace testsupport
