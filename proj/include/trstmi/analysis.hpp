#pragma once

#include <Eigen/Dense>
#include <Eigen/QR>

#include <cmath>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>

#include "trstmi/frame.hpp"

namespace trstmi {

/// Default tolerance for structural certificates (tightness, equal angles,
/// bound equality). Loose enough to absorb solver noise, far below the gaps
/// between distinct angle classes seen in optimized configurations.
inline constexpr double kDefaultCertificateTol = 1e-4;

struct NotTightError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Lower bound sqrt((N-d)/(d(N-1))) on the coherence of N unit vectors in
/// complex d-space; zero when N <= d (an orthonormal set exists).
inline double welch_bound(Index d, Index N) {
  if (N <= d) return 0.0;
  return std::sqrt(static_cast<double>(N - d) /
                   (static_cast<double>(d) * static_cast<double>(N - 1)));
}

/// Maximum number of equiangular lines. Complex is the native field here;
/// the real and quaternionic counts are informational.
inline long gerzon_max_complex(Index d) { return static_cast<long>(d) * d; }
inline long gerzon_max_real(Index d) {
  return static_cast<long>(d) * (d + 1) / 2;
}
inline long gerzon_max_quaternionic(Index d) {
  return 2L * static_cast<long>(d) * d - static_cast<long>(d);
}

struct BoundsReport {
  Index d = 0;
  Index N = 0;
  double welch = 0.0;
  std::optional<double> orthoplex;    // 1/sqrt(d), valid when N > d^2
  std::optional<double> levenshtein;  // valid when N > d^2
  long gerzon_max = 0;                // d^2 (complex)
  double best_applicable = 0.0;       // max of the present lower bounds
};

inline BoundsReport bounds_report(Index d, Index N) {
  if (d < 1 || N < d) {
    throw std::invalid_argument("bounds_report: need 1 <= d <= N");
  }
  BoundsReport report;
  report.d = d;
  report.N = N;
  report.welch = welch_bound(d, N);
  report.gerzon_max = gerzon_max_complex(d);
  report.best_applicable = report.welch;
  if (N > d * d) {
    report.orthoplex = 1.0 / std::sqrt(static_cast<double>(d));
    report.levenshtein =
        std::sqrt(static_cast<double>(2 * N - d * (d + 1)) /
                  (static_cast<double>(N - d) * static_cast<double>(d + 1)));
    report.best_applicable = std::max(
        {report.best_applicable, *report.orthoplex, *report.levenshtein});
  }
  return report;
}

/// Tightness check: the frame operator Phi Phi* of a tight frame is
/// (N/d) * Identity. Returns the pass flag and the max-entry deviation.
inline std::pair<bool, double> check_tight(const Frame& frame, double tol) {
  const Index d = frame.dim();
  const Index N = frame.count();
  MatrixXcd op = frame.columns * frame.columns.adjoint();
  const double target = static_cast<double>(N) / static_cast<double>(d);
  for (Index i = 0; i < d; ++i) op(i, i) -= target;
  const double deviation = op.cwiseAbs().maxCoeff();
  return {deviation <= tol, deviation};
}

enum class CertificateKind {
  welch_equality,
  orthoplex_equality,
  levenshtein_equality,
  one_distance,
  tight_frame,
  etf,
  none
};

inline const char* to_string(CertificateKind kind) {
  switch (kind) {
    case CertificateKind::welch_equality: return "welch_equality";
    case CertificateKind::orthoplex_equality: return "orthoplex_equality";
    case CertificateKind::levenshtein_equality: return "levenshtein_equality";
    case CertificateKind::one_distance: return "one_distance";
    case CertificateKind::tight_frame: return "tight_frame";
    case CertificateKind::etf: return "etf";
    case CertificateKind::none: return "none";
  }
  return "none";
}

struct Certificate {
  CertificateKind kind = CertificateKind::none;
  double tolerance = kDefaultCertificateTol;
  std::map<std::string, double> witness;
};

/// One-distance detector: passes when the clustered angle spectrum has a
/// single class. The witness carries the class value and the spread of the
/// raw magnitudes around it.
inline Certificate one_distance_report(const Frame& frame, double tol) {
  Certificate cert;
  cert.tolerance = tol;
  const std::vector<double> mags = offdiagonal_magnitudes(frame);
  const std::vector<double> spectrum = cluster_magnitudes(mags, tol);
  cert.witness["clusters"] = static_cast<double>(spectrum.size());
  if (spectrum.size() == 1) {
    cert.kind = CertificateKind::one_distance;
    cert.witness["angle"] = spectrum[0];
    const auto [lo, hi] = std::minmax_element(mags.begin(), mags.end());
    cert.witness["spread"] = *hi - *lo;
  }
  return cert;
}

/// ETF certificate: single angle class, tight frame, and that angle equal to
/// the Welch bound, all at the given tolerance.
inline Certificate check_etf(const Frame& frame, double tol) {
  Certificate cert;
  cert.tolerance = tol;
  const std::vector<double> spectrum = angle_spectrum(frame, tol);
  const auto [tight, deviation] = check_tight(frame, tol);
  const double welch = welch_bound(frame.dim(), frame.count());
  cert.witness["tight_deviation"] = deviation;
  cert.witness["welch"] = welch;
  if (spectrum.size() == 1) {
    cert.witness["angle"] = spectrum[0];
    cert.witness["welch_gap"] = std::abs(spectrum[0] - welch);
    if (tight && std::abs(spectrum[0] - welch) <= tol) {
      cert.kind = CertificateKind::etf;
    }
  }
  return cert;
}

/// Naimark complement: completes the row-orthonormal matrix sqrt(d/N) * Phi
/// to a unitary and returns the normalized remaining (N-d) x N block. The
/// input must be a tight frame with N > d. Off-diagonal Gram magnitudes get
/// scaled by d/(N-d), so the complement of an ETF is again an ETF.
inline Frame naimark_complement(const Frame& frame, double tol) {
  const Index d = frame.dim();
  const Index N = frame.count();
  if (N <= d) {
    throw NotTightError("naimark_complement: requires N > d");
  }
  const auto [tight, deviation] = check_tight(frame, tol);
  if (!tight) {
    throw NotTightError("naimark_complement: frame operator deviates from (N/d)I by " +
                        std::to_string(deviation));
  }
  const MatrixXcd scaled =
      std::sqrt(static_cast<double>(d) / static_cast<double>(N)) * frame.columns;
  // Columns d..N-1 of Q span the kernel of `scaled`; their adjoint is a
  // row-orthonormal completion.
  Eigen::HouseholderQR<MatrixXcd> qr(scaled.adjoint());
  const MatrixXcd q = qr.householderQ();
  Frame complement;
  complement.columns = q.rightCols(N - d).adjoint();
  return normalize_columns(complement);
}

/// Conjectured optimal coherence 1/sqrt(d+1) for N in [d^2-d+2, d^2]
/// (a maximal equiangular system with up to d-2 vectors removed).
inline std::optional<double> conjecture1_target(Index d, Index N) {
  if (d < 2) return std::nullopt;
  if (N >= d * d - d + 2 && N <= d * d) {
    return 1.0 / std::sqrt(static_cast<double>(d + 1));
  }
  return std::nullopt;
}

inline bool is_prime_power(long n) {
  if (n < 2) return false;
  long p = 0;
  for (long f = 2; f * f <= n; ++f) {
    if (n % f == 0) {
      p = f;
      break;
    }
  }
  if (p == 0) return true;  // n itself is prime
  while (n % p == 0) n /= p;
  return n == 1;
}

/// Optimal coherence 1/sqrt(d) for prime-power d and N in [d^2+1, d^2+d]
/// (a full set of d+1 mutually unbiased bases with up to d-1 vectors
/// removed, optimal by the orthoplex bound).
inline std::optional<double> mub_removal_target(Index d, Index N) {
  if (d < 2 || !is_prime_power(static_cast<long>(d))) return std::nullopt;
  if (N >= d * d + 1 && N <= d * (d + 1)) {
    return 1.0 / std::sqrt(static_cast<double>(d));
  }
  return std::nullopt;
}

/// All certificates that pass for a frame at the given tolerance. Bound
/// equalities compare the achieved coherence against the applicable lower
/// bounds; the Levenshtein entry also reports the structural detector
/// (tight with angle classes {0, mu}) without asserting optimality from it.
inline std::vector<Certificate> certificates(const Frame& frame, double tol) {
  std::vector<Certificate> certs;
  const Index d = frame.dim();
  const Index N = frame.count();
  const double mu = coherence(frame);
  const BoundsReport bounds = bounds_report(d, N);

  const auto [tight, deviation] = check_tight(frame, tol);
  if (tight) {
    Certificate c;
    c.kind = CertificateKind::tight_frame;
    c.tolerance = tol;
    c.witness["deviation"] = deviation;
    certs.push_back(c);
  }

  Certificate etf = check_etf(frame, tol);
  if (etf.kind == CertificateKind::etf) certs.push_back(etf);

  Certificate one_dist = one_distance_report(frame, tol);
  if (one_dist.kind == CertificateKind::one_distance) certs.push_back(one_dist);

  if (N > d && std::abs(mu - bounds.welch) <= tol) {
    Certificate c;
    c.kind = CertificateKind::welch_equality;
    c.tolerance = tol;
    c.witness["coherence"] = mu;
    c.witness["welch"] = bounds.welch;
    certs.push_back(c);
  }
  if (bounds.orthoplex && std::abs(mu - *bounds.orthoplex) <= tol) {
    Certificate c;
    c.kind = CertificateKind::orthoplex_equality;
    c.tolerance = tol;
    c.witness["coherence"] = mu;
    c.witness["orthoplex"] = *bounds.orthoplex;
    // Equality is known to require N <= 2d^2 - 1; surfaced, not asserted.
    c.witness["count_condition"] = (N <= 2 * d * d - 1) ? 1.0 : 0.0;
    certs.push_back(c);
  }
  if (bounds.levenshtein && std::abs(mu - *bounds.levenshtein) <= tol) {
    Certificate c;
    c.kind = CertificateKind::levenshtein_equality;
    c.tolerance = tol;
    c.witness["coherence"] = mu;
    c.witness["levenshtein"] = *bounds.levenshtein;
    const std::vector<double> spectrum = angle_spectrum(frame, tol);
    const bool two_class = spectrum.size() == 2 && spectrum.front() <= tol &&
                           std::abs(spectrum.back() - mu) <= tol;
    c.witness["tight_zero_mu_detector"] = (tight && two_class) ? 1.0 : 0.0;
    certs.push_back(c);
  }
  return certs;
}

}  // namespace trstmi
