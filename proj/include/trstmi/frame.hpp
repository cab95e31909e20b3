#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace trstmi {

using Eigen::Index;
using Eigen::MatrixXcd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

/// Norm below which a column counts as zero.
inline constexpr double kZeroColumnTol = 1e-12;

/// Default tolerance for merging nearby Gram magnitudes into one angle class.
inline constexpr double kDefaultClusterTol = 1e-4;

struct ZeroColumnError : std::runtime_error {
  explicit ZeroColumnError(Index column_index)
      : std::runtime_error("column " + std::to_string(column_index) +
                           " has near-zero norm"),
        column(column_index) {}
  Index column;
};

struct DimensionMismatchError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// A configuration of N vectors in complex d-space, stored column-wise.
/// Columns are kept as std::complex<double>, which is layout-compatible with
/// interleaved (re, im) doubles; pack_frame/unpack_frame expose that flat
/// real view of length 2*d*N for the optimizer.
struct Frame {
  MatrixXcd columns;  // d x N

  Frame() = default;
  explicit Frame(MatrixXcd cols) : columns(std::move(cols)) {}

  Index dim() const { return columns.rows(); }
  Index count() const { return columns.cols(); }
};

inline bool is_normalized(const Frame& frame, double tol = kZeroColumnTol) {
  for (Index j = 0; j < frame.count(); ++j) {
    if (std::abs(frame.columns.col(j).norm() - 1.0) > tol) return false;
  }
  return true;
}

/// Divides every column by its Euclidean norm. A column with norm below
/// kZeroColumnTol raises ZeroColumnError naming the first offender.
inline Frame normalize_columns(const Frame& frame) {
  Frame out;
  out.columns.resize(frame.dim(), frame.count());
  for (Index j = 0; j < frame.count(); ++j) {
    const double norm = frame.columns.col(j).norm();
    if (norm < kZeroColumnTol) throw ZeroColumnError(j);
    out.columns.col(j) = frame.columns.col(j) / norm;
  }
  return out;
}

/// N x N Gram matrix of the columns, G(j,k) = <phi_j, phi_k> with the inner
/// product conjugate-linear in the first argument.
inline MatrixXcd gram_matrix(const Frame& frame) {
  return frame.columns.adjoint() * frame.columns;
}

/// Off-diagonal magnitudes enumerated in row-major upper-triangular order
/// (j outer, k inner, j < k). The enumeration order is part of the contract:
/// it fixes the index mapping for the smoothed objective.
inline std::vector<double> offdiagonal_magnitudes(const Frame& frame) {
  const MatrixXcd gram = gram_matrix(frame);
  const Index n = frame.count();
  std::vector<double> mags;
  mags.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
  for (Index j = 0; j < n; ++j) {
    for (Index k = j + 1; k < n; ++k) {
      mags.push_back(std::abs(gram(j, k)));
    }
  }
  return mags;
}

/// Single-linkage clustering of sorted magnitudes: a new cluster starts when
/// the gap to the previous value exceeds cluster_tol. Each cluster is
/// reported by its mean.
inline std::vector<double> cluster_magnitudes(std::vector<double> mags,
                                              double cluster_tol) {
  if (cluster_tol <= 0.0) {
    throw std::invalid_argument("cluster_tol must be positive");
  }
  std::sort(mags.begin(), mags.end());
  std::vector<double> clusters;
  double sum = 0.0;
  Index count = 0;
  double last = 0.0;
  for (const double v : mags) {
    if (count > 0 && v - last > cluster_tol) {
      clusters.push_back(sum / static_cast<double>(count));
      sum = 0.0;
      count = 0;
    }
    sum += v;
    last = v;
    ++count;
  }
  if (count > 0) clusters.push_back(sum / static_cast<double>(count));
  return clusters;
}

struct GramSummary {
  std::vector<double> offdiag_mags;    // |<phi_j, phi_k>| for j < k, row-major
  double coherence = 0.0;              // max of offdiag_mags (0 when N < 2)
  std::vector<double> angle_spectrum;  // clustered distinct magnitudes
};

inline GramSummary gram_summary(const Frame& frame,
                                double cluster_tol = kDefaultClusterTol) {
  GramSummary summary;
  summary.offdiag_mags = offdiagonal_magnitudes(frame);
  summary.coherence = 0.0;
  for (const double m : summary.offdiag_mags) {
    if (m > summary.coherence) summary.coherence = m;
  }
  summary.angle_spectrum = cluster_magnitudes(summary.offdiag_mags, cluster_tol);
  return summary;
}

inline double coherence(const Frame& frame) {
  const std::vector<double> mags = offdiagonal_magnitudes(frame);
  double mu = 0.0;
  for (const double m : mags) {
    if (m > mu) mu = m;
  }
  return mu;
}

inline std::vector<double> angle_spectrum(const Frame& frame,
                                          double cluster_tol) {
  return cluster_magnitudes(offdiagonal_magnitudes(frame), cluster_tol);
}

/// Distance between the lines spanned by two unit vectors:
/// sqrt(1 - |<x,y>|^2), clamped against negative rounding under the radical.
inline double chordal_distance(const VectorXcd& x, const VectorXcd& y) {
  if (x.size() != y.size()) {
    throw DimensionMismatchError("chordal_distance: dimension mismatch (" +
                                 std::to_string(x.size()) + " vs " +
                                 std::to_string(y.size()) + ")");
  }
  const double overlap = std::norm(x.dot(y));
  const double under = std::clamp(1.0 - overlap, 0.0, 1.0);
  return std::sqrt(under);
}

/// Flat real view of a frame: column-major, each entry contributing
/// (re, im) in order, total length 2*d*N.
inline VectorXd pack_frame(const Frame& frame) {
  const Index d = frame.dim();
  const Index n = frame.count();
  VectorXd packed(2 * d * n);
  Eigen::Map<MatrixXcd>(reinterpret_cast<std::complex<double>*>(packed.data()),
                        d, n) = frame.columns;
  return packed;
}

inline Frame unpack_frame(const VectorXd& packed, Index d, Index n) {
  if (packed.size() != 2 * d * n) {
    throw DimensionMismatchError("unpack_frame: expected length " +
                                 std::to_string(2 * d * n) + ", got " +
                                 std::to_string(packed.size()));
  }
  Frame frame;
  frame.columns = Eigen::Map<const MatrixXcd>(
      reinterpret_cast<const std::complex<double>*>(packed.data()), d, n);
  return frame;
}

}  // namespace trstmi
