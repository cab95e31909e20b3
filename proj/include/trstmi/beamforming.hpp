#pragma once

#include <Eigen/Dense>

#include <atomic>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <thread>
#include <vector>

#include "trstmi/frame.hpp"
#include "trstmi/rng.hpp"

namespace trstmi {

struct ZeroChannelError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// MISO link: d transmit antennas, complex Gaussian channel, noise variance
/// sigma, mean symbol energy E_s.
struct ChannelModel {
  Index d = 1;
  double noise_var = 1.0;
  double symbol_energy = 1.0;
};

/// Codeword selection: the (0-based) smallest index maximizing |<phi_i, h>|^2,
/// equivalently minimizing the chordal distance between the lines of phi_i
/// and h.
inline std::size_t quantize(const Frame& codebook, const VectorXcd& h) {
  if (h.size() != codebook.dim()) {
    throw DimensionMismatchError("quantize: channel dimension mismatch");
  }
  if (h.norm() < kZeroColumnTol) {
    throw ZeroChannelError("quantize: channel vector is zero");
  }
  std::size_t best_index = 0;
  double best = -1.0;
  for (Index i = 0; i < codebook.count(); ++i) {
    const double overlap = std::norm(codebook.columns.col(i).dot(h));
    if (overlap > best) {
      best = overlap;
      best_index = static_cast<std::size_t>(i);
    }
  }
  return best_index;
}

/// Received SNR gamma = |<beam, h>|^2 * E_s / sigma.
inline double snr(const VectorXcd& beam, const VectorXcd& h,
                  const ChannelModel& model) {
  if (beam.size() != h.size()) {
    throw DimensionMismatchError("snr: dimension mismatch");
  }
  return std::norm(beam.dot(h)) * model.symbol_energy / model.noise_var;
}

struct DistortionEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  std::uint64_t samples = 0;
};

namespace detail {

// Samples are organized in fixed blocks of 4096, block b seeded with
// mix_seed(seed, b). Workers may split the blocks any way; the merged
// moments, accumulated in block order, are a pure function of (seed, count).
inline constexpr std::uint64_t kDistortionBlock = 4096;

struct BlockMoments {
  double sum = 0.0;
  double sum_sq = 0.0;
};

inline BlockMoments distortion_block(const Frame& codebook, std::uint64_t seed,
                                     std::uint64_t block_index,
                                     std::uint64_t count) {
  const Index d = codebook.dim();
  SplitMix64 rng(mix_seed(seed, block_index));
  VectorXcd h(d);
  BlockMoments m;
  for (std::uint64_t s = 0; s < count; ++s) {
    double norm_sq = 0.0;
    do {
      for (Index i = 0; i < d; ++i) h[i] = rng.complex_normal();
      norm_sq = h.squaredNorm();
    } while (norm_sq < kZeroColumnTol * kZeroColumnTol);
    double best = 0.0;
    for (Index i = 0; i < codebook.count(); ++i) {
      const double overlap = std::norm(codebook.columns.col(i).dot(h));
      if (overlap > best) best = overlap;
    }
    const double dsq = std::max(0.0, 1.0 - best / norm_sq);
    m.sum += dsq;
    m.sum_sq += dsq * dsq;
  }
  return m;
}

}  // namespace detail

/// Monte-Carlo estimate of the quantization distortion E[d_c^2(h, Q(h))]
/// over i.i.d. complex Gaussian channels. Deterministic given the seed and
/// independent of the worker count.
inline DistortionEstimate distortion_mc(const Frame& codebook,
                                        std::uint64_t samples,
                                        std::uint64_t seed, int threads = 1) {
  if (samples < 1) throw std::invalid_argument("distortion_mc: samples >= 1");
  if (codebook.count() < 1) {
    throw std::invalid_argument("distortion_mc: empty codebook");
  }

  const std::uint64_t blocks =
      (samples + detail::kDistortionBlock - 1) / detail::kDistortionBlock;
  std::vector<detail::BlockMoments> moments(blocks);

  auto run_block = [&](std::uint64_t b) {
    const std::uint64_t start = b * detail::kDistortionBlock;
    const std::uint64_t count =
        std::min(detail::kDistortionBlock, samples - start);
    moments[b] = detail::distortion_block(codebook, seed, b, count);
  };

  const int workers = static_cast<int>(
      std::min<std::uint64_t>(std::max(threads, 1), blocks));
  if (workers <= 1) {
    for (std::uint64_t b = 0; b < blocks; ++b) run_block(b);
  } else {
    std::atomic<std::uint64_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::uint64_t b = next.fetch_add(1); b < blocks;
             b = next.fetch_add(1)) {
          run_block(b);
        }
      });
    }
    for (std::thread& t : pool) t.join();
  }

  double sum = 0.0;
  double sum_sq = 0.0;
  for (const auto& m : moments) {
    sum += m.sum;
    sum_sq += m.sum_sq;
  }

  DistortionEstimate est;
  est.samples = samples;
  const double n = static_cast<double>(samples);
  est.estimate = sum / n;
  if (samples > 1) {
    const double var =
        std::max(0.0, (sum_sq - n * est.estimate * est.estimate) / (n - 1.0));
    est.std_error = std::sqrt(var / n);
  }
  return est;
}

}  // namespace trstmi
