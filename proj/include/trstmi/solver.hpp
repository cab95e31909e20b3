#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "trstmi/frame.hpp"
#include "trstmi/rng.hpp"
#include "trstmi/smoothing.hpp"
#include "trstmi/trust_region.hpp"

namespace trstmi {

struct SolverConfig {
  Index d = 0;
  Index N = 0;
  std::vector<double> delta_schedule;  // empty -> default_delta_schedule(N, eps_target)
  int restarts = 20;
  std::uint64_t seed = 0;
  TrustRegionConfig tr;
  double eps_target = 1e-7;  // desired max-approximation accuracy
};

struct StageRecord {
  double delta = 0.0;
  double objective = 0.0;
  double coherence = 0.0;
  int outer_iterations = 0;
};

struct RestartRecord {
  int restart_index = 0;
  std::uint64_t seed = 0;
  double coherence = 0.0;
  bool succeeded = false;
  std::string error;
  std::vector<StageRecord> stages;
};

struct SolveResult {
  Frame best_frame;
  double best_coherence = 0.0;
  int best_restart = -1;
  std::vector<RestartRecord> per_restart;
  SolverConfig config;
  double wall_time_seconds = 0.0;
};

struct SolveError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Geometric smoothing schedule: delta_1 = 1e-1 stepping down a decade per
/// stage, ending exactly at eps_target / (2 log N) -- the level at which the
/// smoothed maximum tracks the true maximum to within eps_target. At least
/// two stages are always produced.
inline std::vector<double> default_delta_schedule(Index N, double eps_target) {
  if (N < 2) throw std::invalid_argument("default_delta_schedule: need N >= 2");
  if (eps_target <= 0.0) {
    throw std::invalid_argument("default_delta_schedule: eps_target <= 0");
  }
  const double terminal = eps_target / (2.0 * std::log(static_cast<double>(N)));
  std::vector<double> schedule;
  if (terminal >= 1e-1) {
    // Degenerate request (huge eps_target); keep the contract of a strictly
    // decreasing schedule with at least two stages.
    schedule = {10.0 * terminal, terminal};
    return schedule;
  }
  for (double delta = 1e-1; delta > terminal * (1.0 + 1e-12); delta /= 10.0) {
    schedule.push_back(delta);
  }
  schedule.push_back(terminal);
  return schedule;
}

/// Frame with i.i.d. standard complex Gaussian columns, normalized. Columns
/// are drawn column-by-column, entry-by-entry (re then im), so the result is
/// a pure function of the generator state.
inline Frame random_frame(Index d, Index N, SplitMix64& rng) {
  if (d < 1 || N < 1) throw std::invalid_argument("random_frame: need d, N >= 1");
  Frame frame;
  frame.columns.resize(d, N);
  for (Index j = 0; j < N; ++j) {
    do {
      for (Index i = 0; i < d; ++i) frame.columns(i, j) = rng.complex_normal();
    } while (frame.columns.col(j).norm() < kZeroColumnTol);
    frame.columns.col(j) /= frame.columns.col(j).norm();
  }
  return frame;
}

namespace detail {

// Wraps the smoothed objective for the generic minimizer. A zero column at a
// trial point surfaces as +inf so the outer loop rejects and shrinks.
inline Objective make_objective(const SmoothObjective& obj) {
  return [obj](const VectorXd& p) -> Evaluation {
    try {
      ObjectiveEval e = eval_objective(p, obj);
      return {e.value, std::move(e.grad)};
    } catch (const ZeroColumnError&) {
      return {std::numeric_limits<double>::infinity(),
              VectorXd::Zero(p.size())};
    }
  };
}

// Central-difference Hessian operator with a one-sided fallback when a
// perturbation crosses the zero-column threshold.
inline HvpFactory make_hvp_factory(const SmoothObjective& obj) {
  return [obj](const VectorXd& x) -> HvpOperator {
    return [obj, x](const VectorXd& dir) -> VectorXd {
      try {
        return hessian_vector_product(x, dir, obj);
      } catch (const ZeroColumnError&) {
      }
      const double dir_norm = dir.norm();
      if (dir_norm == 0.0) return VectorXd::Zero(x.size());
      const double h =
          kFdBaseStep * (1.0 + x.norm()) / std::max(dir_norm, 1e-300);
      const VectorXd g0 = eval_objective(x, obj).grad;
      try {
        return (eval_objective(x + h * dir, obj).grad - g0) / h;
      } catch (const ZeroColumnError&) {
        return (g0 - eval_objective(x - h * dir, obj).grad) / h;
      }
    };
  };
}

inline void rescue_zero_columns(VectorXd& param, Index d, Index N,
                                SplitMix64* rng) {
  Eigen::Map<MatrixXcd> mat(
      reinterpret_cast<std::complex<double>*>(param.data()), d, N);
  for (Index j = 0; j < N; ++j) {
    if (mat.col(j).norm() >= kZeroColumnTol) continue;
    bool rescued = false;
    for (int attempt = 0; rng != nullptr && attempt < 3; ++attempt) {
      for (Index i = 0; i < d; ++i) mat(i, j) = rng->complex_normal();
      if (mat.col(j).norm() >= kZeroColumnTol) {
        mat.col(j) /= mat.col(j).norm();
        rescued = true;
        break;
      }
    }
    if (!rescued) throw ZeroColumnError(j);
  }
}

}  // namespace detail

/// Minimizes the smoothed maximum over the schedule of decreasing delta,
/// warm-starting each stage from the previous stage's raw parameter vector.
/// A column that collapses between stages is redrawn from rescue_rng (three
/// attempts) before giving up.
inline std::pair<Frame, std::vector<StageRecord>> anneal(
    const Frame& start, const SolverConfig& cfg,
    SplitMix64* rescue_rng = nullptr) {
  if (start.dim() != cfg.d || start.count() != cfg.N) {
    throw DimensionMismatchError("anneal: start frame does not match config");
  }
  std::vector<double> schedule = cfg.delta_schedule;
  if (schedule.empty()) schedule = default_delta_schedule(cfg.N, cfg.eps_target);
  for (std::size_t k = 0; k + 1 < schedule.size(); ++k) {
    if (!(schedule[k] > schedule[k + 1]) || schedule[k + 1] <= 0.0) {
      throw std::invalid_argument("anneal: schedule must be strictly decreasing and positive");
    }
  }

  VectorXd param = pack_frame(start);
  std::vector<StageRecord> stages;
  stages.reserve(schedule.size());

  for (std::size_t k = 0; k < schedule.size(); ++k) {
    detail::rescue_zero_columns(param, cfg.d, cfg.N, rescue_rng);

    SmoothObjective obj{schedule[k], cfg.d, cfg.N, true};
    TrustRegionConfig tr = cfg.tr;
    tr.max_outer = cfg.tr.max_outer + 50 * static_cast<int>(k);

    MinimizeResult res = trust_region_minimize(
        detail::make_objective(obj), detail::make_hvp_factory(obj),
        std::move(param), tr);
    param = std::move(res.x);

    StageRecord rec;
    rec.delta = schedule[k];
    rec.objective = res.value;
    rec.coherence = coherence(normalize_columns(unpack_frame(param, cfg.d, cfg.N)));
    rec.outer_iterations = static_cast<int>(res.history.size());
    stages.push_back(rec);
  }

  Frame final_frame = normalize_columns(unpack_frame(param, cfg.d, cfg.N));
  return {std::move(final_frame), std::move(stages)};
}

/// Multistart driver: restarts independent seeded anneals (child seed i is
/// mix_seed(cfg.seed, i)) and keeps the lowest final coherence, breaking ties
/// by restart index. Restarts may run on a worker pool; results are
/// aggregated by index, so the outcome does not depend on thread count.
inline SolveResult solve(const SolverConfig& cfg, int threads = 1) {
  if (cfg.d < 1 || cfg.N < 1) throw std::invalid_argument("solve: need d, N >= 1");
  if (cfg.restarts < 1) throw std::invalid_argument("solve: need restarts >= 1");

  const auto t0 = std::chrono::steady_clock::now();

  SolveResult result;
  result.config = cfg;
  result.per_restart.resize(cfg.restarts);
  std::vector<Frame> frames(cfg.restarts);

  auto run_restart = [&](int i) {
    RestartRecord& rec = result.per_restart[i];
    rec.restart_index = i;
    rec.seed = mix_seed(cfg.seed, static_cast<std::uint64_t>(i));
    try {
      SplitMix64 rng(rec.seed);
      Frame start = random_frame(cfg.d, cfg.N, rng);
      auto [frame, stages] = anneal(start, cfg, &rng);
      rec.coherence = coherence(frame);
      rec.stages = std::move(stages);
      rec.succeeded = true;
      frames[i] = std::move(frame);
    } catch (const std::exception& e) {
      rec.succeeded = false;
      rec.error = e.what();
    }
  };

  const int workers = std::max(1, std::min(threads, cfg.restarts));
  if (workers == 1) {
    for (int i = 0; i < cfg.restarts; ++i) run_restart(i);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (int i = next.fetch_add(1); i < cfg.restarts; i = next.fetch_add(1)) {
          run_restart(i);
        }
      });
    }
    for (std::thread& t : pool) t.join();
  }

  for (int i = 0; i < cfg.restarts; ++i) {
    const RestartRecord& rec = result.per_restart[i];
    if (!rec.succeeded) continue;
    if (result.best_restart < 0 || rec.coherence < result.best_coherence) {
      result.best_restart = i;
      result.best_coherence = rec.coherence;
    }
  }
  if (result.best_restart < 0) {
    throw SolveError("solve: all restarts failed");
  }
  result.best_frame = std::move(frames[result.best_restart]);

  result.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return result;
}

}  // namespace trstmi
