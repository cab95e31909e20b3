#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "trstmi/analysis.hpp"
#include "trstmi/baseline.hpp"
#include "trstmi/frame.hpp"
#include "trstmi/rng.hpp"

using namespace trstmi;

TEST_CASE("alternating projection recovers an orthonormal basis at N = d") {
  SplitMix64 rng(17);
  const SolveResult result = alternating_projection(3, 3, AltProjConfig{}, rng);
  REQUIRE(result.best_coherence <= 1e-6);
  REQUIRE(is_normalized(result.best_frame, 1e-10));
}

TEST_CASE("alternating projection reaches the (2,4) optimum") {
  const SolveResult result = solve_altproj(2, 4, AltProjConfig{}, 3, 7);
  REQUIRE(result.best_coherence <= 0.5774 + 5e-3);
}

TEST_CASE("baseline output is normalized and respects the Welch bound") {
  for (std::uint64_t seed : {1ull, 2ull}) {
    SplitMix64 rng(seed);
    const SolveResult result =
        alternating_projection(3, 7, AltProjConfig{}, rng);
    REQUIRE(is_normalized(result.best_frame, 1e-10));
    REQUIRE(result.best_coherence >= welch_bound(3, 7) - 1e-9);
    REQUIRE(result.best_coherence ==
            Catch::Approx(coherence(result.best_frame)).margin(1e-12));
  }
}

TEST_CASE("spectral projection is idempotent") {
  SplitMix64 rng(5);
  const Frame f = random_frame(3, 8, rng);
  const MatrixXcd gram = gram_matrix(f);
  const MatrixXcd once = detail::spectral_projection(gram, 3);
  const MatrixXcd twice = detail::spectral_projection(once, 3);
  REQUIRE((twice - once).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("factoring a projected Gram reproduces it") {
  SplitMix64 rng(6);
  const Frame f = random_frame(2, 5, rng);
  const MatrixXcd projected = detail::spectral_projection(gram_matrix(f), 2);
  const Frame factored = detail::factor_gram(projected, 2);
  REQUIRE(factored.dim() == 2);
  REQUIRE(factored.count() == 5);
  // The factored, renormalized frame must carry the same normalized Gram.
  for (Index j = 0; j < 5; ++j) {
    for (Index k = j + 1; k < 5; ++k) {
      const double denom =
          std::sqrt(projected(j, j).real() * projected(k, k).real());
      const double expected = std::abs(projected(j, k)) / denom;
      const double actual =
          std::abs(factored.columns.col(j).dot(factored.columns.col(k)));
      REQUIRE(actual == Catch::Approx(expected).margin(1e-10));
    }
  }
}

TEST_CASE("baseline is deterministic given the seed") {
  const SolveResult a = solve_altproj(3, 9, AltProjConfig{}, 2, 42);
  const SolveResult b = solve_altproj(3, 9, AltProjConfig{}, 2, 42);
  REQUIRE(a.best_coherence == b.best_coherence);
  REQUIRE(a.best_frame.columns == b.best_frame.columns);
}

TEST_CASE("baseline config validation") {
  SplitMix64 rng(1);
  AltProjConfig bad;
  bad.max_iters = 0;
  REQUIRE_THROWS_AS(alternating_projection(2, 4, bad, rng),
                    std::invalid_argument);
  AltProjConfig high;
  high.mu_target = 1.5;
  REQUIRE_THROWS_AS(alternating_projection(2, 4, high, rng),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(alternating_projection(4, 3, AltProjConfig{}, rng),
                    std::invalid_argument);
}
