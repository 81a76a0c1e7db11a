#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "themis/adapters.hpp"
#include "themis/error.hpp"
#include "themis/similarity.hpp"

using namespace themis;

namespace {

sim::SimilarityMatrix wasm_of(std::mt19937_64& rng, std::size_t m, std::size_t d) {
  // A few clusters so the leading spectrum has clear gaps.
  std::normal_distribution<float> normal(0.0f, 1.0f);
  std::vector<float> centers(4 * d);
  for (auto& v : centers) v = normal(rng);
  std::vector<float> z(m * d);
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t c = i % 4;
    for (std::size_t j = 0; j < d; ++j) z[i * d + j] = centers[c * d + j] + 0.4f * normal(rng);
  }
  return sim::build_wasm(z, d);
}

double orthogonality_error(const Eigen::MatrixXd& q) {
  const auto n = q.cols();
  return (q.transpose() * q - Eigen::MatrixXd::Identity(n, n)).norm();
}

}  // namespace

TEST_SUITE("eigensolver") {
  TEST_CASE("dense backend is reported") {
    const auto b = adapt::dense_backend();
    CHECK((b == "eigen" || b == "eigen+lapack-dstemr"));
  }

  TEST_CASE("full decomposition reconstructs the matrix") {
    std::mt19937_64 rng(1);
    for (std::size_t m : {2u, 3u, 17u, 128u, 512u}) {
      const auto s = wasm_of(rng, m, 32);
      const auto eig = adapt::decompose_full(s);
      REQUIRE(eig.values.size() == static_cast<Eigen::Index>(m));
      CHECK(adapt::reconstruction_error(s, eig) <= 1e-8);
      CHECK(orthogonality_error(eig.vectors) <= 1e-8);
      for (Eigen::Index i = 1; i < eig.values.size(); ++i) CHECK(eig.values[i - 1] <= eig.values[i]);
    }
  }

  TEST_CASE("dense solve agrees with the Jacobi oracle") {
    std::mt19937_64 rng(2);
    const std::size_t m = 40;
    const auto s = oracle::random_similarity(rng, m);
    std::vector<double> values, vectors;
    oracle::jacobi_eigen({s.entries().begin(), s.entries().end()}, m, values, vectors);
    const auto eig = adapt::decompose_full(s);
    for (std::size_t i = 0; i < m; ++i) CHECK(eig.values[static_cast<Eigen::Index>(i)] == doctest::Approx(values[i]).epsilon(1e-10));
  }

  TEST_CASE("largest pairs match the full spectrum") {
    std::mt19937_64 rng(3);
    const auto s = wasm_of(rng, 200, 16);
    const auto full = adapt::decompose_full(s);
    const auto top = adapt::decompose_largest(s, 6);
    REQUIRE(top.values.size() == 6);
    REQUIRE(top.vectors.cols() == 6);
    for (Eigen::Index i = 0; i < 6; ++i) {
      CHECK(top.values[i] == doctest::Approx(full.values[194 + i]).epsilon(1e-12));
      // Same direction up to sign.
      CHECK(std::abs(top.vectors.col(i).dot(full.vectors.col(194 + i))) == doctest::Approx(1.0).epsilon(1e-8));
    }
    CHECK_THROWS_AS(adapt::decompose_largest(s, 0), Error);
    CHECK_THROWS_AS(adapt::decompose_largest(s, 201), Error);
  }

  TEST_CASE("iterative solver matches the dense scores") {
    std::mt19937_64 rng(4);
    for (std::size_t m : {64u, 300u, 512u}) {
      const auto s = wasm_of(rng, m, 24);
      for (std::size_t k : {1u, 2u, 4u}) {
        const adapt::SpectralParams p{k};
        const auto dense = adapt::spectral_residual_score(s, p, adapt::EigenSolver::Full);
        const auto iter = adapt::spectral_residual_score(s, p, adapt::EigenSolver::Iterative);
        REQUIRE(dense.scores.size() == iter.scores.size());
        for (std::size_t t = 0; t < m; ++t) CHECK(std::abs(dense.scores[t] - iter.scores[t]) <= 1e-6);
      }
    }
  }

  TEST_CASE("iterative eigenvalues match the dense ones") {
    std::mt19937_64 rng(5);
    const auto s = wasm_of(rng, 256, 16);
    const auto full = adapt::decompose_full(s);
    const auto top = adapt::decompose_top(s, 3);
    for (Eigen::Index i = 0; i < 3; ++i) CHECK(top.values[i] == doctest::Approx(full.values[253 + i]).epsilon(1e-10));
    CHECK(orthogonality_error(top.vectors) <= 1e-8);
  }
}
