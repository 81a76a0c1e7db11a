#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "themis/error.hpp"
#include "themis/thresholding.hpp"

using namespace themis;

namespace {

std::vector<double> gpd_sample(std::uint64_t seed, std::size_t n, double gamma, double sigma) {
  std::mt19937_64 rng(seed);
  std::vector<double> out(n);
  for (auto& y : out) {
    do y = oracle::gpd_draw(rng, gamma, sigma);
    while (!(y > 0.0));
  }
  return out;
}

}  // namespace

TEST_SUITE("thresholding") {
  TEST_CASE("empirical quantile interpolates order statistics") {
    const std::vector<double> v{4, 1, 3, 2, 5};
    CHECK(thresh::empirical_quantile(v, 0.0) == 1.0);
    CHECK(thresh::empirical_quantile(v, 1.0) == 5.0);
    CHECK(thresh::empirical_quantile(v, 0.5) == 3.0);
    CHECK(thresh::empirical_quantile(v, 0.125) == doctest::Approx(1.5));
    CHECK_THROWS_AS(thresh::empirical_quantile(std::vector<double>{}, 0.5), Error);
    CHECK_THROWS_AS(thresh::empirical_quantile(v, 1.5), Error);
  }

  TEST_CASE("equal peaks give the exponential fit") {
    const std::vector<double> peaks(20, 0.37);
    const auto fit = thresh::fit_gpd(peaks);
    CHECK(fit.exponential);
    CHECK(fit.gamma == 0.0);
    CHECK(fit.sigma == doctest::Approx(0.37).epsilon(1e-12));
  }

  TEST_CASE("fit recovers GPD parameters") {
    const auto fit = thresh::fit_gpd(gpd_sample(11, 10000, 0.2, 1.0));
    CHECK(fit.gamma >= 0.1);
    CHECK(fit.gamma <= 0.3);
    CHECK(fit.sigma >= 0.9);
    CHECK(fit.sigma <= 1.1);
    CHECK(fit.peak_count == 10000);
  }

  TEST_CASE("fit of exponential samples has near-zero shape") {
    const auto fit = thresh::fit_gpd(gpd_sample(12, 10000, 0.0, 1.0));
    CHECK(std::abs(fit.gamma) <= 0.05);
  }

  TEST_CASE("fit of bounded-tail samples finds a negative shape") {
    const auto fit = thresh::fit_gpd(gpd_sample(13, 10000, -0.3, 2.0));
    CHECK(fit.gamma == doctest::Approx(-0.3).epsilon(0.1));
    CHECK(fit.sigma == doctest::Approx(2.0).epsilon(0.1));
  }

  TEST_CASE("chosen fit never loses to the exponential model") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const auto peaks = gpd_sample(seed, 50 + seed * 37, 0.1 * static_cast<double>(seed % 5) - 0.1, 1.0);
      const auto fit = thresh::fit_gpd(peaks);
      CHECK(fit.log_likelihood >= thresh::fit_exponential(peaks).log_likelihood);
      CHECK(fit.sigma > 0.0);
    }
  }

  TEST_CASE("fit errors") {
    CHECK_THROWS_AS(thresh::fit_gpd(std::vector<double>(7, 1.0)), Error);
    try {
      thresh::fit_gpd(std::vector<double>(3, 1.0));
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::TooFewPeaks);
    }
    std::vector<double> bad(10, 1.0);
    bad[4] = 0.0;
    CHECK_THROWS_AS(thresh::fit_gpd(bad), Error);
  }

  TEST_CASE("Grimshaw roots satisfy the profile equation") {
    const auto peaks = gpd_sample(5, 2000, 0.25, 0.5);
    const auto fit = thresh::fit_gpd(peaks);
    REQUIRE_FALSE(fit.exponential);
    CHECK(std::abs(thresh::grimshaw_objective(peaks, fit.gamma / fit.sigma)) < 1e-8);
  }

  TEST_CASE("SPOT quantile closed forms") {
    CHECK(thresh::spot_quantile(0.9, 0.0, 1.0, 1e-3, 10000, 200) ==
          doctest::Approx(0.9 - std::log(0.05)).epsilon(1e-14));
    CHECK(thresh::spot_quantile(0.9, 0.0, 1.0, 1e-3, 10000, 200) == doctest::Approx(3.896).epsilon(1e-3));
    for (double gamma : {-0.4, 0.0, 1e-7, 0.3}) {
      CHECK(std::abs(thresh::spot_quantile(0.7, gamma, 2.0, 0.02, 10000, 200) - 0.7) <= 1e-12);
    }
  }

  TEST_CASE("SPOT quantile is non-increasing in q") {
    for (double gamma : {-0.3, 0.0, 0.2, 0.8}) {
      double last = INFINITY;
      for (double q = 1e-6; q < 0.02; q *= 1.5) {
        const double d = thresh::spot_quantile(0.5, gamma, 1.0, q, 10000, 200);
        CHECK(d <= last);
        last = d;
      }
    }
  }

  TEST_CASE("SPOT threshold on uniform scores") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> s(20000);
    for (auto& v : s) v = u(rng);
    const auto d = thresh::spot_threshold(s, 1e-4, 0.98);
    CHECK(d.delta > thresh::empirical_quantile(s, 0.98));
    CHECK(d.delta >= d.fit.t0);
    CHECK(d.method == thresh::ThresholdMethod::Spot);
  }

  TEST_CASE("delta is at least t0 on random score sets") {
    std::mt19937_64 rng(22);
    for (int trial = 0; trial < 200; ++trial) {
      const std::size_t n = 1 + rng() % 3000;
      std::vector<double> s(n);
      const int kind = trial % 3;
      for (auto& v : s) {
        const double x = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
        v = kind == 0 ? x : kind == 1 ? x * x * x : std::round(x * 4) / 4;
      }
      const double q = std::pow(10.0, -std::uniform_real_distribution<double>(1.0, 5.0)(rng));
      const auto d = thresh::spot_threshold(s, q, 0.9);
      CHECK(d.delta >= d.fit.t0);
      CHECK(std::isfinite(d.delta));
    }
  }

  TEST_CASE("fallback regimes") {
    const std::vector<double> flat(100, 0.25);
    const auto none = thresh::spot_threshold(flat, 1e-3, 0.98);
    CHECK(none.no_peaks);
    CHECK(none.delta == 0.25);

    std::vector<double> few(100, 0.0);
    for (int i = 0; i < 3; ++i) few[static_cast<std::size_t>(i) * 10] = 1.0 + i;
    const auto f = thresh::spot_threshold(few, 1e-3, 0.95);
    CHECK(f.few_peaks);
    CHECK(f.fit.exponential);
    CHECK(f.delta <= 3.0 + f.fit.sigma);
  }

  TEST_CASE("parameter checks") {
    const std::vector<double> s{0.1, 0.2};
    CHECK_THROWS_AS(thresh::spot_threshold(s, 0.0, 0.9), Error);
    CHECK_THROWS_AS(thresh::spot_threshold(s, 0.1, 1.0), Error);
    CHECK_THROWS_AS(thresh::spot_threshold(std::vector<double>{}, 0.1, 0.9), Error);
  }

  TEST_CASE("apply threshold is strict") {
    const auto y = thresh::apply_threshold(std::vector<double>{0.1, 0.5, 0.6, 0.5}, 0.5);
    CHECK(y.labels == std::vector<std::uint8_t>{0, 0, 1, 0});
  }

  TEST_CASE("determinism") {
    const auto s = gpd_sample(40, 5000, 0.1, 1.0);
    const auto a = thresh::spot_threshold(s, 1e-3, 0.98);
    const auto b = thresh::spot_threshold(s, 1e-3, 0.98);
    CHECK(a.delta == b.delta);
    CHECK(a.fit.gamma == b.fit.gamma);
  }
}
