#include <doctest.h>

#include <cmath>
#include <vector>

#include "fastpol/errors.hpp"
#include "fastpol/random.hpp"
#include "fastpol/stats.hpp"
#include "oracles.hpp"

using namespace fastpol;

TEST_CASE("moments") {
  const std::vector<double> x{2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0};
  CHECK(stats::mean(x) == 5.0);
  CHECK(stats::variance(x) == doctest::Approx(32.0 / 7.0));
  // Large offset: still exact for a shifted sample.
  std::vector<double> shifted;
  for (double v : x) shifted.push_back(v + 1e9);
  CHECK(stats::variance(shifted) == doctest::Approx(32.0 / 7.0).epsilon(1e-6));
}

TEST_CASE("normal distribution values") {
  CHECK(stats::normal_cdf(0.0) == 0.5);
  CHECK(stats::normal_cdf(1.959963984540054) == doctest::Approx(0.975).epsilon(1e-12));
  CHECK(stats::normal_cdf(3.0, 1.0, 2.0) == doctest::Approx(oracle::phi(1.0)));
  CHECK(stats::normal_pdf(0.0) == doctest::Approx(1.0 / std::sqrt(2.0 * M_PI)));
}

TEST_CASE("chi-square tail at tabulated points") {
  CHECK(stats::chi_square_sf(3.841458820694124, 1) == doctest::Approx(0.05).epsilon(1e-9));
  CHECK(stats::chi_square_sf(18.307038053275146, 10) == doctest::Approx(0.05).epsilon(1e-9));
  CHECK(stats::chi_square_sf(6.634896601021214, 1) == doctest::Approx(0.01).epsilon(1e-9));
  // dof = 2 is an exponential: sf = exp(-x/2).
  CHECK(stats::chi_square_sf(5.0, 2) == doctest::Approx(std::exp(-2.5)));
  CHECK(stats::chi_square_sf(0.0, 4) == 1.0);
}

TEST_CASE("Kolmogorov tail") {
  CHECK(stats::kolmogorov_sf(1.3580986393225505) == doctest::Approx(0.05).epsilon(1e-4));
  CHECK(stats::kolmogorov_sf(1.6276236115189504) == doctest::Approx(0.01).epsilon(1e-4));
  CHECK(stats::kolmogorov_sf(0.0) == 1.0);
  CHECK(stats::kolmogorov_sf(10.0) < 1e-80);
  CHECK(stats::ks_critical_value(10000, 0.01) == doctest::Approx(1.6276 / 100.0).epsilon(1e-3));
}

TEST_CASE("KS statistic against the brute-force oracle") {
  RandomStream rng(21);
  std::vector<double> x(400);
  for (auto& v : x) v = draw_normal(0.3, 2.0, rng);
  for (double mu : {0.0, 0.3}) {
    const auto r = stats::ks_test_normal(x, mu, 2.0);
    CHECK(r.statistic == doctest::Approx(oracle::ks_distance(x, mu, 2.0)).epsilon(1e-12));
  }
  // Ties on a lattice.
  std::vector<double> lattice;
  for (int i = 0; i < 300; ++i) lattice.push_back(std::round(draw_normal(0.0, 1.5, rng)));
  CHECK(stats::ks_test_normal(lattice, 0.0, 1.5).statistic ==
        doctest::Approx(oracle::ks_distance(lattice, 0.0, 1.5)).epsilon(1e-12));
}

TEST_CASE("KS accepts its own distribution and rejects a wrong width") {
  RandomStream rng(22);
  std::vector<double> x(5000);
  for (auto& v : x) v = draw_normal(0.0, 1.0, rng);
  CHECK(stats::ks_test_normal(x, 0.0, 1.0).p_value > 0.01);
  CHECK(stats::ks_test_normal(x, 0.0, 1.2).p_value < 1e-6);
  const auto degenerate = stats::ks_test_normal(x, 0.0, 0.0);
  CHECK(degenerate.statistic == 1.0);
  CHECK(degenerate.p_value == 0.0);
}

TEST_CASE("chi-square goodness of fit with pooling") {
  const std::vector<double> obs{3, 10, 20, 30, 25, 9, 3};
  const std::vector<double> exp{2, 11, 19, 31, 24, 10, 3};
  const auto r = stats::chi_square_gof(obs, exp);
  // Cells pool into {3+10}, 20, 30, 25, {9}, and the trailing 3 joins the last group.
  CHECK(r.groups == 5);
  const double s = (13 - 13.0) * (13 - 13.0) / 13.0 + 1.0 / 19.0 + 1.0 / 31.0 + 1.0 / 24.0 +
                   (12 - 13.0) * (12 - 13.0) / 13.0;
  CHECK(r.statistic == doctest::Approx(s));
  CHECK(r.dof == 4.0);
  CHECK(r.p_value == doctest::Approx(stats::chi_square_sf(s, 4)));

  const std::vector<double> short_exp{1.0};
  CHECK_THROWS_AS(stats::chi_square_gof(obs, short_exp), AnalysisError);
}
