#pragma once

#include <cstddef>
#include <span>

namespace fastpol::stats {

double mean(std::span<const double> x);
/// Unbiased (N - 1) sample variance.
double variance(std::span<const double> x);

double normal_cdf(double x, double mu = 0.0, double sigma = 1.0);
double normal_pdf(double x, double mu = 0.0, double sigma = 1.0);

/// Survival function of the chi-square distribution.
double chi_square_sf(double statistic, double dof);

/// Kolmogorov limiting survival function Q(lambda).
double kolmogorov_sf(double lambda);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// One-sample KS against Normal(mu, sigma). A degenerate reference
/// (sigma <= 0) is always rejected: D = 1, p = 0.
KsResult ks_test_normal(std::span<const double> x, double mu, double sigma);

/// Asymptotic two-sided critical value of D at level alpha (0.01 -> 1.628/sqrt(n)).
double ks_critical_value(std::size_t n, double alpha);

struct ChiSquareResult {
  double statistic = 0.0;
  double dof = 0.0;
  double p_value = 1.0;
  std::size_t groups = 0;
};

/// Pearson goodness of fit after pooling adjacent cells until each pooled
/// expectation reaches `min_expected`. dof = groups - constraints.
ChiSquareResult chi_square_gof(std::span<const double> observed, std::span<const double> expected,
                               double min_expected = 5.0, std::size_t constraints = 1);

}  // namespace fastpol::stats
