#include "fastpol/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "fastpol/errors.hpp"

namespace fastpol::stats {

double mean(std::span<const double> x) {
  if (x.empty()) throw TooFewSamples("mean of an empty sample");
  double sum = 0.0;
  for (double v : x) sum += v;
  return sum / static_cast<double>(x.size());
}

double variance(std::span<const double> x) {
  if (x.size() < 2) throw TooFewSamples("variance needs at least two samples");
  const double m = mean(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return ss / static_cast<double>(x.size() - 1);
}

double normal_cdf(double x, double mu, double sigma) {
  return 0.5 * std::erfc(-(x - mu) / (sigma * std::numbers::sqrt2));
}

double normal_pdf(double x, double mu, double sigma) {
  const double z = (x - mu) / sigma;
  return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * std::numbers::pi));
}

double chi_square_sf(double statistic, double dof) {
  if (!(dof > 0.0)) throw DegenerateData("chi-square test has no degrees of freedom");
  if (statistic <= 0.0) return 1.0;
  return boost::math::gamma_q(dof / 2.0, statistic / 2.0);
}

double kolmogorov_sf(double lambda) {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 1.18) {
    // Theta-function form converges fast for small lambda.
    const double pi2 = std::numbers::pi * std::numbers::pi;
    double sum = 0.0;
    for (int j = 1; j <= 8; ++j) {
      const double k = 2.0 * j - 1.0;
      sum += std::exp(-k * k * pi2 / (8.0 * lambda * lambda));
    }
    return std::clamp(1.0 - std::sqrt(2.0 * std::numbers::pi) / lambda * sum, 0.0, 1.0);
  }
  double sum = 0.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = std::exp(-2.0 * j * j * lambda * lambda);
    sum += (j % 2 == 1 ? term : -term);
    if (term < 1e-17) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_test_normal(std::span<const double> x, double mu, double sigma) {
  if (x.empty()) throw TooFewSamples("KS test of an empty sample");
  if (!(sigma > 0.0)) return {1.0, 0.0};
  std::vector<double> sorted(x.begin(), x.end());
  std::sort(sorted.begin(), sorted.end());
  const auto n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = normal_cdf(sorted[i], mu, sigma);
    const double lo = static_cast<double>(i) / n;
    const double hi = static_cast<double>(i + 1) / n;
    d = std::max({d, hi - f, f - lo});
  }
  KsResult r;
  r.statistic = d;
  const double root = std::sqrt(n);
  r.p_value = kolmogorov_sf((root + 0.12 + 0.11 / root) * d);
  return r;
}

double ks_critical_value(std::size_t n, double alpha) {
  // Solve Q(lambda) = alpha by bisection; Q is monotone decreasing.
  double lo = 0.2, hi = 4.0;
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (lo + hi);
    (kolmogorov_sf(mid) > alpha ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi) / std::sqrt(static_cast<double>(n));
}

ChiSquareResult chi_square_gof(std::span<const double> observed, std::span<const double> expected,
                               double min_expected, std::size_t constraints) {
  if (observed.size() != expected.size()) {
    throw DegenerateData("observed and expected cell counts differ in length");
  }
  std::vector<double> pooled_obs, pooled_exp;
  double acc_obs = 0.0, acc_exp = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    acc_obs += observed[i];
    acc_exp += expected[i];
    if (acc_exp >= min_expected) {
      pooled_obs.push_back(acc_obs);
      pooled_exp.push_back(acc_exp);
      acc_obs = acc_exp = 0.0;
    }
  }
  if (acc_exp > 0.0 || acc_obs > 0.0) {
    if (pooled_exp.empty()) {
      pooled_obs.push_back(acc_obs);
      pooled_exp.push_back(acc_exp);
    } else {
      pooled_obs.back() += acc_obs;
      pooled_exp.back() += acc_exp;
    }
  }
  ChiSquareResult r;
  r.groups = pooled_exp.size();
  for (std::size_t i = 0; i < pooled_exp.size(); ++i) {
    if (pooled_exp[i] <= 0.0) throw DegenerateData("chi-square cell with zero expectation");
    const double diff = pooled_obs[i] - pooled_exp[i];
    r.statistic += diff * diff / pooled_exp[i];
  }
  if (r.groups <= constraints) throw DegenerateData("too few chi-square cells after pooling");
  r.dof = static_cast<double>(r.groups - constraints);
  r.p_value = chi_square_sf(r.statistic, r.dof);
  return r;
}

}  // namespace fastpol::stats
