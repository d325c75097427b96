#include "fastpol/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fastpol/errors.hpp"

namespace fastpol {

void MeasurementRecord::validate() const {
  if (readouts.empty()) throw AnalysisError("measurement record has no readouts");
  for (double v : readouts) {
    if (!std::isfinite(v)) throw AnalysisError("measurement record has a non-finite readout");
  }
}

GaussianFitResult fit_gaussian(std::span<const double> readouts) {
  if (readouts.size() < kMinFitSamples) {
    throw TooFewSamples("Gaussian fit needs at least 100 readouts, got " +
                        std::to_string(readouts.size()));
  }
  GaussianFitResult fit;
  fit.n = readouts.size();
  const auto n = static_cast<double>(fit.n);
  fit.mu = stats::mean(readouts);
  fit.sigma = std::sqrt(stats::variance(readouts));
  fit.mu_err = fit.sigma / std::sqrt(n);
  fit.sigma_err = fit.sigma / std::sqrt(2.0 * (n - 1.0));
  fit.goodness = stats::ks_test_normal(readouts, fit.mu, fit.sigma);
  return fit;
}

GaussianFitResult fit_gaussian(const MeasurementRecord& record) {
  record.validate();
  return fit_gaussian(std::span<const double>(record.readouts));
}

ScalingFitResult fit_sigma_scaling(std::span<const ScalingPoint> points) {
  if (points.size() < 3) throw TooFewSamples("scaling fit needs at least three points");
  double lo = points.front().photon_number_2j, hi = lo;
  bool weighted = true;
  for (const auto& p : points) {
    if (!(p.photon_number_2j > 0.0) || !std::isfinite(p.sigma) || p.sigma < 0.0) {
      throw AnalysisError("scaling points need 2J > 0 and finite sigma >= 0");
    }
    lo = std::min(lo, p.photon_number_2j);
    hi = std::max(hi, p.photon_number_2j);
    if (!(p.sigma_err > 0.0) || !(p.sigma > 0.0)) weighted = false;
  }
  if (hi == lo) throw DegenerateData("scaling points all share one photon number");
  // Calibrated 2J values scatter around the nominal ones; allow 0.1% of slack.
  if (hi < 10.0 * lo * (1.0 - 1e-3)) {
    throw DegenerateData("scaling points must span at least one decade of 2J");
  }

  // y = sigma^2, x = J/2 = 2J/4, model y = epsilon x.
  double sxx = 0.0, sxy = 0.0;
  auto weight = [&](const ScalingPoint& p) {
    if (!weighted) return 1.0;
    const double sd = 2.0 * p.sigma * p.sigma_err;
    return 1.0 / (sd * sd);
  };
  for (const auto& p : points) {
    const double x = p.photon_number_2j / 4.0;
    const double y = p.sigma * p.sigma;
    const double w = weight(p);
    sxx += w * x * x;
    sxy += w * x * y;
  }
  ScalingFitResult fit;
  fit.weighted = weighted;
  fit.points.assign(points.begin(), points.end());
  fit.epsilon = sxy / sxx;
  fit.dof = points.size() - 1;
  for (const auto& p : points) {
    const double r = p.sigma * p.sigma - fit.epsilon * p.photon_number_2j / 4.0;
    fit.chi2 += weight(p) * r * r;
  }
  if (weighted) {
    fit.epsilon_err = 1.0 / std::sqrt(sxx);
  } else {
    fit.epsilon_err = std::sqrt(fit.chi2 / static_cast<double>(fit.dof) / sxx);
  }
  return fit;
}

std::vector<double> Histogram::centers() const {
  std::vector<double> c(bins());
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = 0.5 * (edges[i] + edges[i + 1]);
  return c;
}

std::vector<double> Histogram::theory(double sigma, double mu) const {
  std::vector<double> out;
  out.reserve(bins());
  const double scale = static_cast<double>(total) * bin_width();
  for (double c : centers()) out.push_back(sigma > 0.0 ? scale * stats::normal_pdf(c, mu, sigma) : 0.0);
  return out;
}

Histogram histogram(std::span<const double> data, BinSpec spec) {
  if (data.empty()) throw TooFewSamples("histogram of an empty sample");
  const auto [min_it, max_it] = std::minmax_element(data.begin(), data.end());
  const double lo = *min_it, hi = *max_it;
  const double range = hi - lo;

  double width = 0.0;
  std::size_t bins = 0;
  if (const auto* w = std::get_if<BinWidth>(&spec)) {
    if (!(w->width > 0.0) || !std::isfinite(w->width)) throw AnalysisError("bin width must be > 0");
    width = w->width;
  } else if (const auto* c = std::get_if<BinCount>(&spec)) {
    if (c->count == 0) throw AnalysisError("bin count must be > 0");
    bins = c->count;
    width = range > 0.0 ? range / static_cast<double>(bins) : 1.0;
  } else {
    // Sorted first so the width, and hence every edge, ignores input order.
    std::vector<double> sorted(data.begin(), data.end());
    std::sort(sorted.begin(), sorted.end());
    const double sd = sorted.size() > 1 ? std::sqrt(stats::variance(sorted)) : 0.0;
    width = 3.49 * sd / std::cbrt(static_cast<double>(data.size()));
    if (!(width > 0.0)) width = 1.0;
  }
  if (bins == 0) bins = range > 0.0 ? static_cast<std::size_t>(std::ceil(range / width)) : 1;
  bins = std::max<std::size_t>(bins, 1);

  Histogram h;
  h.total = data.size();
  h.counts.assign(bins, 0);
  // Degenerate data gets one bin centred on the value.
  const double start = range > 0.0 ? lo : lo - 0.5 * width;
  h.edges.resize(bins + 1);
  for (std::size_t i = 0; i <= bins; ++i) h.edges[i] = start + static_cast<double>(i) * width;
  for (double v : data) {
    auto idx = static_cast<std::size_t>(std::floor((v - start) / width));
    h.counts[std::min(idx, bins - 1)] += 1;
  }
  return h;
}

CorrelationResult correlation(std::span<const std::pair<double, double>> pairs) {
  if (pairs.size() < 100) {
    throw TooFewSamples("correlation needs at least 100 pairs, got " + std::to_string(pairs.size()));
  }
  const auto n = static_cast<double>(pairs.size());
  double mx = 0.0, my = 0.0;
  for (const auto& [x, y] : pairs) {
    mx += x;
    my += y;
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (const auto& [x, y] : pairs) {
    sxx += (x - mx) * (x - mx);
    syy += (y - my) * (y - my);
    sxy += (x - mx) * (y - my);
  }
  if (sxx == 0.0 || syy == 0.0) throw DegenerateData("correlation of a zero-variance coordinate");

  CorrelationResult c;
  c.n = pairs.size();
  c.r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  const double z = std::atanh(c.r);
  const double half = 1.959963984540054 / std::sqrt(n - 3.0);
  c.ci_low = std::isfinite(z) ? std::tanh(z - half) : c.r;
  c.ci_high = std::isfinite(z) ? std::tanh(z + half) : c.r;
  return c;
}

}  // namespace fastpol
