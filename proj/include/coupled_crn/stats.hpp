#pragma once

// Small statistics toolkit for the estimators and the acceptance checks:
// two-pass moment summaries with standard errors, weighted least squares for
// log-log slope fits, one-sided Clopper-Pearson bounds, and the classical
// distribution-distance bands.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include <boost/math/distributions/beta.hpp>
#include <boost/math/distributions/chi_squared.hpp>

#include "coupled_crn/errors.hpp"

namespace ccrn {

struct SampleSummary {
  std::uint64_t n = 0;
  double mean = 0.0;
  double variance = 0.0;   // unbiased, divisor n-1
  double central2 = 0.0;   // divisor n
  double central4 = 0.0;   // divisor n

  double se_mean() const {
    return n > 1 ? std::sqrt(variance / static_cast<double>(n)) : 0.0;
  }

  // Asymptotic standard error of the sample variance.
  double se_variance() const {
    if (n < 2) return 0.0;
    const double nn = static_cast<double>(n);
    const double v = central4 - central2 * central2;
    return v > 0.0 ? std::sqrt(v / nn) : 0.0;
  }
};

inline SampleSummary summarize(std::span<const double> xs) {
  SampleSummary s;
  s.n = xs.size();
  if (s.n == 0) return s;
  double sum = 0.0;
  for (double x : xs) sum += x;
  s.mean = sum / static_cast<double>(s.n);
  double m2 = 0.0, m4 = 0.0;
  for (double x : xs) {
    const double d = x - s.mean;
    const double d2 = d * d;
    m2 += d2;
    m4 += d2 * d2;
  }
  const double nn = static_cast<double>(s.n);
  s.central2 = m2 / nn;
  s.central4 = m4 / nn;
  s.variance = s.n > 1 ? m2 / (nn - 1.0) : 0.0;
  return s;
}

// Unbiased sample covariance (divisor n-1).
inline double sample_covariance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) {
    throw UsageError("covariance needs two samples of equal length >= 2");
  }
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  const double n = static_cast<double>(a.size());
  ma /= n;
  mb /= n;
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - ma) * (b[i] - mb);
  return acc / (n - 1.0);
}

inline double pearson_correlation(std::span<const double> a, std::span<const double> b) {
  const double cov = sample_covariance(a, b);
  const double va = summarize(a).variance;
  const double vb = summarize(b).variance;
  if (va <= 0.0 || vb <= 0.0) return 0.0;
  return cov / std::sqrt(va * vb);
}

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
};

// Weighted least squares line through (x_i, y_i) with weights w_i
// (conventionally 1/Var(y_i)); the slope standard error comes from the
// weight-implied covariance.
inline LinearFit weighted_least_squares(std::span<const double> x,
                                        std::span<const double> y,
                                        std::span<const double> w) {
  if (x.size() != y.size() || x.size() != w.size() || x.size() < 2) {
    throw UsageError("weighted fit needs at least two points");
  }
  double sw = 0.0, swx = 0.0, swy = 0.0, swxx = 0.0, swxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(w[i] > 0.0)) throw UsageError("weights must be positive");
    sw += w[i];
    swx += w[i] * x[i];
    swy += w[i] * y[i];
    swxx += w[i] * x[i] * x[i];
    swxy += w[i] * x[i] * y[i];
  }
  const double denom = sw * swxx - swx * swx;
  if (!(denom > 0.0)) throw UsageError("degenerate abscissae in fit");
  LinearFit fit;
  fit.slope = (sw * swxy - swx * swy) / denom;
  fit.intercept = (swy - fit.slope * swx) / sw;
  fit.slope_se = std::sqrt(sw / denom);
  return fit;
}

// One-sided upper confidence bound for a binomial proportion.
inline double clopper_pearson_upper(std::uint64_t hits, std::uint64_t n,
                                    double confidence) {
  if (n == 0) throw UsageError("empty sample");
  if (hits > n) throw UsageError("hits exceed sample size");
  if (hits == n) return 1.0;
  const boost::math::beta_distribution<double> dist(
      static_cast<double>(hits) + 1.0, static_cast<double>(n - hits));
  return boost::math::quantile(dist, confidence);
}

inline double chi_squared_quantile(double dof, double p) {
  const boost::math::chi_squared_distribution<double> dist(dof);
  return boost::math::quantile(dist, p);
}

// Kolmogorov-Smirnov statistic against a supplied CDF; `cdf` must be the
// exact distribution function of the sample's law under the null.
template <typename Cdf>
double ks_statistic(std::vector<double> sample, Cdf&& cdf) {
  if (sample.empty()) throw UsageError("empty sample");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max(d, std::abs(f - static_cast<double>(i) / n));
    d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
  }
  return d;
}

// Critical value so that P(sqrt(n) D_n > k_alpha) ~ alpha for large n.
inline double ks_critical_value(double alpha) {
  return std::sqrt(-0.5 * std::log(alpha / 2.0));
}

// Half-width of the Dvoretzky-Kiefer-Wolfowitz confidence band.
inline double dkw_epsilon(std::uint64_t n, double alpha) {
  return std::sqrt(std::log(2.0 / alpha) / (2.0 * static_cast<double>(n)));
}

}  // namespace ccrn
