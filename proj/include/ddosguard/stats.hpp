// Copyright 2026 The ddosguard Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DDOSGUARD_STATS_HPP_
#define DDOSGUARD_STATS_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

namespace ddosguard::stats {

struct SummaryStats {
  double mean = 0.0;
  double stddev = 0.0;
  std::size_t n = 0;

  double variance() const { return stddev * stddev; }
};

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  bool reject = false;
  double alpha = 0.05;
};

struct ConfidenceBound {
  double upper = 0.0;
  double level = 0.0;
};

namespace detail {

inline TestResult decide(double statistic, double p_value, double alpha) {
  p_value = std::clamp(p_value, 0.0, 1.0);
  return {statistic, p_value, p_value < alpha, alpha};
}

inline void require_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("alpha must lie in (0, 1)");
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Descriptive statistics

inline double sample_mean(std::span<const double> xs) {
  if (xs.empty()) throw std::invalid_argument("empty sample");
  double sum = 0.0;
  for (double x : xs) sum += x;
  return sum / static_cast<double>(xs.size());
}

/// Standard deviation with the N-1 denominator.
inline double sample_stddev(std::span<const double> xs) {
  if (xs.size() < 2) {
    throw std::invalid_argument("sample_stddev needs at least two values");
  }
  const double mean = sample_mean(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

inline SummaryStats summarize(std::span<const double> xs) {
  return {sample_mean(xs), sample_stddev(xs), xs.size()};
}

// ---------------------------------------------------------------------------
// Special functions

inline double normal_cdf(double x) {
  return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

inline double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

/// Inverse of normal_cdf. Rational approximation (Acklam) followed by one
/// Newton step against erfc, which brings the error to ~1e-15.
inline double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    if (p == 0.0) return -std::numeric_limits<double>::infinity();
    if (p == 1.0) return std::numeric_limits<double>::infinity();
    throw std::invalid_argument("normal_quantile: p outside [0, 1]");
  }
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  // Newton refinement; the residual is taken on the tail nearer to x so it
  // keeps relative precision far from the median.
  const double residual =
      x < 0.0 ? normal_cdf(x) - p : (1.0 - p) - 0.5 * std::erfc(x / std::numbers::sqrt2);
  const double density = normal_pdf(x);
  if (density > 0.0) x -= residual / density;
  return x;
}

namespace detail {

// Continued fraction for the incomplete beta, modified Lentz evaluation.
inline double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIterations = 500;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIterations; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace detail

/// Regularized incomplete beta I_x(a, b) for a, b > 0.
inline double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0 && b > 0.0)) {
    throw std::invalid_argument("incomplete_beta: a and b must be positive");
  }
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * detail::beta_continued_fraction(a, b, x) / a;
  }
  return 1.0 - front * detail::beta_continued_fraction(b, a, 1.0 - x) / b;
}

/// Two-sided tail probability P(|T| >= |t|) for Student's t with `df`
/// degrees of freedom.
inline double student_t_two_sided_p(double t, double df) {
  if (std::isinf(t)) return 0.0;
  if (t == 0.0) return 1.0;
  return incomplete_beta(0.5 * df, 0.5, df / (df + t * t));
}

/// Upper tail P(F >= f) for the F(d1, d2) distribution.
inline double f_upper_tail(double f, double d1, double d2) {
  if (f <= 0.0) return 1.0;
  if (std::isinf(f)) return 0.0;
  return incomplete_beta(0.5 * d2, 0.5 * d1, d2 / (d2 + d1 * f));
}

/// Asymptotic Kolmogorov survival function Q(lambda) = P(K > lambda).
inline double kolmogorov_survival(double lambda) {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 1.18) {
    // Theta-function form converges quickly for small lambda.
    const double factor = std::sqrt(2.0 * std::numbers::pi) / lambda;
    const double e = -std::numbers::pi * std::numbers::pi / (8.0 * lambda * lambda);
    double cdf = 0.0;
    for (int k = 1; k <= 20; ++k) {
      const double odd = 2.0 * k - 1.0;
      cdf += std::exp(e * odd * odd);
    }
    return std::clamp(1.0 - factor * cdf, 0.0, 1.0);
  }
  double q = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    q += (k % 2 == 1 ? 2.0 : -2.0) * term;
    if (term < 1e-17) break;
  }
  return std::clamp(q, 0.0, 1.0);
}

// ---------------------------------------------------------------------------
// Hypothesis tests

/// Two-sided one-sample K-S discrepancy of `xs` against `cdf`.
template <typename Cdf>
double ks_statistic(std::span<const double> xs, Cdf&& cdf) {
  if (xs.empty()) throw std::invalid_argument("empty sample");
  std::vector<double> sorted(xs.begin(), xs.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = cdf(sorted[i]);
    const double below = static_cast<double>(i) / n;
    const double above = static_cast<double>(i + 1) / n;
    d = std::max({d, above - f, f - below});
  }
  return d;
}

/// K-S test of `xs` against the normal fitted by its own mean and standard
/// deviation. The p-value is the classical asymptotic one, which is
/// conservative when the parameters are estimated from the sample.
inline TestResult ks_normality(std::span<const double> xs, double alpha) {
  detail::require_alpha(alpha);
  if (xs.size() < 8) throw std::invalid_argument("ks_normality needs at least 8 values");
  const SummaryStats s = summarize(xs);
  if (!(s.stddev > 0.0)) throw std::invalid_argument("degenerate sample");
  const double d =
      ks_statistic(xs, [&](double x) { return normal_cdf((x - s.mean) / s.stddev); });
  const double p = kolmogorov_survival(std::sqrt(static_cast<double>(xs.size())) * d);
  return detail::decide(d, p, alpha);
}

/// One-sided 100(1-alpha)% upper bound on the population mean.
inline ConfidenceBound upper_conf_bound(const SummaryStats& s, double alpha) {
  if (!(alpha > 0.0 && alpha <= 0.5)) {
    throw std::invalid_argument("upper_conf_bound: alpha outside (0, 0.5]");
  }
  if (s.n < 2) throw std::invalid_argument("upper_conf_bound needs n >= 2");
  const double z = alpha == 0.5 ? 0.0 : -normal_quantile(alpha);
  return {s.mean + z * s.stddev / std::sqrt(static_cast<double>(s.n)), 1.0 - alpha};
}

/// Unpooled (Welch-form) t statistic.
inline double t_statistic_welch(const SummaryStats& s1, const SummaryStats& s2) {
  if (s1.n < 2 || s2.n < 2) throw std::invalid_argument("t_statistic_welch needs n >= 2");
  const double se2 = s1.variance() / static_cast<double>(s1.n) +
                     s2.variance() / static_cast<double>(s2.n);
  if (!(se2 > 0.0)) throw std::invalid_argument("no variance");
  return (s1.mean - s2.mean) / std::sqrt(se2);
}

/// Weighted (pooled) variance of two groups.
inline double pooled_variance(const SummaryStats& s1, const SummaryStats& s2) {
  if (s1.n + s2.n < 3) throw std::invalid_argument("pooled_variance needs n1 + n2 >= 3");
  const double n1 = static_cast<double>(s1.n);
  const double n2 = static_cast<double>(s2.n);
  return ((n1 - 1.0) * s1.variance() + (n2 - 1.0) * s2.variance()) / (n1 + n2 - 2.0);
}

/// Two-sample t-test with pooled variance, two-sided, N1 + N2 - 2 df.
inline TestResult t_test_pooled(std::span<const double> sample1,
                                std::span<const double> sample2, double alpha) {
  detail::require_alpha(alpha);
  if (sample1.size() < 2 || sample2.size() < 2) {
    throw std::invalid_argument("t_test_pooled needs at least two values per sample");
  }
  const SummaryStats s1 = summarize(sample1);
  const SummaryStats s2 = summarize(sample2);
  const double pooled = pooled_variance(s1, s2);
  const double diff = s1.mean - s2.mean;
  const double se2 =
      pooled / static_cast<double>(s1.n) + pooled / static_cast<double>(s2.n);
  if (!(se2 > 0.0)) {
    if (diff == 0.0) return detail::decide(0.0, 1.0, alpha);
    const double inf = std::numeric_limits<double>::infinity();
    return detail::decide(diff > 0.0 ? inf : -inf, 0.0, alpha);
  }
  const double t = diff / std::sqrt(se2);
  const double df = static_cast<double>(s1.n + s2.n - 2);
  return detail::decide(t, student_t_two_sided_p(t, df), alpha);
}

/// Levene's test for equal variances of two groups, centred on group means.
inline TestResult levene_test(std::span<const double> sample1,
                              std::span<const double> sample2, double alpha) {
  detail::require_alpha(alpha);
  if (sample1.size() < 2 || sample2.size() < 2) {
    throw std::invalid_argument("levene_test needs at least two values per sample");
  }
  const auto abs_dev = [](std::span<const double> xs) {
    const double m = sample_mean(xs);
    std::vector<double> z;
    z.reserve(xs.size());
    for (double x : xs) z.push_back(std::fabs(x - m));
    return z;
  };
  const std::vector<double> z1 = abs_dev(sample1);
  const std::vector<double> z2 = abs_dev(sample2);
  const double n1 = static_cast<double>(z1.size());
  const double n2 = static_cast<double>(z2.size());
  const double total = n1 + n2;
  const double m1 = sample_mean(z1);
  const double m2 = sample_mean(z2);
  const double grand = (n1 * m1 + n2 * m2) / total;

  const double between = n1 * (m1 - grand) * (m1 - grand) + n2 * (m2 - grand) * (m2 - grand);
  double within = 0.0;
  for (double z : z1) within += (z - m1) * (z - m1);
  for (double z : z2) within += (z - m2) * (z - m2);

  constexpr double k = 2.0;
  if (!(within > 0.0)) {
    if (!(between > 0.0)) return detail::decide(0.0, 1.0, alpha);
    return detail::decide(std::numeric_limits<double>::infinity(), 0.0, alpha);
  }
  const double w = ((total - k) / (k - 1.0)) * between / within;
  return detail::decide(w, f_upper_tail(w, k - 1.0, total - k), alpha);
}

}  // namespace ddosguard::stats

#endif  // DDOSGUARD_STATS_HPP_
