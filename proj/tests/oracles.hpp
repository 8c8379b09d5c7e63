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


// Independent reference computations used by the test binaries. Nothing here
// calls into the library: densities are integrated numerically and test
// statistics are recomputed from their textbook definitions.

#ifndef DDOSGUARD_TESTS_ORACLES_HPP_
#define DDOSGUARD_TESTS_ORACLES_HPP_

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace oracle {

/// Composite Simpson rule with `n` (even) panels.
template <typename F>
double simpson(F&& f, double a, double b, int n = 20000) {
  if (n % 2) ++n;
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

inline double log_beta(double a, double b) {
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

/// Regularized incomplete beta by quadrature; needs a, b >= 1.
inline double incomplete_beta(double a, double b, double x) {
  const double lb = log_beta(a, b);
  return simpson(
      [&](double u) {
        if (u <= 0.0 || u >= 1.0) {
          if ((u <= 0.0 && a > 1.0) || (u >= 1.0 && b > 1.0)) return 0.0;
          return std::exp(-lb);
        }
        return std::exp((a - 1.0) * std::log(u) + (b - 1.0) * std::log1p(-u) - lb);
      },
      0.0, x);
}

inline double t_density(double t, double df) {
  const double c = std::lgamma((df + 1.0) / 2.0) - std::lgamma(df / 2.0) -
                   0.5 * std::log(df * std::numbers::pi);
  return std::exp(c - (df + 1.0) / 2.0 * std::log1p(t * t / df));
}

/// Two-sided Student-t tail by integrating the density from 0 to |t|.
inline double t_two_sided(double t, double df) {
  const double inner = simpson([&](double u) { return t_density(u, df); }, 0.0, std::fabs(t));
  return std::max(0.0, 1.0 - 2.0 * inner);
}

inline double f_density(double x, double d1, double d2) {
  if (x <= 0.0) return d1 == 2.0 ? 1.0 : 0.0;
  const double lc = 0.5 * d1 * std::log(d1) + 0.5 * d2 * std::log(d2) - log_beta(d1 / 2, d2 / 2);
  return std::exp(lc + (d1 / 2 - 1) * std::log(x) - 0.5 * (d1 + d2) * std::log(d2 + d1 * x));
}

/// Upper F tail; the density must be finite at 0 (d1 >= 2).
inline double f_upper(double f, double d1, double d2) {
  const double inner = simpson([&](double u) { return f_density(u, d1, d2); }, 0.0, f, 200000);
  return std::max(0.0, 1.0 - inner);
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

/// Kolmogorov limiting survival by its alternating series.
inline double kolmogorov_q(double lambda) {
  double s = 0.0;
  for (int k = 1; k <= 200; ++k) {
    s += (k % 2 ? 2.0 : -2.0) * std::exp(-2.0 * k * k * lambda * lambda);
  }
  return std::clamp(s, 0.0, 1.0);
}

inline double mean(const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

/// Two-pass sample variance with N - 1 denominator.
inline double variance(const std::vector<double>& xs) {
  const double m = mean(xs);
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return s / static_cast<double>(xs.size() - 1);
}

inline double pooled_t(const std::vector<double>& a, const std::vector<double>& b) {
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double sp = ((na - 1) * variance(a) + (nb - 1) * variance(b)) / (na + nb - 2);
  return (mean(a) - mean(b)) / std::sqrt(sp * (1 / na + 1 / nb));
}

/// Levene W with mean centring, written as a one-way ANOVA on |x - mean|.
inline double levene_w(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> za, zb;
  const double ma = mean(a);
  const double mb = mean(b);
  for (double x : a) za.push_back(std::fabs(x - ma));
  for (double x : b) zb.push_back(std::fabs(x - mb));
  std::vector<double> all(za);
  all.insert(all.end(), zb.begin(), zb.end());
  const double grand = mean(all);
  const double ssb = za.size() * std::pow(mean(za) - grand, 2) +
                     zb.size() * std::pow(mean(zb) - grand, 2);
  const double ssw = variance(za) * (za.size() - 1) + variance(zb) * (zb.size() - 1);
  const double n = static_cast<double>(all.size());
  return (n - 2) * ssb / ssw;
}

}  // namespace oracle

#endif  // DDOSGUARD_TESTS_ORACLES_HPP_
