#pragma once

// Reference computations kept apart from the library code they check.

#include <cmath>
#include <functional>

namespace oracle {

inline double bisect(const std::function<double(double)>& f, double lo, double hi, int iters = 200) {
  double flo = f(lo);
  for (int i = 0; i < iters; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if ((fm < 0) == (flo < 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// Composite Simpson rule with n (even) panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n = 20000) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Positive root of (s^2/2) u^2 + (s^2/2 - mu) u - beta = 0.
inline long double gbm_root(long double mu, long double sigma, long double beta) {
  const long double A = sigma * sigma / 2, B = sigma * sigma / 2 - mu, C = -beta;
  const long double disc = std::sqrt(B * B - 4 * A * C);
  // the stable form of (-B + disc) / (2A)
  return B < 0 ? (-B + disc) / (2 * A) : (2 * -C) / (B + disc);
}

struct Baseline {
  double r = 0.05, lambda = 5, gamma = 0.05, c = 1, alpha = 1.2, alpha_p = 0.8, alpha_s = 0.7;
  double mu = 0.7, sigma = 0.2;
};

// revenue multiplier written out case by case
inline double G(double y, double d, double alpha, double alpha_p, double alpha_s) {
  if (d <= y) return alpha * d + alpha_s * (y - d);
  return alpha * y - alpha_p * (d - y);
}

}  // namespace oracle
