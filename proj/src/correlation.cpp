#include "leakscope/correlation.hpp"

#include "leakscope/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace leakscope::stats {

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size())
    throw ValidationError("pearson: length mismatch (" + std::to_string(x.size()) + " vs " +
                          std::to_string(y.size()) + ")");
  const std::size_t n = x.size();
  if (n < 3)
    throw ValidationError("pearson: need at least 3 pairs, got " + std::to_string(n));

  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);

  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0)
    throw ValidationError("pearson: zero variance in " + std::string(sxx == 0.0 ? "x" : "y"));
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

namespace {

// Modified Lentz evaluation of the continued fraction for I_x(a, b).
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 500;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;

  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny)
    d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny)
      d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny)
      c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny)
      d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny)
      c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < kEps)
      return h;
  }
  throw NumericError("incomplete beta: continued fraction did not converge (a=" +
                     std::to_string(a) + ", b=" + std::to_string(b) + ", x=" + std::to_string(x) +
                     ")");
}

} // namespace

double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0))
    throw ValidationError("incomplete beta: shape parameters must be positive");
  if (!(x >= 0.0 && x <= 1.0))
    throw ValidationError("incomplete beta: x must lie in [0, 1]");
  if (x == 0.0)
    return 0.0;
  if (x == 1.0)
    return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  // The fraction converges fast only on this side of the mean; use the
  // symmetry I_x(a,b) = 1 - I_{1-x}(b,a) otherwise.
  if (x < (a + 1.0) / (a + b + 2.0))
    return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_sf(double t, double df) {
  if (!(df > 0.0))
    throw ValidationError("student_t_sf: degrees of freedom must be positive");
  if (std::isinf(t))
    return t > 0 ? 0.0 : 1.0;
  const double tail = 0.5 * regularized_incomplete_beta(0.5 * df, 0.5, df / (df + t * t));
  return t >= 0.0 ? tail : 1.0 - tail;
}

double pearson_p_value(double rho, std::size_t n) {
  if (n < 3)
    throw ValidationError("pearson_p_value: need n >= 3, got " + std::to_string(n));
  if (!(std::fabs(rho) <= 1.0))
    throw ValidationError("pearson_p_value: |rho| must not exceed 1");
  if (std::fabs(rho) == 1.0)
    return 0.0;
  const double df = static_cast<double>(n - 2);
  const double t = rho * std::sqrt(df / (1.0 - rho * rho));
  return std::min(1.0, 2.0 * student_t_sf(std::fabs(t), df));
}

std::vector<double> log_transform(std::span<const double> x) {
  std::vector<double> out;
  out.reserve(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0))
      throw ValidationError("log_transform: entry " + std::to_string(i) + " is not positive (" +
                            std::to_string(x[i]) + ")");
    out.push_back(std::log(x[i]));
  }
  return out;
}

} // namespace leakscope::stats
