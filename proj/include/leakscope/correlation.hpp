#pragma once

#include <span>
#include <vector>

namespace leakscope::stats {

// Sample Pearson correlation. Requires equal lengths, n >= 3 and nonzero
// variance in both inputs.
double pearson(std::span<const double> x, std::span<const double> y);

// Two-sided p-value for H0: rho = 0, via t = rho * sqrt((n-2)/(1-rho^2)) with
// n-2 degrees of freedom. |rho| = 1 gives 0.
double pearson_p_value(double rho, std::size_t n);

// Natural log of each entry; every entry must be positive.
std::vector<double> log_transform(std::span<const double> x);

// Regularized incomplete beta I_x(a, b), continued-fraction evaluation.
double regularized_incomplete_beta(double a, double b, double x);

// P(T > t) for Student's t with `df` degrees of freedom.
double student_t_sf(double t, double df);

} // namespace leakscope::stats
