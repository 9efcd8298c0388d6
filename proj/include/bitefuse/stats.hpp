#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace bitefuse {

// Standard normal CDF, accurate to machine precision via erfc.
double normal_cdf(double x);

// Standard normal quantile for p in (0,1), accurate to better than 1e-9
// (rational approximation refined with one Newton step).
double normal_quantile(double p);

// Empirical quantile with linear interpolation between order statistics
// ("type 7"): h = q*(n-1), interpolate between floor and ceil. `sorted`
// must be ascending and nonempty; q is clamped to [0,1].
double interp_quantile(std::span<const double> sorted, double q);

double mean(std::span<const double> xs);

// sample standard deviation, n-1 denominator; 0 for n < 2
double sample_std(std::span<const double> xs);

}  // namespace bitefuse
