#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace aki {

// Quantile with linear interpolation between order statistics (R type 7):
// h = p*(n-1). This is the single quantile definition used everywhere in the
// project (tail imputation, series trimming, knot placement, bootstrap CIs).
double quantile_sorted(std::span<const double> sorted, double p);
double quantile(std::vector<double> values, double p);

double mean(std::span<const double> v);
// population variance (divide by n)
double variance_pop(std::span<const double> v);
double sd_pop(std::span<const double> v);

double median(std::vector<double> values);
// 1.4826 * median absolute deviation
double robust_sd(std::span<const double> v);

// centered moving average of width `width`, window shrinking at the edges
std::vector<double> centered_moving_average(std::span<const double> values, int width);

// standard normal CDF
double normal_cdf(double z);

// P(F(d1, d2) > f), via the regularized incomplete beta function
double f_test_pvalue(double f, double d1, double d2);

} // namespace aki
