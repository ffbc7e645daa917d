#pragma once

#include <functional>
#include <span>
#include <vector>

namespace glasslab::stats {

// Order-independent pairwise summation; used for every cross-disorder
// reduction so aggregates do not depend on worker count or scheduling.
double pairwise_sum(std::span<const double> values);

double mean(std::span<const double> values);
double sample_variance(std::span<const double> values); // denominator n-1
double standard_error(std::span<const double> values);  // sd/sqrt(n)

// Delete-one jackknife standard error of an arbitrary functional of the
// per-disorder records. `records` is indexed [i][component]; the functional
// maps the retained records to a scalar.
double jackknife_se(const std::vector<std::vector<double>>& records,
                    const std::function<double(const std::vector<std::vector<double>>&)>& functional);

// Cheap special case: jackknife of a plain mean (equals sd/sqrt(n)).
double jackknife_se_mean(std::span<const double> values);

struct SlopeFit {
    double slope = 0.0;
    double intercept = 0.0;
    double se = 0.0;    // jackknife over points
    double ci_lo = 0.0; // 95% CI
    double ci_hi = 0.0;
};

// OLS fit of y against x (used on log-log decay curves), with a delete-one
// jackknife CI over the points.
SlopeFit ols_slope(std::span<const double> x, std::span<const double> y);

// Standard normal CDF.
double normal_cdf(double z);

// Two-sided Kolmogorov-Smirnov statistic between a sample (sorted in place)
// and a continuous CDF.
double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf);

// Effective sample size via Geyer's initial positive sequence estimator.
double ess_initial_positive(std::span<const double> series);

// Smallest eigenvalue of a symmetric matrix (row-major n*n), via Jacobi
// rotations; intended for small n consistency checks.
double symmetric_min_eigenvalue(std::vector<double> a, int n);

} // namespace glasslab::stats
