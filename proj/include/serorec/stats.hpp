#ifndef SEROREC_STATS_HPP
#define SEROREC_STATS_HPP

#include <functional>
#include <span>
#include <vector>

namespace serorec {

double mean(std::span<const double> x);
double sample_variance(std::span<const double> x);  // unbiased, n >= 2

// Inclusive linear interpolation between order statistics (the convention most
// software calls "type 7"): position h = (n-1)p. Input must be sorted.
double quantile_sorted(std::span<const double> sorted, double p);
double quantile(std::vector<double> x, double p);  // sorts a copy
double median(std::vector<double> x);

double normal_cdf(double z);
double normal_logpdf(double x, double mean, double var);

// Regularized incomplete gamma P(a,x) and Q(a,x) = 1 - P(a,x).
double gamma_p(double a, double x);
double gamma_q(double a, double x);

double lmvgamma(int d, double a);  // log multivariate gamma

// Two-sided KS distance between sample and a reference CDF.
double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf);
// Asymptotic two-sided p-value with the small-sample effective-n correction.
double ks_pvalue(std::size_t n, double d);

}  // namespace serorec

#endif
